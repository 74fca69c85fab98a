"""Ground-truth verification of exploration runs.

Everything here sits on the harness side of the anonymity firewall: it knows
the hidden graph and replays the trace against it. The map-to-ground
correspondence is reconstructed from the trace alone (each map vertex maps to
the ground vertex where it was first sensed; frontier vertices follow one
vertical edge label), then checked to be a locally injective, locally
surjective (at explored vertices), port-preserving homomorphism phase by
phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import PortNumberedGraph, ball


@dataclass
class CheckResult:
    ok: bool
    problems: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _as_port_graph(map_like):
    """Accept an ExplorationMap, a snapshot dict, or a PortNumberedGraph."""
    if isinstance(map_like, PortNumberedGraph):
        return map_like, None, None
    if isinstance(map_like, dict):
        pg = PortNumberedGraph(map_like["n"], [tuple(e) for e in map_like["edges"]])
        return pg, map_like.get("vis"), map_like.get("cir")
    pg = map_like.to_port_graph()
    return pg, dict(map_like.explored_in), dict(map_like.cluster_of)


def verify_rooted_isomorphism(map_like, g, v0):
    """Synchronized traversal from (map homebase, v0) matching ports.

    Port-numbered rooted graphs are rigid: the correspondence is forced edge
    by edge, so either it completes into a bijection or a concrete mismatch
    is found and reported.
    """
    pg, _vis, _cir = _as_port_graph(map_like)
    problems = []
    if pg.n != g.n:
        problems.append(f"vertex count: map has {pg.n}, graph has {g.n}")
    image = {0: v0}
    queue = [0]
    while queue:
        n = queue.pop()
        u = image[n]
        mp, gp = pg.ports(n), g.ports(u)
        if mp != gp:
            problems.append(f"port set at map vertex {n}: {mp} vs {gp} at {u}")
        for p in mp:
            if p not in g._ports[u]:
                continue
            m, q_map = pg._ports[n][p]
            w, q_g = g._ports[u][p]
            if q_map != q_g:
                problems.append(
                    f"edge label at map vertex {n} port {p}: far port {q_map} vs {q_g}"
                )
            if m in image:
                if image[m] != w:
                    problems.append(
                        f"map vertex {m} reached as both ground {image[m]} and {w}"
                    )
            else:
                image[m] = w
                queue.append(m)
    if len(image) != pg.n:
        problems.append(f"map not connected from homebase: reached {len(image)}/{pg.n}")
    covered = set(image.values())
    if len(covered) != len(image):
        problems.append("two map vertices share a ground image (map is a proper cover)")
    if not problems and len(covered) != g.n:
        problems.append(f"ground vertices unreached: {g.n - len(covered)}")
    return CheckResult(not problems, problems)


def replay_ground(trace, g):
    """Fold the move events over the ground truth.

    Returns (positions, problems): positions[i] is where the agent stands
    after i moves (positions[0] is the homebase). In-port disagreements with
    the trace are reported.
    """
    header = trace.header()
    pos = header["root"]
    positions = [pos]
    problems = []
    for ev in trace.events:
        if ev["kind"] != "move":
            continue
        step = g.step(pos, ev["out"])
        if step is None:
            problems.append(f"move {len(positions)}: no port {ev['out']} at ground {pos}")
            break
        pos, in_port = step
        if in_port != ev["in"]:
            problems.append(
                f"move {len(positions)}: arrived on port {in_port}, trace says {ev['in']}"
            )
        positions.append(pos)
    return positions, problems


def verify_coverage(trace, g):
    """Replaying the moves must visit every ground vertex at least once."""
    positions, problems = replay_ground(trace, g)
    unvisited = sorted(set(range(g.n)) - set(positions))
    if unvisited:
        problems.append(f"unvisited ground vertices: {unvisited}")
    return CheckResult(not problems, problems)


def _sense_log(trace, g):
    """Per-sense (phase, map vertex, ground vertex) triples, replaying map
    positions against the snapshots (phase i moves only use edges already in
    the previous snapshot)."""
    header = trace.header()
    ground = header["root"]
    map_pos = 0
    adj = {0: {}}
    phase = 0
    senses = []
    problems = []
    for ev in trace.events:
        kind = ev["kind"]
        if kind == "phase_start":
            phase = ev["phase"]
        elif kind == "move":
            got = adj.get(map_pos, {}).get(ev["out"])
            if got is None:
                problems.append(
                    f"phase {phase}: trace walks port {ev['out']} at map vertex "
                    f"{map_pos} which is not in the map"
                )
                return senses, problems
            map_pos = got[0]
            step = g.step(ground, ev["out"])
            if step is None:
                problems.append(f"phase {phase}: ground walk broke at {ground}")
                return senses, problems
            ground = step[0]
        elif kind == "sense":
            senses.append((phase, map_pos, ground))
        elif kind == "phase_end":
            snap = ev["map"]
            adj = {n: {} for n in range(snap["n"])}
            for (a, b, pa, pb) in snap["edges"]:
                adj[a][pa] = (b, pb)
                adj[b][pb] = (a, pa)
    return senses, problems


def first_sensed_map(trace, g):
    """map vertex -> (phase, ground vertex) of its first sense; also asserts
    single-phase sensing (a vertex re-sensed in a later phase is reported)."""
    senses, problems = _sense_log(trace, g)
    first = {}
    for (phase, n, u) in senses:
        if n in first:
            f_phase, f_u = first[n]
            if f_phase != phase:
                problems.append(f"map vertex {n} sensed in phases {f_phase} and {phase}")
            elif f_u != u:
                problems.append(f"map vertex {n} sensed at ground {f_u} and {u}")
        else:
            first[n] = (phase, u)
    return first, problems


def _phi_for_snapshot(snap, first, g, problems):
    """Reconstruct the map-to-ground correspondence for one snapshot.

    Explored vertices map to where they were first sensed; a frontier vertex
    follows its lexicographically smallest vertical edge (explored endpoint,
    port) for definiteness. Path independence is then checked, not assumed,
    by the per-edge homomorphism sweep in the caller.
    """
    vis = snap["vis"]
    phi = {}
    for n in range(snap["n"]):
        if vis.get(n) is not None:
            if n not in first:
                problems.append(f"vertex {n} marked explored but never sensed")
                return None
            phi[n] = first[n][1]
    incident = {}
    for (a, b, pa, pb) in snap["edges"]:
        if a in phi and b not in phi:
            incident.setdefault(b, []).append((a, pa))
        elif b in phi and a not in phi:
            incident.setdefault(a, []).append((b, pb))
    for n in range(snap["n"]):
        if n in phi:
            continue
        if n not in incident:
            problems.append(f"frontier vertex {n} has no explored neighbour")
            return None
        m, p = min(incident[n])
        step = g.step(phi[m], p)
        if step is None:
            problems.append(f"frontier vertex {n}: ground has no port {p} at {phi[m]}")
            return None
        phi[n] = step[0]
    return phi


def _check_snapshot(snap, phi, g, explored_only_ball_root=None):
    """Structural checks of one snapshot under phi. Returns problems."""
    problems = []
    vis = snap["vis"]
    n_count = snap["n"]
    nbrs = {n: {} for n in range(n_count)}
    for (a, b, pa, pb) in snap["edges"]:
        nbrs[a][b] = (pa, pb)
        nbrs[b][a] = (pb, pa)
        got = g.step(phi[a], pa)
        if got != (phi[b], pb):
            problems.append(
                f"edge {a}-{b} ({pa},{pb}) maps to {phi[a]}->{got}, "
                f"expected ({phi[b]},{pb})"
            )
    for n in range(n_count):
        images = {}
        for m in nbrs[n]:
            fm = phi[m]
            if fm in images:
                problems.append(
                    f"local injectivity at {n}: neighbours {images[fm]} and {m} "
                    f"both map to ground {fm}"
                )
            images[fm] = m
        if vis.get(n) is None:
            continue
        fn = phi[n]
        ground_nbrs = set(g._nbrs[fn])
        if set(images) != ground_nbrs:
            missing = sorted(ground_nbrs - set(images))
            problems.append(
                f"local surjectivity at explored {n}: ground neighbours "
                f"{missing} of {fn} not represented"
            )
            continue
        mlist = sorted(nbrs[n])
        for i, a in enumerate(mlist):
            for b in mlist[i + 1:]:
                in_map = b in nbrs[a]
                in_g = g.has_edge(phi[a], phi[b])
                if in_map != in_g:
                    problems.append(
                        f"triangle preservation at explored {n}: pair ({a},{b}) "
                        f"{'mapped' if in_map else 'unmapped'} but ground "
                        f"{'has' if in_g else 'lacks'} edge {phi[a]}-{phi[b]}"
                    )
    return problems


def verify_phase_invariants(trace, g):
    """Per-phase map correctness: for each phase-end snapshot, reconstruct
    the correspondence and check homomorphism + port preservation, local
    injectivity everywhere, local surjectivity and triangle preservation at
    explored vertices; phase 1 additionally must equal the homebase ball."""
    first, base_problems = first_sensed_map(trace, g)
    results = []
    root = trace.header()["root"]
    for (phase, snap) in trace.snapshots():
        problems = list(base_problems) if phase == 1 else []
        phi = _phi_for_snapshot(snap, first, g, problems)
        if phi is not None:
            problems.extend(_check_snapshot(snap, phi, g))
            if phase == 1:
                pg = PortNumberedGraph(snap["n"], snap["edges"])
                if ball(pg, 0).signature() != ball(g, root).signature():
                    problems.append("phase 1 map is not the ball around the homebase")
        results.append((phase, CheckResult(not problems, problems)))
    return results


def reconstruct_final_phi(trace, g):
    """phi for the last snapshot (total on a halted run), as a list."""
    first, problems = first_sensed_map(trace, g)
    snaps = trace.snapshots()
    if not snaps:
        return None, ["trace has no phase snapshots"]
    _, snap = snaps[-1]
    phi = _phi_for_snapshot(snap, first, g, problems)
    if phi is None or problems:
        return None, problems
    return [phi[n] for n in range(snap["n"])], []


def rooted_embedding(sub, big, sub_root, big_root):
    """Forced port-preserving embedding of ``sub`` into ``big`` from the
    given roots; used to check that a cut-off map is a prefix of a cover."""
    sub_pg, _, _ = _as_port_graph(sub)
    problems = []
    image = {sub_root: big_root}
    queue = [sub_root]
    while queue:
        n = queue.pop()
        u = image[n]
        for p in sub_pg.ports(n):
            m, q = sub_pg._ports[n][p]
            got = big.step(u, p)
            if got is None or got[1] != q:
                problems.append(
                    f"sub edge at {n} port {p} (far {q}) has no counterpart at {u}"
                )
                continue
            w = got[0]
            if m in image:
                if image[m] != w:
                    problems.append(f"sub vertex {m} maps to both {image[m]} and {w}")
            else:
                image[m] = w
                queue.append(m)
    if len(image) != sub_pg.n:
        problems.append("sub graph not connected from its root")
    if len(set(image.values())) != len(image):
        problems.append("embedding not injective")
    return CheckResult(not problems, problems)
