"""Phase-based exploration that builds a map of an anonymous graph.

The agent explores one cluster per phase (clusters of its own map, tracked by
a stack in DFS order). During a phase it walks the cluster, senses the
radius-1 ball at each cluster vertex, and collects a phase-local ledger:

* pre-vertices (n, p, q): ball edges at an explored map vertex n with no
  matching labelled edge in the map yet; each class of these becomes one new
  frontier vertex;
* equivalences between pre-vertices: a triangle seen at n whose mapped side
  leads to a cluster mate m identifies (n, p) and (m, p') as the same unknown
  vertex, and the union-find closure of these prevents duplication;
* horizontal records: triangles whose both non-center sides are unmapped
  become edges between two frontier vertices of the next sphere.

After the map update the recorded balls must match the map's radius-1 balls
exactly (port-preserving, center fixed); any mismatch ends the run via the
error path. New frontier components become new clusters and are pushed.
The run halts when the stack is empty.
"""

from __future__ import annotations

from collections import deque

from .graph import Ball
from .runtime import run_agent


class PortCollisionError(RuntimeError):
    """A map insertion would give a vertex two edges on one port."""


class ExplorationMap:
    """The agent's growing map: port-labelled vertices plus bookkeeping.

    ``cluster_of`` tags every vertex with the cluster it was discovered in;
    ``explored_in`` holds the phase a vertex was sensed in, or None while it
    is still frontier. Vertex ids are allocation-ordered naturals, the
    homebase is always 0.
    """

    def __init__(self):
        self._ports = []  # per vertex: out port -> (neighbour, far port)
        self._nbrs = []   # per vertex: neighbour -> (out port, far port)
        self.cluster_of = {}
        self.explored_in = {}

    def add_vertex(self):
        self._ports.append({})
        self._nbrs.append({})
        nid = len(self._ports) - 1
        self.explored_in[nid] = None
        return nid

    def vertex_count(self):
        return len(self._ports)

    def vertex_ids(self):
        return range(len(self._ports))

    def add_edge(self, a, pa, b, pb):
        """Insert edge a-b labelled (pa, pb); returns False if the exact
        edge is already present, raises PortCollisionError on any clash."""
        if a == b:
            raise PortCollisionError(f"self edge at map vertex {a}")
        eda = self._ports[a].get(pa)
        edb = self._ports[b].get(pb)
        if eda == (b, pb) and edb == (a, pa):
            return False
        if eda is not None or edb is not None:
            raise PortCollisionError(
                f"port clash inserting {a}-{b} labelled ({pa},{pb}): "
                f"port {pa}@{a} -> {eda}, port {pb}@{b} -> {edb}"
            )
        if b in self._nbrs[a]:
            raise PortCollisionError(
                f"second edge between map vertices {a} and {b} "
                f"(existing labels {self._nbrs[a][b]}, new ({pa},{pb}))"
            )
        self._ports[a][pa] = (b, pb)
        self._ports[b][pb] = (a, pa)
        self._nbrs[a][b] = (pa, pb)
        self._nbrs[b][a] = (pb, pa)
        return True

    def step(self, n, port):
        return self._ports[n].get(port)

    def has_label(self, n, p, q):
        """Is there an edge at n going out on port p and arriving on q?"""
        got = self._ports[n].get(p)
        return got is not None and got[1] == q

    def degree(self, n):
        return len(self._ports[n])

    def ports(self, n):
        return sorted(self._ports[n])

    def neighbors(self, n):
        return [self._ports[n][p][0] for p in sorted(self._ports[n])]

    def frontier(self):
        return [n for n in self.vertex_ids() if self.explored_in[n] is None]

    def edges(self):
        out = []
        for a in self.vertex_ids():
            for pa, (b, pb) in self._ports[a].items():
                if a < b:
                    out.append((a, b, pa, pb))
        return sorted(out)

    def local_ball(self, n):
        """The map's radius-1 ball at n in the same local form a sensed
        ball has: center 0, neighbours by ascending port."""
        local = {n: 0}
        order = [n]
        edges = []
        for p in sorted(self._ports[n]):
            m, q = self._ports[n][p]
            local[m] = len(order)
            order.append(m)
            edges.append((0, local[m], p, q))
        nbrs = order[1:]
        for i, a in enumerate(nbrs):
            na = self._nbrs[a]
            for b in nbrs[i + 1:]:
                pq = na.get(b)
                if pq is not None:
                    edges.append((local[a], local[b], pq[0], pq[1]))
        return Ball(len(order), edges, order)

    def snapshot(self):
        """JSON-able copy: the shared graph format plus cir/vis tables."""
        return {
            "n": self.vertex_count(),
            "edges": [list(e) for e in self.edges()],
            "cir": dict(self.cluster_of),
            "vis": dict(self.explored_in),
            "homebase": 0,
        }

    def to_port_graph(self):
        from .graph import PortNumberedGraph

        return PortNumberedGraph(self.vertex_count(), self.edges())


class PhaseLedger:
    """Phase-local identification state (reset every phase)."""

    def __init__(self):
        self.pre_vertices = {}   # (n, out port) -> far port
        self.equiv_pairs = []    # ((n, p), (m, p')) both keys in pre_vertices
        self.horizontal = set()  # (n, p1, p2, r, s) with p1 < p2
        self.balls = {}          # map vertex -> sensed Ball (center = 0)


class ClusterStack:
    """LIFO of cluster ids driving the DFS over the cluster tree; every id
    is pushed at most once."""

    def __init__(self):
        self._items = []
        self._pushed = set()

    def push(self, cid):
        assert cid not in self._pushed, f"cluster {cid} pushed twice"
        self._pushed.add(cid)
        self._items.append(cid)

    def pop(self):
        return self._items.pop()

    def __bool__(self):
        return bool(self._items)

    def __len__(self):
        return len(self._items)


def plan_cluster_tour(emap, start, cluster):
    """Moves that reach ``cluster`` from ``start`` and visit all of it.

    Approach: shortest map path to the nearest cluster vertex (BFS expanding
    ports in ascending order, so ties break toward small ports). Tour: DFS
    over a smallest-port-first spanning tree of the cluster's induced map
    subgraph, with the trailing backtracks after the last first-visit
    trimmed. Returns a list of (out_port, target_map_vertex) steps.
    """
    members = set(cluster)
    moves = []
    if start in members:
        entry = start
    else:
        prev = {start: None}
        queue = deque([start])
        entry = None
        while queue:
            x = queue.popleft()
            if x in members:
                entry = x
                break
            for p in sorted(emap._ports[x]):
                y = emap._ports[x][p][0]
                if y not in prev:
                    prev[y] = (x, p)
                    queue.append(y)
        if entry is None:
            raise RuntimeError(f"cluster {sorted(members)} unreachable in map")
        path = []
        x = entry
        while prev[x] is not None:
            x, p = prev[x]
            path.append(p)
        path.reverse()
        x = start
        for p in path:
            y = emap._ports[x][p][0]
            moves.append((p, y))
            x = y
    visited = {entry}
    discovery_flags = [True] * len(moves)  # approach moves never trimmed

    def dfs(x):
        for p in sorted(emap._ports[x]):
            y, q = emap._ports[x][p]
            if y in members and y not in visited:
                visited.add(y)
                moves.append((p, y))
                discovery_flags.append(True)
                dfs(y)
                moves.append((q, x))
                discovery_flags.append(False)

    dfs(entry)
    last = max((i for i, d in enumerate(discovery_flags) if d), default=-1)
    return moves[: last + 1]


def record_ball(emap, ledger, n, sensed, phase):
    """Store the ball sensed at map vertex n and mark it explored."""
    assert n not in ledger.balls, f"map vertex {n} sensed twice in one phase"
    ledger.balls[n] = sensed
    emap.explored_in[n] = phase


def harvest_ledger(emap, ledger, n):
    """Mine the ball recorded at n for pre-vertices, equivalences between
    pre-vertices, and horizontal edge records. Conditions are evaluated
    against the map as it stood at the start of the phase (the map is only
    updated afterwards, in apply_ledger)."""
    b = ledger.balls[n]
    center_port = {}
    for (p, q, j) in b.center_edges():
        center_port[j] = (p, q)
        if not emap.has_label(n, p, q):
            ledger.pre_vertices[(n, p)] = q
    for (i, j, r, s) in b.horizontal_edges():
        pi, qi = center_port[i]
        pj, qj = center_port[j]
        mapped_i = emap.has_label(n, pi, qi)
        mapped_j = emap.has_label(n, pj, qj)
        if mapped_i and not mapped_j:
            m = emap.step(n, pi)[0]
            if not emap.has_label(m, r, s):
                ledger.equiv_pairs.append(((n, pj), (m, r)))
        elif mapped_j and not mapped_i:
            m = emap.step(n, pj)[0]
            if not emap.has_label(m, s, r):
                ledger.equiv_pairs.append(((n, pi), (m, s)))
        elif not mapped_i and not mapped_j:
            rec = (n, pi, pj, r, s) if pi < pj else (n, pj, pi, s, r)
            ledger.horizontal.add(rec)


def apply_ledger(emap, ledger):
    """Create one frontier vertex per equivalence class of pre-vertices and
    insert the vertical and horizontal edges. Returns the new map ids.

    Duplicate insertions (same edge, same labels, e.g. one horizontal edge
    witnessed from both endpoints' triangles) are skipped; any label clash
    raises PortCollisionError, which the caller turns into the error path.
    """
    parent = {k: k for k in ledger.pre_vertices}

    def find(k):
        root = k
        while parent[root] != root:
            root = parent[root]
        while parent[k] != root:
            parent[k], k = root, parent[k]
        return root

    for a, b in ledger.equiv_pairs:
        assert a in parent, f"equivalence pair references unknown pre-vertex {a}"
        assert b in parent, f"equivalence pair references unknown pre-vertex {b}"
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    classes = {}
    for k in ledger.pre_vertices:
        classes.setdefault(find(k), []).append(k)
    new_of = {}
    new_ids = []
    for members in sorted(classes.values(), key=min):
        nid = emap.add_vertex()
        new_ids.append(nid)
        for k in members:
            new_of[k] = nid
    for (n, p) in sorted(ledger.pre_vertices):
        q = ledger.pre_vertices[(n, p)]
        emap.add_edge(n, p, new_of[(n, p)], q)
    for (n, p1, p2, r, s) in sorted(ledger.horizontal):
        emap.add_edge(new_of[(n, p1)], r, new_of[(n, p2)], s)
    return new_ids


def check_local_iso(emap, ledger, cluster):
    """Compare each recorded ball with the updated map's ball (rooted,
    port-preserving). Returns the first failing map vertex or None."""
    for n in cluster:
        if ledger.balls[n].signature() != emap.local_ball(n).signature():
            return n
    return None


def discover_new_clusters(emap, new_ids):
    """Partition this phase's new frontier vertices into connected
    components (all edges among them are horizontal by construction);
    components are returned in ascending order of their smallest id."""
    pending = set(new_ids)
    comps = []
    for v in sorted(new_ids):
        if v not in pending:
            continue
        comp = []
        queue = deque([v])
        pending.discard(v)
        while queue:
            x = queue.popleft()
            comp.append(x)
            for y in emap._nbrs[x]:
                if y in pending:
                    pending.discard(y)
                    queue.append(y)
        comps.append(sorted(comp))
    return comps


class ClusterExplorer:
    """The exploration algorithm as an agent (run via the environment)."""

    def __init__(self):
        self.emap = None

    def partial_result(self):
        return self.emap

    def run(self, env):
        emap = ExplorationMap()
        self.emap = emap
        n0 = emap.add_vertex()
        emap.cluster_of[n0] = 0
        emap.explored_in[n0] = 0
        stack = ClusterStack()
        stack.push(0)
        next_cid = 1
        pos = n0
        phase = 0
        while stack:
            phase += 1
            env.trace.log_phase_start(phase)
            cid = stack.pop()
            cluster = sorted(n for n in emap.vertex_ids() if emap.cluster_of.get(n) == cid)
            assert cluster, f"empty cluster {cid}"
            ledger = PhaseLedger()
            pos = self._explore_cluster(env, emap, ledger, pos, cluster, phase)
            for n in cluster:
                harvest_ledger(emap, ledger, n)
            try:
                new_ids = apply_ledger(emap, ledger)
            except PortCollisionError as e:
                env.declare_error(f"map update impossible: {e}")
            bad = check_local_iso(emap, ledger, cluster)
            if bad is not None:
                env.declare_error(
                    f"ball at map vertex {bad} does not match the updated map"
                )
            for comp in discover_new_clusters(emap, new_ids):
                for v in comp:
                    emap.cluster_of[v] = next_cid
                stack.push(next_cid)
                next_cid += 1
            env.trace.log_phase_end(phase, emap.snapshot())
        return emap

    def _explore_cluster(self, env, emap, ledger, pos, cluster, phase):
        waiting = set(cluster)
        if pos in waiting:
            record_ball(emap, ledger, pos, env.sense().ball, phase)
            waiting.discard(pos)
        for (p, target) in plan_cluster_tour(emap, pos, cluster):
            in_port = env.move(p)
            expected = emap.step(pos, p)
            assert expected is not None and expected[0] == target
            if expected[1] != in_port:
                env.declare_error(
                    f"arrived through port {in_port}, map expected {expected[1]}"
                )
            pos = target
            if pos in waiting:
                record_ball(emap, ledger, pos, env.sense().ball, phase)
                waiting.discard(pos)
        assert not waiting, f"tour missed cluster vertices {sorted(waiting)}"
        return pos


def explore(env):
    """Run the cluster explorer in ``env`` and return the outcome."""
    return run_agent(ClusterExplorer(), env)
