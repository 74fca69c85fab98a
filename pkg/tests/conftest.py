import networkx as nx

from binox.families import generate, parse_spec


def gen(spec, ports="canonical"):
    return generate(parse_spec(spec, port_scheme=ports))


def to_nx(g):
    G = nx.Graph()
    G.add_nodes_from(range(g.n))
    G.add_edges_from((u, v) for (u, v, _pu, _pv) in g.edges)
    return G
