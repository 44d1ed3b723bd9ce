"""Attack-graph generators for the experiment topologies."""

from __future__ import annotations

import networkx as nx
import numpy as np

from .graph import AttackGraph, GraphError, build_graph, enumerate_attack_paths

REFERENCE_20_VERSION = "ref20-v1"

# Frozen wiring of the 20-node reference network. From entry 0 the only
# attack paths are 0-5-11-15-{18,19} and 0-6-12-16-{19,20}; entries 1 and 2
# reach the targets through their own branches, and 3, 4 are dead ends.
REFERENCE_20_EDGES = (
    (0, 5), (0, 6), (5, 11), (6, 12), (11, 15), (12, 16),
    (15, 18), (15, 19), (16, 19), (16, 20),
    (0, 3), (3, 4),
    (1, 7), (1, 8), (7, 11), (7, 13), (8, 13), (13, 16),
    (2, 9), (2, 10), (9, 14), (10, 14), (10, 12), (14, 20),
)  # fmt: skip
REFERENCE_20_ENTRY = (0, 1, 2)
REFERENCE_20_TARGETS = (18, 19, 20)
REFERENCE_20_NODES = tuple(u for u in range(21) if u != 17)

FIG1_VALUES = {1: 0.0, 2: 25.0, 3: 40.0, 4: 10.0, 5: 100.0, 6: 15.0, 7: 80.0}
FIG1_EDGES = ((1, 2), (1, 3), (1, 4), (2, 5), (3, 5), (4, 5), (3, 6), (6, 7))

VALUE_RANGE = (10.0, 50.0)
TARGET_VALUE = 100.0


def gen_reference_20(seed: int = 0, target_value: float = TARGET_VALUE) -> AttackGraph:
    """The 20-node reference network; intermediate values are U[10, 50] under ``seed``."""
    rng = np.random.default_rng(seed)
    values = {}
    for u in REFERENCE_20_NODES:
        if u in REFERENCE_20_ENTRY:
            values[u] = 0.0
        elif u in REFERENCE_20_TARGETS:
            values[u] = float(target_value)
        else:
            values[u] = float(rng.uniform(*VALUE_RANGE))
    return build_graph(values, REFERENCE_20_EDGES, REFERENCE_20_ENTRY, REFERENCE_20_TARGETS)


def gen_fig1_tree() -> AttackGraph:
    """Seven-node example: entry 1, targets 5 and 7, four attack paths.

    Nodes 4 and 6 carry the lowest value-times-degree, so they are the most
    likely to leave; without them only two paths (both to 5) remain.
    """
    return build_graph(FIG1_VALUES, FIG1_EDGES, entry=[1], targets=[5, 7])


def watts_strogatz_undirected(n: int, k: int, p: float, seed: int) -> nx.Graph:
    if not (isinstance(n, int) and isinstance(k, int)) or not n > k >= 2:
        raise GraphError(f"need integers n > k >= 2, got n={n!r}, k={k!r}")
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"rewiring probability must lie in [0, 1], got {p!r}")
    return nx.watts_strogatz_graph(n, k, p, seed=seed)


def orient_from_entries(G: nx.Graph, entries) -> list[tuple[int, int]]:
    """Direct each edge from the lower to the higher BFS layer of ``entries``.

    Edges inside one layer, and edges of components the entries cannot
    reach, are dropped.
    """
    layer = nx.multi_source_dijkstra_path_length(G, list(entries))
    out = []
    for u, v in G.edges():
        lu, lv = layer.get(u), layer.get(v)
        if lu is None or lv is None or lu == lv:
            continue
        out.append((u, v) if lu < lv else (v, u))
    return sorted(out)


def gen_watts_strogatz(
    n: int,
    k: int,
    p: float,
    seed: int = 0,
    n_entry: int = 3,
    n_target: int = 3,
    target_value: float = TARGET_VALUE,
    max_tries: int = 20,
) -> AttackGraph:
    """A small-world attack graph.

    Entries are drawn with the seeded RNG; targets are the ``n_target``
    nodes deepest in the BFS layering from the entries. If no attack path
    exists the graph is regenerated with ``seed + 1``, ``seed + 2``, ... up
    to ``max_tries`` times.
    """
    if n_entry < 1 or n_target < 1 or n_entry + n_target >= n:
        raise GraphError("need n_entry, n_target >= 1 and n_entry + n_target < n")
    for attempt in range(max_tries):
        s = seed + attempt
        G = watts_strogatz_undirected(n, k, p, s)
        rng = np.random.default_rng(s)
        entries = sorted(int(u) for u in rng.choice(n, size=n_entry, replace=False))
        layer = nx.multi_source_dijkstra_path_length(G, entries)
        deep = sorted((u for u in layer if u not in entries), key=lambda u: (-layer[u], u))
        if len(deep) < n_target:
            continue
        targets = deep[:n_target]
        values = {}
        for u in sorted(G.nodes()):
            if u in entries:
                values[u] = 0.0
            elif u in targets:
                values[u] = float(target_value)
            else:
                values[u] = float(rng.uniform(*VALUE_RANGE))
        g = build_graph(values, orient_from_entries(G, entries), entries, targets)
        if enumerate_attack_paths(g):
            return g
    raise GraphError(f"no Watts-Strogatz graph with an attack path after {max_tries} tries")
