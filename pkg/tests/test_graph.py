import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from honeyalloc.generators import FIG1_EDGES, gen_fig1_tree, gen_reference_20
from honeyalloc.graph import (
    AttackPath,
    GraphError,
    Node,
    NodeKind,
    NodeType,
    build_graph,
    enumerate_attack_paths,
    is_attack_path,
    remove_node,
    remove_nodes,
)
from oracles import simple_paths


def seqs(paths):
    return [p.nodes for p in paths]


def test_fig1_valid_and_counts():
    g = gen_fig1_tree()
    assert len(g) == 7
    assert g.entry == {1} and g.targets == {5, 7}
    paths = seqs(enumerate_attack_paths(g))
    assert len(paths) == 4
    assert sum(p[-1] == 5 for p in paths) == 3
    assert sum(p[-1] == 7 for p in paths) == 1


def test_fig1_after_removal():
    g = remove_nodes(gen_fig1_tree(), [4, 6])
    assert len(g) == 5
    paths = seqs(enumerate_attack_paths(g))
    assert paths == [(1, 2, 5), (1, 3, 5)]
    assert all(p[-1] != 7 for p in paths)


def test_reference_paths_from_entry_0():
    g = gen_reference_20(0)
    assert seqs(enumerate_attack_paths(g, [0])) == [
        (0, 5, 11, 15, 18),
        (0, 5, 11, 15, 19),
        (0, 6, 12, 16, 19),
        (0, 6, 12, 16, 20),
    ]


def test_removing_11_drops_first_two_paths():
    g = gen_reference_20(0)
    after = seqs(enumerate_attack_paths(remove_node(g, 11), [0]))
    assert after == [(0, 6, 12, 16, 19), (0, 6, 12, 16, 20)]


@pytest.mark.parametrize(
    "kwargs, match",
    [
        (dict(nodes={1: 0, 2: 5}, edges=[(1, 2)], entry=[1], targets=[1]), "overlap"),
        (dict(nodes={1: 0, 2: 5}, edges=[(1, 9)], entry=[1], targets=[2]), "dangling"),
        (dict(nodes={1: 0, 2: 5}, edges=[(1, 1)], entry=[1], targets=[2]), "self-loop"),
        (dict(nodes={1: 0, 2: 5}, edges=[(1, 2), (1, 2)], entry=[1], targets=[2]), "duplicate edge"),
        (dict(nodes={1: 3, 2: 5}, edges=[(1, 2)], entry=[1], targets=[2]), "value 0"),
        (dict(nodes={1: 0, 2: -5}, edges=[(1, 2)], entry=[1], targets=[2]), "non-negative"),
        (dict(nodes={1: 0, 2: 5}, edges=[(1, 2)], entry=[], targets=[2]), "entry set is empty"),
        (dict(nodes={1: 0, 2: 5}, edges=[(1, 2)], entry=[1], targets=[3]), "not in the node set"),
    ],
)
def test_validation_errors(kwargs, match):
    with pytest.raises(GraphError, match=match):
        build_graph(**kwargs)


def test_and_nodes_rejected():
    nodes = [Node(1, 0.0, NodeKind.ENTRY), Node(2, 5.0, NodeKind.TARGET, NodeType.AND)]
    with pytest.raises(GraphError, match="unsupported"):
        build_graph(nodes, [(1, 2)], [1], [2])


def test_unreachable_target_gives_no_paths():
    g = build_graph({1: 0, 2: 5, 3: 9}, [(1, 2)], [1], [3])
    assert enumerate_attack_paths(g) == []


def test_total_degree():
    g = gen_fig1_tree()
    assert g.degree(3) == 3  # 1->3, 3->5, 3->6
    assert g.degree(5) == 3
    assert g.max_degree == 3
    assert g.max_value == 100


def test_remove_isolated_node_keeps_edges():
    g = build_graph({1: 0, 2: 5, 3: 7}, [(1, 2)], [1], [2])
    h = remove_node(g, 3)
    assert h.edges == g.edges and len(h) == 2


def test_entry_and_target_not_removable():
    g = gen_fig1_tree()
    for u in (1, 5, 7):
        with pytest.raises(GraphError):
            remove_node(g, u)
    with pytest.raises(GraphError):
        remove_node(g, 42)


def test_is_attack_path():
    g = gen_fig1_tree()
    assert is_attack_path(g, (1, 3, 6, 7))
    assert not is_attack_path(g, (1, 3, 7))
    assert not is_attack_path(g, (2, 5))
    assert not is_attack_path(g, (1,))


def test_path_stops_at_first_target():
    g = build_graph({0: 0, 1: 10, 2: 20}, [(0, 1), (1, 2)], [0], [1, 2])
    assert seqs(enumerate_attack_paths(g)) == [(0, 1)]


def test_attack_path_helpers():
    p = AttackPath((0, 5, 11))
    assert p.entry == 0 and p.target == 11 and len(p) == 3 and 5 in p
    assert p.edges == ((0, 5), (5, 11))


@st.composite
def random_graphs(draw):
    n = draw(st.integers(4, 9))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=3 * n))
    values = {u: (0.0 if u == 0 else float(draw(st.integers(1, 50)))) for u in range(n)}
    return build_graph(values, edges, [0], [n - 1, n - 2])


@settings(max_examples=150, deadline=None)
@given(random_graphs())
def test_enumeration_matches_recursive_oracle(g):
    paths = enumerate_attack_paths(g)
    assert seqs(paths) == simple_paths(g.edges, g.entry, g.targets)
    assert all(is_attack_path(g, p.nodes) for p in paths)
    assert seqs(enumerate_attack_paths(g)) == seqs(paths)


@settings(max_examples=150, deadline=None)
@given(random_graphs(), st.data())
def test_removal_only_deletes_paths(g, data):
    if not g.intermediates:
        return
    u = data.draw(st.sampled_from(g.intermediates))
    h = remove_node(g, u)
    assert h.entry == g.entry and h.targets == g.targets and len(h) == len(g) - 1
    assert seqs(enumerate_attack_paths(h)) == [p.nodes for p in enumerate_attack_paths(g) if u not in p]


def test_fig1_edges_literal():
    assert gen_fig1_tree().edges == tuple(sorted(FIG1_EDGES))
