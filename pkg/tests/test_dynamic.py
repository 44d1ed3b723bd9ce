import time

import numpy as np
import pytest

from honeyalloc.dynamic import (
    ConvergenceError,
    SolveTimeout,
    backward_induction,
    expand_state_space,
    predictive_solve,
    q_value,
    removal_weight,
    transition_distribution,
    value_iteration,
)
from honeyalloc.generators import gen_fig1_tree, gen_reference_20
from honeyalloc.graph import build_graph
from honeyalloc.matrixgame import solve_matrix_game
from honeyalloc.stage import GameParams, build_payoff_matrix


def weight_graph():
    # node 1: value 25, degree 2; node 2 has the max degree 4; max value 50
    values = {0: 0, 1: 25, 2: 10, 3: 10, 5: 10, 9: 50}
    edges = [(0, 1), (1, 9), (0, 2), (3, 2), (2, 9), (2, 5), (0, 3), (5, 9)]
    return build_graph(values, edges, [0], [9])


def test_removal_weight_examples():
    g = weight_graph()
    assert g.max_degree == 4 and g.max_value == 50
    assert removal_weight(g, 1) == pytest.approx(0.75)
    top = build_graph({0: 0, 1: 100, 2: 10, 3: 100}, [(0, 1), (1, 3), (0, 2), (2, 1)], [0], [3])
    assert top.degree(1) == top.max_degree
    assert removal_weight(top, 1) == 0.0
    assert removal_weight(top, 2) > removal_weight(top, 1)


def two_branch(v_a, v_b):
    return build_graph({0: 0, 1: v_a, 2: v_b, 3: 100}, [(0, 1), (1, 3), (0, 2), (2, 3)], [0], [3])


def test_transition_examples():
    g = build_graph({0: 0, 1: 10, 2: 100}, [(0, 1), (1, 2)], [0], [2])
    space = expand_state_space(g, GameParams(mu=0.2, depth=1))
    assert transition_distribution(space.states[0], GameParams(mu=0.2)) == [((), 0.2), ((1,), 0.8)]

    space = expand_state_space(two_branch(25, 75), GameParams(mu=0.0, depth=1))
    dist = transition_distribution(space.states[0], GameParams(mu=0.0))
    assert dist[0] == ((), 0.0)
    assert dist[1][1] == pytest.approx(0.75) and dist[2][1] == pytest.approx(0.25)

    space = expand_state_space(two_branch(30, 30), GameParams(mu=0.4, depth=1))
    dist = transition_distribution(space.states[0], GameParams(mu=0.4))
    assert [p for _, p in dist[1:]] == pytest.approx([0.3, 0.3])


def test_depth_zero_is_single_terminal_state():
    space = expand_state_space(gen_reference_20(0), GameParams(depth=0))
    assert len(space) == 1 and space.states[0].terminal
    res = predictive_solve(gen_reference_20(0), GameParams(depth=0))
    assert res.root_value == solve_matrix_game(build_payoff_matrix(gen_reference_20(0), GameParams())).value


def test_fig1_full_depth_one():
    space = expand_state_space(gen_fig1_tree(), GameParams(depth=1), "full")
    assert len(space) == 5
    assert sorted(s.removed for s in space.states[1:]) == [(2,), (3,), (4,), (6,)]
    assert all(s.terminal for s in space.states[1:])


def test_reference_compact_depth_one():
    space = expand_state_space(gen_reference_20(0), GameParams(depth=1), "compact", [0])
    assert set(space.states[0].removable) == {5, 6, 11, 12, 15, 16}
    assert len(space) == 7


def test_dedup_and_structure():
    params = GameParams(depth=2)
    space = expand_state_space(gen_reference_20(0), params, "full")
    keys = [s.removed for s in space.states]
    assert len(keys) == len(set(keys))
    assert all(list(k) == sorted(k) for k in keys)
    assert sum(set(k) == {5, 6} for k in keys) == 1
    for s in space.states:
        has_removable = bool(s.removable)
        assert s.terminal == (s.depth == params.depth or not s.paths or not has_removable)
        if s.terminal:
            assert space.successors[s.id] == []
            continue
        row = space.successors[s.id]
        assert row[0] == (s.id, params.mu)
        assert sum(p for _, p in row) == pytest.approx(1.0, abs=1e-12)
        for t, _ in row[1:]:
            assert space.states[t].depth == s.depth + 1


def test_compact_only_moves_path_nodes():
    space = expand_state_space(gen_reference_20(0), GameParams(), "compact")
    for s in space.states:
        on_path = {u for p in s.paths for u in p.nodes}
        assert set(s.removable) <= on_path


def test_bad_mode_and_entries():
    with pytest.raises(ValueError):
        expand_state_space(gen_fig1_tree(), GameParams(), "partial")
    with pytest.raises(ValueError):
        expand_state_space(gen_fig1_tree(), GameParams(), "full", [5])


def q_graph():
    # path 0-2 never crosses the mobile node 1, so its step payoff is exact
    return build_graph({0: 0, 1: 10, 2: 100}, [(0, 1), (1, 2), (0, 2)], [0], [2])


def test_q_value_single_successor():
    params = GameParams(mu=0.0, gamma=0.9, depth=1, esc=0.0, ca=5.0)
    space = expand_state_space(q_graph(), params)
    data = space.stage_data(0, params)
    a = [p.nodes for p in data.paths].index((0, 2))
    V = np.zeros(len(space))
    V[space.successors[0][1][0]] = 10.0
    assert q_value(space, 0, 0, a, V, params) == pytest.approx(14.0)


def test_q_value_two_successors():
    params = GameParams(mu=0.2, gamma=0.5, depth=1, esc=0.0, ca=1.0)
    space = expand_state_space(q_graph(), params)
    a = [p.nodes for p in space.stage_data(0, params).paths].index((0, 2))
    V = np.zeros(len(space))
    V[space.successors[0][1][0]] = 10.0
    assert q_value(space, 0, 0, a, V, params) == pytest.approx(5.0)


def test_q_value_terminal_is_stage_payoff():
    params = GameParams(depth=0)
    space = expand_state_space(gen_fig1_tree(), params)
    data = space.stage_data(0, params)
    assert q_value(space, 0, 1, 2, np.full(1, 99.0), params) == data.stage[1, 2]


def test_single_terminal_value_iteration():
    params = GameParams(depth=0)
    res = value_iteration(expand_state_space(gen_fig1_tree(), params), params)
    assert len(res.trace) == 1
    assert res.root_value == solve_matrix_game(build_payoff_matrix(gen_fig1_tree(), params)).value


def test_pathless_states_have_zero_value():
    g = build_graph({0: 0, 1: 10, 2: 100}, [(0, 1), (1, 2)], [0], [2])
    params = GameParams(depth=2)
    res = backward_induction(expand_state_space(g, params), params)
    child = res.space.index[(1,)]
    assert res.space.states[child].terminal and not res.space.states[child].paths
    assert res.values[child] == 0.0
    assert res.defender_policy[child].tolist() == [1.0]


@pytest.mark.parametrize("mode", ["full", "compact"])
def test_methods_agree_on_fig1(mode):
    params = GameParams(depth=2)
    space = expand_state_space(gen_fig1_tree(), params, mode)
    vi = value_iteration(space, params)
    bi = backward_induction(space, params)
    np.testing.assert_allclose(vi.values, bi.values, atol=1e-6)


def test_no_self_loop_backward_pass():
    params = GameParams(mu=0.0, depth=2)
    space = expand_state_space(gen_reference_20(1), params, "compact")
    bi = backward_induction(space, params)
    for s in space.states:
        if s.terminal or not s.paths:
            continue
        data = space.stage_data(s.id, params)
        cont = sum(p * bi.values[t] for t, p in space.successors[s.id])
        want = solve_matrix_game(data.expected).value + params.gamma * cont
        assert bi.values[s.id] == pytest.approx(want, abs=1e-9)


def test_threads_bit_identical():
    params = GameParams()
    space = expand_state_space(gen_reference_20(2), params, "full")
    a = value_iteration(space, params, threads=1)
    b = value_iteration(space, params, threads=4)
    assert np.array_equal(a.values, b.values) and a.trace.deltas == b.trace.deltas
    c = backward_induction(space, params, threads=4)
    assert np.array_equal(c.values, backward_induction(space, params).values)


def test_contraction_envelope():
    params = GameParams()
    res = value_iteration(expand_state_space(gen_reference_20(0), params, "compact"), params)
    d = res.trace.deltas
    assert all(d[k + 1] <= params.gamma * d[k] for k in range(len(d) - 1))


def test_sweep_cap_raises_with_partial_result():
    params = GameParams(max_sweeps=2)
    with pytest.raises(ConvergenceError) as info:
        value_iteration(expand_state_space(gen_reference_20(0), params), params)
    assert len(info.value.result.trace) == 2
    assert not info.value.result.converged


def test_deadline():
    params = GameParams()
    space = expand_state_space(gen_reference_20(0), params)
    with pytest.raises(SolveTimeout):
        backward_induction(space, params, deadline=time.perf_counter() - 1)


def test_tiny_discount_gives_expected_step_game():
    params = GameParams(gamma=1e-12)
    res = predictive_solve(gen_reference_20(0), params, "full")
    data = res.space.stage_data(res.space.root, params)
    assert res.root_value == pytest.approx(solve_matrix_game(data.expected).value, abs=1e-6)


def test_removal_probs_match_successors():
    params = GameParams()
    space = expand_state_space(gen_reference_20(0), params, "full")
    probs = space.removal_probs(space.root)
    assert sum(probs.values()) == pytest.approx(1 - params.mu)
    assert set(probs) == set(space.states[space.root].removable)


def test_modes_coincide_without_off_path_nodes():
    # three parallel branches: every intermediate stays on a path after any removal
    g = build_graph({0: 0, 1: 20, 2: 35, 3: 15, 4: 100}, [(0, 1), (1, 4), (0, 2), (2, 4), (0, 3), (3, 4)], [0], [4])
    params = GameParams()
    full = predictive_solve(g, params, "full")
    compact = predictive_solve(g, params, "compact")
    assert len(full.space) == len(compact.space)
    assert np.array_equal(full.values, compact.values)
