import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from honeyalloc import matrixgame
from honeyalloc.matrixgame import SolverError, available_backends, solve_matrix_game
from oracles import support_enumeration_value

BACKENDS = available_backends()


def certificate_gap(M, sol):
    return max(sol.value - (sol.x @ M).min(), (M @ sol.y).max() - sol.value)


@pytest.mark.parametrize("backend", BACKENDS)
def test_matching_pennies(backend):
    sol = solve_matrix_game(np.array([[1.0, -1.0], [-1.0, 1.0]]), backend=backend)
    assert sol.value == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(sol.x, [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(sol.y, [0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_dominance(backend):
    sol = solve_matrix_game(np.array([[3.0, 2.0], [1.0, 0.0]]), backend=backend)
    assert sol.value == pytest.approx(2.0, abs=1e-12)
    np.testing.assert_allclose(sol.x, [1, 0], atol=1e-12)
    np.testing.assert_allclose(sol.y, [0, 1], atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_diagonal_game(backend):
    M = np.array([[2.0, 0.0], [0.0, 1.0]])
    sol = solve_matrix_game(M, backend=backend)
    assert support_enumeration_value(M) == pytest.approx(2 / 3)
    assert sol.value == pytest.approx(2 / 3, abs=1e-12)
    np.testing.assert_allclose(sol.x, [1 / 3, 2 / 3], atol=1e-12)
    np.testing.assert_allclose(sol.y, [1 / 3, 2 / 3], atol=1e-12)


def test_constant_and_single_entry():
    sol = solve_matrix_game(np.full((3, 2), 4.0))
    assert sol.value == 4.0 and sol.x.sum() == 1 and sol.y.sum() == 1
    assert solve_matrix_game([[7.5]]).value == 7.5


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_matrix_game(np.zeros((0, 3)))
    with pytest.raises(SolverError):
        solve_matrix_game(np.array([[1.0, np.nan]]))


def test_accepts_payoff_matrix_objects():
    class Wrapped:
        values = np.array([[1.0, -1.0], [-1.0, 1.0]])

    assert solve_matrix_game(Wrapped()).value == pytest.approx(0.0, abs=1e-12)


def test_tall_and_wide_orientations_agree():
    rng = np.random.default_rng(3)
    for _ in range(50):
        M = rng.uniform(-5, 5, (rng.integers(1, 9), rng.integers(1, 9)))
        a = solve_matrix_game(M)
        b = solve_matrix_game(-M.T)
        assert a.value == pytest.approx(-b.value, abs=1e-9)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
def test_backends_bit_identical():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        m, n = rng.integers(1, 12, size=2)
        M = rng.uniform(-10, 10, (m, n))
        if rng.random() < 0.3:
            M = np.round(M)  # ties and degenerate pivots
        a = solve_matrix_game(M, backend="python")
        b = solve_matrix_game(M, backend="compiled")
        assert a.value == b.value and a.pivots == b.pivots
        assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)


def test_backend_selection():
    before = matrixgame.get_backend()
    try:
        matrixgame.set_backend("python")
        assert matrixgame.get_backend() == "python"
        with pytest.raises(ValueError):
            matrixgame.set_backend("fortran")
    finally:
        matrixgame.set_backend(before)


def test_repeat_runs_identical():
    M = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])  # duplicate rows: many optima
    a, b = solve_matrix_game(M), solve_matrix_game(M)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)


matrices = st.tuples(st.integers(1, 6), st.integers(1, 6)).flatmap(
    lambda s: arrays(np.float64, s, elements=st.floats(-10, 10, allow_nan=False).map(lambda v: round(v, 3)))
)


@settings(max_examples=300, deadline=None)
@given(matrices)
def test_certificate_and_sandwich(M):
    sol = solve_matrix_game(M)
    assert certificate_gap(M, sol) <= 1e-9
    assert abs(sol.x.sum() - 1) <= 1e-9 and abs(sol.y.sum() - 1) <= 1e-9
    assert sol.x.min() >= 0 and sol.y.min() >= 0
    assert M.min(axis=1).max() - 1e-9 <= sol.value <= M.max(axis=0).min() + 1e-9


@settings(max_examples=200, deadline=None)
@given(matrices, st.floats(0.01, 100), st.floats(-100, 100))
def test_scale_equivariance(M, alpha, beta):
    sol = solve_matrix_game(M)
    T = alpha * M + beta
    moved = solve_matrix_game(T)
    tol = 1e-9 * max(1.0, abs(alpha) * 10 + abs(beta))
    assert moved.value == pytest.approx(alpha * sol.value + beta, abs=tol)
    # the original optimal pair is still certified on the transformed game
    v = alpha * sol.value + beta
    assert (sol.x @ T).min() >= v - tol and (T @ sol.y).max() <= v + tol
