"""Exact mixed-strategy equilibria of finite two-player zero-sum matrix games.

The row player maximises. The game is solved as the column player's LP

    max sum(w)  s.t.  P w <= 1,  w >= 0

on a positively shifted and rescaled copy ``P`` of the payoff matrix; the
optimal ``w`` gives the column strategy and the simplex multipliers of the
constraints give the row strategy. The orientation is chosen so the tableau
has as few constraint rows as possible (``min(m, n)``).

The pivot loop runs in the compiled extension when it is importable and in
numpy otherwise. Set ``HONEYALLOC_BACKEND=python`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import _simplex_py

try:
    from . import _simplex_ext
except ImportError:  # pragma: no cover - depends on the build
    _simplex_ext = None

_KERNELS = {"python": _simplex_py.pivot_loop}
if _simplex_ext is not None:
    _KERNELS["compiled"] = _simplex_ext.pivot_loop

PIVOT_EPS = 1e-12


class SolverError(ArithmeticError):
    """The LP did not reach a certified equilibrium (degenerate or ill-conditioned input)."""


def available_backends() -> tuple[str, ...]:
    return tuple(_KERNELS)


def _default_backend() -> str:
    want = os.environ.get("HONEYALLOC_BACKEND", "").strip().lower()
    if want:
        if want not in _KERNELS:
            raise ImportError(f"HONEYALLOC_BACKEND={want!r} is not available; have {sorted(_KERNELS)}")
        return want
    return "compiled" if "compiled" in _KERNELS else "python"


_backend = _default_backend()


def get_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in _KERNELS:
        raise ValueError(f"unknown backend {name!r}; have {sorted(_KERNELS)}")
    _backend = name


@dataclass(frozen=True)
class GameSolution:
    x: np.ndarray  # row (maximiser) strategy
    y: np.ndarray  # column (minimiser) strategy
    value: float
    pivots: int = 0


def _solve_positive(P: np.ndarray, kernel) -> tuple[np.ndarray, np.ndarray, float, int]:
    """Solve a game whose entries all lie in [1, 2]; returns (x, y, value, pivots)."""
    r, c = P.shape
    T = np.zeros((r + 1, c + r + 1))
    T[:r, :c] = P
    T[:r, c : c + r] = np.eye(r)
    T[:r, -1] = 1.0
    T[r, :c] = -1.0
    basis = np.arange(c, c + r, dtype=np.int64)
    status, pivots = kernel(T, basis, PIVOT_EPS, 50 * (r + c) + 100)
    if status != _simplex_py.OPTIMAL:
        raise SolverError(f"simplex stopped with status {status} after {pivots} pivots")
    total = T[r, -1]
    if not total > 0:
        raise SolverError("degenerate LP optimum")
    w = np.zeros(c + r)
    w[basis] = T[:r, -1]
    y = np.clip(w[:c], 0.0, None)
    x = np.clip(T[r, c : c + r], 0.0, None)
    return x / x.sum(), y / y.sum(), 1.0 / total, pivots


def solve_matrix_game(M, tol: float = 1e-9, backend: str | None = None) -> GameSolution:
    """Return maximin ``x``, minimax ``y`` and the value of payoff matrix ``M``.

    ``M`` may be an array or anything with a ``values`` array attribute.
    Raises :class:`SolverError` when the result fails the equilibrium
    certificate at absolute tolerance ``tol``.
    """
    A = np.asarray(getattr(M, "values", M), dtype=float)
    if A.ndim != 2 or A.size == 0:
        raise ValueError(f"payoff matrix must be a non-empty 2-D array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise SolverError("payoff matrix has non-finite entries")
    m, n = A.shape
    lo = float(A.min())
    hi = float(A.max())
    scale = hi - lo
    if scale <= 1e-300 * max(1.0, abs(hi)):
        x = np.zeros(m)
        y = np.zeros(n)
        x[0] = y[0] = 1.0
        return GameSolution(x, y, lo, 0)

    kernel = _KERNELS[backend or _backend]
    if m <= n:
        P = (A - lo) / scale + 1.0
        x, y, v, pivots = _solve_positive(P, kernel)
        value = (v - 1.0) * scale + lo
    else:
        P = (hi - A.T) / scale + 1.0
        ya, xd, v, pivots = _solve_positive(P, kernel)
        x, y = xd, ya
        value = hi - (v - 1.0) * scale

    guaranteed = float((x @ A).min())
    conceded = float((A @ y).max())
    if guaranteed < value - tol or conceded > value + tol:
        raise SolverError(
            f"equilibrium certificate failed: x guarantees {guaranteed!r}, "
            f"y concedes {conceded!r}, value {value!r}"
        )
    return GameSolution(x, y, value, pivots)
