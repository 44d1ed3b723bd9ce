"""Pure-Python simplex pivot loop (fallback for the compiled kernel).

The tableau layout is shared with ``_simplex_ext.pyx``: rows ``0..r-1`` are
constraints, row ``r`` holds reduced costs (an entry < -eps may enter) and the
last column is the right-hand side. Both implementations make identical
pivot choices:

* entering column: most negative reduced cost, lowest index on ties; after
  ``r + 1`` consecutive degenerate pivots the rule switches to Bland's
  (lowest improving index) for the rest of the solve;
* leaving row: minimum ratio, ties broken by the lowest basic variable.
"""

from __future__ import annotations

import numpy as np

OPTIMAL = 0
UNBOUNDED = 1
ITERATION_LIMIT = 2


def pivot_loop(T: np.ndarray, basis: np.ndarray, eps: float, max_iter: int) -> tuple[int, int]:
    r = T.shape[0] - 1
    ncol = T.shape[1] - 1
    obj = T[r]
    bland = False
    degenerate_run = 0
    for it in range(max_iter):
        if bland:
            cand = np.flatnonzero(obj[:ncol] < -eps)
            if cand.size == 0:
                return OPTIMAL, it
            j = int(cand[0])
        else:
            j = int(np.argmin(obj[:ncol]))
            if obj[j] >= -eps:
                return OPTIMAL, it
        col = T[:r, j]
        pos = np.flatnonzero(col > eps)
        if pos.size == 0:
            return UNBOUNDED, it
        ratios = T[pos, ncol] / col[pos]
        best = ratios.min()
        ties = pos[ratios <= best + eps * (1.0 + abs(best))]
        i = int(ties[np.argmin(basis[ties])])

        if T[i, ncol] <= eps:
            degenerate_run += 1
            if degenerate_run > r:
                bland = True
        else:
            degenerate_run = 0

        T[i] /= T[i, j]
        T[i, j] = 1.0
        f = T[:, j].copy()
        f[i] = 0.0
        T -= np.outer(f, T[i])
        T[:, j] = 0.0
        T[i, j] = 1.0
        basis[i] = j
    return ITERATION_LIMIT, max_iter
