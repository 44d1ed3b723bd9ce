# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled simplex pivot loop. Mirrors ``_simplex_py.pivot_loop`` pivot for pivot."""

from libc.math cimport fabs

cdef enum:
    OPTIMAL = 0
    UNBOUNDED = 1
    ITERATION_LIMIT = 2


cdef int _loop(double[:, ::1] T, long long[::1] basis, double eps, int max_iter, int* iters) noexcept nogil:
    cdef Py_ssize_t r = T.shape[0] - 1
    cdef Py_ssize_t ncol = T.shape[1] - 1
    cdef Py_ssize_t i, j, k, c
    cdef Py_ssize_t width = T.shape[1]
    cdef int it
    cdef bint bland = False
    cdef int degenerate_run = 0
    cdef double best, ratio, piv, f, minval, lim
    cdef long long bi

    for it in range(max_iter):
        j = -1
        if bland:
            for c in range(ncol):
                if T[r, c] < -eps:
                    j = c
                    break
        else:
            minval = T[r, 0]
            j = 0
            for c in range(1, ncol):
                if T[r, c] < minval:
                    minval = T[r, c]
                    j = c
            if minval >= -eps:
                j = -1
        if j < 0:
            iters[0] = it
            return OPTIMAL

        # minimum ratio
        i = -1
        best = 0.0
        for k in range(r):
            if T[k, j] > eps:
                ratio = T[k, ncol] / T[k, j]
                if i < 0 or ratio < best:
                    best = ratio
                    i = k
        if i < 0:
            iters[0] = it
            return UNBOUNDED
        lim = best + eps * (1.0 + fabs(best))
        i = -1
        bi = 0
        for k in range(r):
            if T[k, j] > eps:
                ratio = T[k, ncol] / T[k, j]
                if ratio <= lim and (i < 0 or basis[k] < bi):
                    i = k
                    bi = basis[k]

        if T[i, ncol] <= eps:
            degenerate_run += 1
            if degenerate_run > r:
                bland = True
        else:
            degenerate_run = 0

        piv = T[i, j]
        for c in range(width):
            T[i, c] = T[i, c] / piv
        T[i, j] = 1.0
        for k in range(r + 1):
            if k == i:
                continue
            f = T[k, j]
            if f != 0.0:
                for c in range(width):
                    T[k, c] = T[k, c] - f * T[i, c]
            T[k, j] = 0.0
        basis[i] = j
    iters[0] = max_iter
    return ITERATION_LIMIT


def pivot_loop(double[:, ::1] T, long long[::1] basis, double eps, int max_iter):
    cdef int iters = 0
    cdef int status
    with nogil:
        status = _loop(T, basis, eps, max_iter, &iters)
    return status, iters
