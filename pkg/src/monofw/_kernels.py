"""Hot inner loops, compiled with numba when available.

Set ``MONOFW_NUMBA=0`` before import to force the pure-numpy path. Both paths
are always importable as ``*_numba`` / ``*_numpy`` so they can be benchmarked
and cross-checked against each other.
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("MONOFW_NUMBA", "1").strip().lower()
_want_numba = _flag not in ("0", "false", "no", "off")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _want_numba


def _hungarian_loops(C):
    # Shortest augmenting path with row/column potentials, O(n^3).
    # 1-based arrays; p[j] is the row matched to column j, way[] the path.
    n = C.shape[0]
    inf = np.inf
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    minv = np.empty(n + 1)
    used = np.empty(n + 1, dtype=np.bool_)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv[:] = inf
        used[:] = False
        while True:
            used[j0] = True
            i0 = p[j0]
            delta = inf
            j1 = -1
            for j in range(1, n + 1):
                if not used[j]:
                    cur = C[i0 - 1, j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    sigma = np.empty(n, dtype=np.int64)
    for j in range(1, n + 1):
        sigma[p[j] - 1] = j - 1
    return sigma


def hungarian_numpy(C):
    """Same algorithm as the compiled kernel with the column scan vectorized."""
    C = np.ascontiguousarray(C, dtype=float)
    n = C.shape[0]
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)
    way = np.zeros(n + 1, dtype=np.int64)
    cols = np.arange(1, n + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = cols[~used[1:]]
            cur = C[i0 - 1, free - 1] - u[i0] - v[free]
            better = cur < minv[free]
            minv[free[better]] = cur[better]
            way[free[better]] = j0
            # argmin picks the first minimum, matching the loop's strict '<'
            k = int(np.argmin(minv[free]))
            j1 = int(free[k])
            delta = minv[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while True:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
            if j0 == 0:
                break
    sigma = np.empty(n, dtype=np.int64)
    sigma[p[1:] - 1] = cols - 1
    return sigma


def _perm_scores_loops(G, sigmas):
    k, n = sigmas.shape
    out = np.zeros(k)
    for a in range(k):
        s = 0.0
        for i in range(n):
            s += G[i, sigmas[a, i]]
        out[a] = s
    return out


def perm_scores_numpy(G, sigmas):
    """``out[a] = sum_i G[i, sigmas[a, i]]``: inner products with permutation matrices."""
    if sigmas.shape[0] == 0:
        return np.zeros(0)
    rows = np.arange(G.shape[0])
    return G[rows[None, :], sigmas].sum(axis=1)


if HAVE_NUMBA:
    _hungarian_jit = numba.njit(cache=True)(_hungarian_loops)
    _perm_scores_jit = numba.njit(cache=True)(_perm_scores_loops)

    def hungarian_numba(C):
        return _hungarian_jit(np.ascontiguousarray(C, dtype=np.float64))

    def perm_scores_numba(G, sigmas):
        return _perm_scores_jit(
            np.ascontiguousarray(G, dtype=np.float64),
            np.ascontiguousarray(sigmas, dtype=np.int64),
        )
else:  # pragma: no cover
    hungarian_numba = hungarian_numpy
    perm_scores_numba = perm_scores_numpy


if USE_NUMBA:
    hungarian = hungarian_numba
    perm_scores = perm_scores_numba
else:
    hungarian = hungarian_numpy
    perm_scores = perm_scores_numpy
