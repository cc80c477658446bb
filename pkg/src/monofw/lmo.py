"""Linear minimization oracles, sparse vertices and the away-step active set."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels

WEIGHT_EPS = 1e-12


# --------------------------------------------------------------------------
# vertices


@dataclass(frozen=True)
class BasisVector:
    """``scale * e_index`` in R^dim."""

    index: int
    scale: float
    dim: int

    def dense(self):
        x = np.zeros(self.dim)
        x[self.index] = self.scale
        return x

    def dot(self, g):
        return self.scale * float(g[self.index])

    def support(self):
        return np.array([self.index]), np.array([self.scale])


@dataclass(frozen=True)
class ZeroPoint:
    dim: int

    def dense(self):
        return np.zeros(self.dim)

    def dot(self, g):
        return 0.0

    def support(self):
        return np.zeros(0, dtype=np.int64), np.zeros(0)


@dataclass(frozen=True)
class Permutation:
    """Permutation matrix ``P[i, sigma[i]] = 1``, flattened row-major."""

    sigma: tuple

    def __post_init__(self):
        s = tuple(int(i) for i in self.sigma)
        if sorted(s) != list(range(len(s))):
            raise ValueError("sigma is not a permutation of 0..n-1")
        object.__setattr__(self, "sigma", s)

    @property
    def n(self):
        return len(self.sigma)

    @property
    def dim(self):
        return self.n * self.n

    def dense(self):
        n = self.n
        x = np.zeros(n * n)
        x[np.arange(n) * n + np.asarray(self.sigma)] = 1.0
        return x

    def dot(self, g):
        n = self.n
        return float(np.sum(np.asarray(g)[np.arange(n) * n + np.asarray(self.sigma)]))

    def support(self):
        n = self.n
        return np.arange(n) * n + np.asarray(self.sigma), np.ones(n)

    def cost(self, C):
        C = np.asarray(C)
        return float(C[np.arange(self.n), list(self.sigma)].sum())


Vertex = BasisVector | ZeroPoint | Permutation


def dense(v) -> np.ndarray:
    return v.dense()


# --------------------------------------------------------------------------
# oracles


def lmo_probability_simplex(d) -> BasisVector:
    d = np.asarray(d, dtype=float)
    # np.argmin returns the first minimizer -> lowest index on ties
    return BasisVector(int(np.argmin(d)), 1.0, d.size)


def lmo_unit_simplex(d, R) -> BasisVector | ZeroPoint:
    d = np.asarray(d, dtype=float)
    i = int(np.argmin(d))
    if d[i] < 0:
        return BasisVector(i, float(R), d.size)
    return ZeroPoint(d.size)


def lmo_l1_ball(d, rho) -> BasisVector:
    d = np.asarray(d, dtype=float)
    i = int(np.argmax(np.abs(d)))
    sign = 1.0 if d[i] >= 0 else -1.0
    return BasisVector(i, -float(rho) * sign, d.size)


def lmo_birkhoff(C) -> Permutation:
    C = np.asarray(C, dtype=float)
    if C.ndim == 1:
        n = math.isqrt(C.size)
        C = C.reshape(n, n)
    return Permutation(tuple(_kernels.hungarian(C)))


class FeasibleSet:
    """LMO bundled with the geometry the algorithms and tests need."""

    name = "set"

    def __call__(self, d):
        raise NotImplementedError

    def default_start(self):
        raise NotImplementedError

    def vertices_for(self, x):
        """Vertices (with weights) whose combination is the given start point, if known."""
        raise NotImplementedError

    def contains(self, x, tol=1e-9) -> bool:
        raise NotImplementedError

    def random_point(self, rng):
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        raise NotImplementedError


class ProbabilitySimplex(FeasibleSet):
    name = "simplex"

    def __init__(self, n):
        self.n = n
        self.dim = n

    def __call__(self, d):
        return lmo_probability_simplex(d)

    def default_start(self):
        return BasisVector(0, 1.0, self.n)

    def barycenter(self):
        return [(BasisVector(i, 1.0, self.n), 1.0 / self.n) for i in range(self.n)]

    def contains(self, x, tol=1e-9):
        return bool(np.min(x) >= -1e-12 and abs(np.sum(x) - 1.0) <= tol)

    def random_point(self, rng):
        return rng.dirichlet(np.ones(self.n))

    @property
    def diameter(self):
        return math.sqrt(2.0)


class UnitSimplex(FeasibleSet):
    """``{x >= 0, sum(x) <= R}``."""

    name = "unit_simplex"

    def __init__(self, n, R):
        self.n, self.R = n, float(R)
        self.dim = n

    def __call__(self, d):
        return lmo_unit_simplex(d, self.R)

    def default_start(self):
        return BasisVector(0, self.R, self.n)

    def barycenter(self):
        return [(BasisVector(i, self.R, self.n), 1.0 / self.n) for i in range(self.n)]

    def contains(self, x, tol=1e-9):
        return bool(np.min(x) >= -1e-12 and np.sum(x) <= self.R + tol)

    def random_point(self, rng):
        w = rng.dirichlet(np.ones(self.n + 1))
        return self.R * w[: self.n]

    @property
    def diameter(self):
        return self.R * math.sqrt(2.0)


class L1Ball(FeasibleSet):
    name = "l1_ball"

    def __init__(self, n, rho):
        self.n, self.rho = n, float(rho)
        self.dim = n

    def __call__(self, d):
        return lmo_l1_ball(d, self.rho)

    def default_start(self):
        return BasisVector(0, self.rho, self.n)

    def barycenter(self):
        """Uniform mix of the positive vertices: ``(rho/n) * 1``, inside the positive orthant."""
        return [(BasisVector(i, self.rho, self.n), 1.0 / self.n) for i in range(self.n)]

    def contains(self, x, tol=1e-9):
        return bool(np.sum(np.abs(x)) <= self.rho + tol)

    def random_point(self, rng):
        w = rng.dirichlet(np.ones(2 * self.n + 1))
        return self.rho * (w[: self.n] - w[self.n : 2 * self.n])

    @property
    def diameter(self):
        return 2.0 * self.rho


class Birkhoff(FeasibleSet):
    name = "birkhoff"

    def __init__(self, m):
        self.m = m
        self.dim = m * m

    def __call__(self, d):
        return lmo_birkhoff(np.asarray(d).reshape(self.m, self.m))

    def default_start(self):
        return Permutation(tuple(range(self.m)))

    def barycenter(self):
        # cyclic shifts average to the uniform matrix
        m = self.m
        return [(Permutation(tuple((i + k) % m for i in range(m))), 1.0 / m) for k in range(m)]

    def contains(self, x, tol=1e-9):
        X = np.asarray(x).reshape(self.m, self.m)
        return bool(
            np.min(X) >= -1e-12
            and np.max(np.abs(X.sum(axis=0) - 1)) <= tol
            and np.max(np.abs(X.sum(axis=1) - 1)) <= tol
        )

    def random_point(self, rng):
        k = self.m + 2
        w = rng.dirichlet(np.ones(k))
        X = np.zeros(self.dim)
        for wi in w:
            X += wi * Permutation(tuple(rng.permutation(self.m))).dense()
        return X

    @property
    def diameter(self):
        return math.sqrt(2.0 * self.m)


# --------------------------------------------------------------------------
# active set


class ActiveSet:
    """Vertices with positive convex weights and the iterate they represent.

    Supports are packed into ``(k, width)`` index/value arrays so scores and
    reconstruction are vectorized; vertex identity is structural equality.
    """

    def __init__(self, vertices, weights=None):
        vertices = list(vertices)
        if not vertices:
            raise ValueError("active set needs at least one vertex")
        if weights is None:
            weights = [1.0 / len(vertices)] * len(vertices)
        self.dim = vertices[0].dim
        self._perm = isinstance(vertices[0], Permutation)
        self.width = vertices[0].n if self._perm else 1
        self.vertices = []
        self._index = {}
        self._w = np.zeros(0)
        self._sidx = np.zeros((0, self.width), dtype=np.int64)
        self._sval = np.zeros((0, self.width))
        self._sigmas = np.zeros((0, self.width), dtype=np.int64)
        for v, w in zip(vertices, weights):
            self._append(v, float(w))
        total = self._w.sum()
        if not abs(total - 1.0) <= 1e-12:
            raise ValueError(f"weights sum to {total}, expected 1")
        self.x = self.reconstruct()

    @classmethod
    def from_vertex(cls, v):
        return cls([v], [1.0])

    # -- bookkeeping

    def _append(self, v, w):
        if v in self._index:
            self._w[self._index[v]] += w
            return
        idx, val = v.support()
        pi = np.zeros(self.width, dtype=np.int64)
        pv = np.zeros(self.width)
        pi[: idx.size] = idx
        pv[: val.size] = val
        self._index[v] = len(self.vertices)
        self.vertices.append(v)
        self._w = np.append(self._w, w)
        self._sidx = np.vstack([self._sidx, pi])
        self._sval = np.vstack([self._sval, pv])
        if self._perm:
            self._sigmas = np.vstack([self._sigmas, np.asarray(v.sigma, dtype=np.int64)])

    def _cleanup(self):
        keep = self._w > WEIGHT_EPS
        if keep.all():
            return
        self.vertices = [v for v, k in zip(self.vertices, keep) if k]
        self._w = self._w[keep]
        self._sidx = self._sidx[keep]
        self._sval = self._sval[keep]
        if self._perm:
            self._sigmas = self._sigmas[keep]
        self._index = {v: i for i, v in enumerate(self.vertices)}
        # removed mass is below WEIGHT_EPS; renormalize so the weights stay a convex combination
        self._w /= self._w.sum()

    # -- queries

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, v):
        return v in self._index

    @property
    def weights(self):
        return self._w.copy()

    @property
    def cached_iterate(self):
        return self.x

    def weight(self, v):
        return float(self._w[self._index[v]])

    def as_dict(self):
        return {v: float(w) for v, w in zip(self.vertices, self._w)}

    def scores(self, g):
        """``<g, dense(v)>`` for every active vertex, in insertion order."""
        g = np.asarray(g, dtype=float)
        if self._perm:
            return _kernels.perm_scores(g.reshape(self.width, self.width), self._sigmas)
        return np.sum(self._sval * g[self._sidx], axis=1)

    def reconstruct(self):
        x = np.zeros(self.dim)
        np.add.at(x, self._sidx.ravel(), (self._sval * self._w[:, None]).ravel())
        return x

    def check(self, tol=1e-9):
        if np.any(self._w <= 0):
            raise AssertionError("nonpositive weight in active set")
        if abs(self._w.sum() - 1.0) > 1e-12 * max(1, len(self)):
            raise AssertionError(f"weights sum to {self._w.sum()!r}")
        err = np.linalg.norm(self.reconstruct() - self.x)
        if err > tol * (1.0 + np.linalg.norm(self.x)):
            raise AssertionError(f"iterate drifted from its vertex representation by {err:.3e}")

    def resync(self):
        """Rebuild the cached iterate from the weights (removes accumulated round-off)."""
        self._w /= self._w.sum()
        self.x = self.reconstruct()

    # -- updates (in place; also return self for chaining)

    def update_fw(self, v, gamma):
        if not 0.0 <= gamma <= 1.0:
            raise ValueError(f"FW step {gamma} outside [0, 1]")
        if gamma == 0.0:
            return self
        if gamma == 1.0:
            self.__init__([v], [1.0])
            return self
        self._w *= 1.0 - gamma
        self._append(v, gamma)
        self.x = self.x + gamma * (v.dense() - self.x) if self._perm else _fw_move(self.x, v, gamma)
        self._cleanup()
        return self

    def gamma_max(self, a):
        lam = self.weight(a)
        if lam >= 1.0:
            return GAMMA_MAX_CAP
        return min(lam / (1.0 - lam), GAMMA_MAX_CAP)

    def update_away(self, a, gamma):
        """Move away from ``a``; returns True when ``a`` was dropped."""
        gmax = self.gamma_max(a)
        if gamma < 0 or gamma > gmax + 1e-12:
            raise ValueError(f"away step {gamma} outside [0, {gmax}]")
        if gamma == 0.0:
            return False
        i = self._index[a]
        drop = gamma >= gmax
        ad = a.dense() if self._perm else None
        self._w *= 1.0 + gamma
        self._w[i] -= gamma
        if drop:
            self._w[i] = 0.0
        if self._perm:
            self.x = self.x + gamma * (self.x - ad)
        else:
            x = (1.0 + gamma) * self.x
            idx, val = a.support()
            x[idx] -= gamma * val
            self.x = x
        self._cleanup()
        return drop


GAMMA_MAX_CAP = 1e12


def _fw_move(x, v, gamma):
    out = (1.0 - gamma) * x
    idx, val = v.support()
    out[idx] += gamma * val
    return out


def active_set_update_fw(S: ActiveSet, v, gamma) -> ActiveSet:
    return S.update_fw(v, gamma)


def active_set_update_away(S: ActiveSet, a, gamma) -> ActiveSet:
    S.update_away(a, gamma)
    return S


def away_vertex(S: ActiveSet, g):
    """Active vertex maximizing ``<g, v>`` (first in insertion order on ties) and its score."""
    if len(S) == 0:
        raise ValueError("empty active set")
    s = S.scores(g)
    i = int(np.argmax(s))
    return S.vertices[i], float(s[i])
