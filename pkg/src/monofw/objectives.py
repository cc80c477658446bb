"""Benchmark objectives with analytic gradients, domain oracles and HVPs.

Each family comes as an immutable instance dataclass plus an ``Objective``
subclass; ``*_objective(inst)`` builds the latter from the former. Generators
take an integer seed or a ``numpy.random.Generator``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import GscParams, Objective


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


# --------------------------------------------------------------------------
# instances


@dataclass(frozen=True, eq=False)
class PortfolioInstance:
    R: np.ndarray  # p x n, rows are period returns

    def __post_init__(self):
        R = _frozen(self.R)
        if R.ndim != 2:
            raise ValueError("R must be a p x n matrix")
        if not np.all(R > 0):
            raise ValueError("portfolio returns must be strictly positive")
        object.__setattr__(self, "R", R)


@dataclass(frozen=True, eq=False)
class KLInstance:
    W: np.ndarray
    y: np.ndarray
    R: float = 1.0
    x0: np.ndarray | None = None  # ground-truth signal, when generated

    def __post_init__(self):
        W, y = _frozen(self.W), _frozen(self.y)
        if W.ndim != 2 or y.shape != (W.shape[0],):
            raise ValueError("W must be N x d and y of length N")
        if not np.all(y > 0):
            raise ValueError("y must be entrywise positive")
        if np.any(W < 0) or np.any(~np.any(W > 0, axis=1)):
            raise ValueError("W must be nonnegative with no all-zero row")
        if not self.R > 0:
            raise ValueError("radius must be positive")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "y", y)
        if self.x0 is not None:
            object.__setattr__(self, "x0", _frozen(self.x0))


@dataclass(frozen=True, eq=False)
class LogisticInstance:
    A: np.ndarray
    y: np.ndarray
    mu: float
    rho: float

    def __post_init__(self):
        A, y = _frozen(self.A), _frozen(self.y)
        if A.ndim != 2 or y.shape != (A.shape[0],):
            raise ValueError("A must be N x n and y of length N")
        if not np.all(np.abs(y) == 1):
            raise ValueError("labels must be exactly +1 or -1")
        if self.mu < 0 or not self.rho > 0:
            raise ValueError("need mu >= 0 and rho > 0")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True, eq=False)
class BarrierQuadraticInstance:
    Q: np.ndarray
    b: np.ndarray
    mu: float
    rho: float = 1.0

    def __post_init__(self):
        Q, b = _frozen(self.Q), _frozen(self.b)
        if Q.shape != (b.size, b.size):
            raise ValueError("Q must be n x n with n = len(b)")
        if np.max(np.abs(Q - Q.T)) > 1e-10:
            raise ValueError("Q must be symmetric")
        if not self.mu > 0:
            raise ValueError("barrier weight mu must be positive")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True, eq=False)
class BirkhoffInstance:
    """Log-loss over vectorized m x m doubly stochastic matrices plus ``mu/2 ||X||^2``."""

    R: np.ndarray  # p x m^2
    mu: float

    def __post_init__(self):
        R = _frozen(self.R)
        m = math.isqrt(R.shape[1])
        if m * m != R.shape[1]:
            raise ValueError("R must have m^2 columns")
        if not np.all(R > 0):
            raise ValueError("returns must be strictly positive")
        object.__setattr__(self, "R", R)

    @property
    def m(self):
        return math.isqrt(self.R.shape[1])


@dataclass(frozen=True, eq=False)
class QuadraticInstance:
    """``1/2 ||x - c||^2``; a smooth reference problem with a closed-form solution on the simplex."""

    c: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c", _frozen(self.c))


# --------------------------------------------------------------------------
# objectives


class PortfolioObjective(Objective):
    def __init__(self, inst: PortfolioInstance, gsc: GscParams | None = None):
        self.inst = inst
        self.R = inst.R
        self.dim = inst.R.shape[1]
        # -log is standard self-concordant, i.e. (2, 3)-GSC.
        self.gsc_params = gsc or GscParams(2.0, 3.0, known=True)

    def in_domain(self, x):
        return bool(np.all(np.isfinite(x))) and bool(np.min(self.R @ x) > 0)

    def _value(self, x):
        return -np.sum(np.log(self.R @ x))

    def gradient(self, x):
        z = self.R @ x
        if not np.min(z) > 0:
            self._require_domain(x)
        return -(self.R.T @ (1.0 / z))

    def hessian_vec(self, x, d):
        self._require_domain(x)
        z = self.R @ x
        return self.R.T @ ((self.R @ d) / z**2)


class KLObjective(Objective):
    def __init__(self, inst: KLInstance, gsc: GscParams | None = None):
        self.inst = inst
        self.W, self.y = inst.W, inst.y
        self.dim = inst.W.shape[1]
        # Not provably GSC; M = 1 is the conventional choice, nu = 4 from t log t.
        self.gsc_params = gsc or GscParams(1.0, 4.0, known=False)

    def in_domain(self, x):
        return bool(np.all(np.isfinite(x))) and bool(np.min(self.W @ x) > 0)

    def _value(self, x):
        z = self.W @ x
        # 0 log 0 = 0 on the boundary
        zlog = np.where(z > 0, z * np.log(np.where(z > 0, z, 1.0) / self.y), 0.0)
        return np.sum(zlog - z + self.y)

    def gradient(self, x):
        z = self.W @ x
        if not np.min(z) > 0:
            self._require_domain(x)
        return self.W.T @ np.log(z / self.y)

    def hessian_vec(self, x, d):
        self._require_domain(x)
        z = self.W @ x
        return self.W.T @ ((self.W @ d) / z)


class LogisticObjective(Objective):
    def __init__(self, inst: LogisticInstance, gsc: GscParams | None = None):
        self.inst = inst
        self.A, self.y, self.mu = inst.A, inst.y, inst.mu
        self.N, self.dim = inst.A.shape
        M = float(np.max(np.linalg.norm(inst.A, axis=1))) or 1.0
        self.gsc_params = gsc or GscParams(M, 2.0, known=True)

    def in_domain(self, x):
        return bool(np.all(np.isfinite(x)))

    def _margins(self, x):
        return -self.y * (self.A @ x)

    def _value(self, x):
        # logaddexp(0, m) == m + log1p(exp(-m)) for m > 0, log1p(exp(m)) otherwise
        m = self._margins(x)
        return np.mean(np.logaddexp(0.0, m)) + 0.5 * self.mu * np.dot(x, x)

    def gradient(self, x):
        s = expit(self._margins(x))
        return self.A.T @ (-self.y * s) / self.N + self.mu * x

    def hessian_vec(self, x, d):
        s = expit(self._margins(x))
        return self.A.T @ (s * (1.0 - s) * (self.A @ d)) / self.N + self.mu * d


class BarrierQuadraticObjective(Objective):
    def __init__(self, inst: BarrierQuadraticInstance, gsc: GscParams | None = None):
        self.inst = inst
        self.Q, self.b, self.mu = inst.Q, inst.b, inst.mu
        self.dim = inst.b.size
        self.gsc_params = gsc or GscParams(2.0 / math.sqrt(inst.mu), 3.0, known=True)

    def in_domain(self, x):
        return bool(np.all(np.isfinite(x))) and bool(np.min(x) > 0)

    def _value(self, x):
        return x @ (self.Q @ x) + self.b @ x - self.mu * np.sum(np.log(x))

    def gradient(self, x):
        self._require_domain(x)
        return 2.0 * (self.Q @ x) + self.b - self.mu / x

    def hessian_vec(self, x, d):
        self._require_domain(x)
        return 2.0 * (self.Q @ d) + self.mu * d / x**2


class BirkhoffObjective(Objective):
    """Points are m x m matrices flattened row-major."""

    def __init__(self, inst: BirkhoffInstance, gsc: GscParams | None = None):
        self.inst = inst
        self.R, self.mu = inst.R, inst.mu
        self.m = inst.m
        self.dim = self.R.shape[1]
        self.gsc_params = gsc or GscParams(2.0, 3.0, known=True)

    def in_domain(self, x):
        return bool(np.all(np.isfinite(x))) and bool(np.min(self.R @ x) > 0)

    def _value(self, x):
        return -np.sum(np.log(self.R @ x)) + 0.5 * self.mu * np.dot(x, x)

    def gradient(self, x):
        z = self.R @ x
        if not np.min(z) > 0:
            self._require_domain(x)
        return -(self.R.T @ (1.0 / z)) + self.mu * x

    def hessian_vec(self, x, d):
        self._require_domain(x)
        z = self.R @ x
        return self.R.T @ ((self.R @ d) / z**2) + self.mu * d


class QuadraticObjective(Objective):
    def __init__(self, inst: QuadraticInstance):
        self.inst = inst
        self.c = inst.c
        self.dim = inst.c.size
        # a quadratic has vanishing third derivative; any M works
        self.gsc_params = GscParams(1.0, 2.0, known=True)

    def in_domain(self, x):
        return bool(np.all(np.isfinite(x)))

    def _value(self, x):
        r = x - self.c
        return 0.5 * np.dot(r, r)

    def gradient(self, x):
        return x - self.c

    def hessian_vec(self, x, d):
        return np.array(d, dtype=float)


def portfolio_objective(inst: PortfolioInstance) -> PortfolioObjective:
    return PortfolioObjective(inst)


def kl_objective(inst: KLInstance) -> KLObjective:
    return KLObjective(inst)


def logistic_objective(inst: LogisticInstance) -> LogisticObjective:
    return LogisticObjective(inst)


def barrier_quadratic_objective(inst: BarrierQuadraticInstance) -> BarrierQuadraticObjective:
    return BarrierQuadraticObjective(inst)


def birkhoff_objective(inst: BirkhoffInstance) -> BirkhoffObjective:
    return BirkhoffObjective(inst)


# --------------------------------------------------------------------------
# generators


class Distribution(enum.Enum):
    Uniform = "uniform"
    Normal = "normal"
    LogNormal = "lognormal"

    @classmethod
    def parse(cls, s):
        if isinstance(s, cls):
            return s
        key = str(s).strip().lower()
        for d in cls:
            if d.value == key:
                return d
        raise ValueError(f"unknown distribution {s!r}; expected one of {[d.value for d in cls]}")


POSITIVE_FLOOR = 1e-3
SIGNAL_FLOOR = 1e-6


def _positive_returns(rng, shape, dist):
    dist = Distribution.parse(dist)
    if dist is Distribution.Uniform:
        R = rng.uniform(0.0, 1.0, size=shape)
    elif dist is Distribution.Normal:
        R = np.abs(rng.standard_normal(size=shape))
    else:
        R = rng.lognormal(mean=0.0, sigma=0.5, size=shape)
    return np.maximum(R, POSITIVE_FLOOR)


def generate_portfolio(n, p, dist="lognormal", seed=0) -> PortfolioInstance:
    if n < 1 or p < 1:
        raise ValueError("need n, p >= 1")
    rng = _rng(seed)
    return PortfolioInstance(_positive_returns(rng, (p, n), dist))


def generate_kl(N, d, sparsity=0.3, noise_frac=0.1, seed=0, R=None) -> KLInstance:
    """Sparse nonnegative signal seen through a folded-normal map plus Gaussian noise.

    ``R`` defaults to twice the l1 norm of the true signal so it is feasible.
    """
    if N < 1 or d < 1:
        raise ValueError("need N, d >= 1")
    if not 0 <= sparsity <= 1:
        raise ValueError("sparsity must lie in [0, 1]")
    rng = _rng(seed)
    k = int(math.floor(sparsity * d))
    x0 = np.zeros(d)
    support = rng.choice(d, size=k, replace=False)
    x0[support] = rng.exponential(1.0, size=k)
    W = np.abs(rng.normal(0.0, 5.0, size=(N, d)))
    # keep every row nonzero so the domain is nonempty
    W = np.maximum(W, 1e-12)
    signal = W @ x0
    if noise_frac > 0:
        std = float(np.std(signal)) if k > 0 else 1.0
        y = signal + rng.normal(0.0, noise_frac * std, size=N)
    else:
        y = signal.copy()
    y = np.maximum(y, SIGNAL_FLOOR)
    if R is None:
        R = max(2.0 * float(np.sum(x0)), 1.0)
    return KLInstance(W, y, float(R), x0)


def generate_logistic(N, n, mu=0.1, rho=5.0, seed=0, noise=0.1) -> LogisticInstance:
    """Gaussian design, labels from a sparse planted model with label noise."""
    rng = _rng(seed)
    A = rng.standard_normal(size=(N, n)) / math.sqrt(n)
    w = np.zeros(n)
    k = max(1, n // 10)
    w[rng.choice(n, size=k, replace=False)] = rng.standard_normal(size=k) * math.sqrt(n)
    score = A @ w + noise * rng.standard_normal(size=N)
    y = np.where(score >= 0, 1.0, -1.0)
    return LogisticInstance(A, y, float(mu), float(rho))


def generate_barrier_quadratic(n, mu=1e-2, seed=0, sigma=1.5, rho=1.0) -> BarrierQuadraticInstance:
    """SPD ``Q`` with log-normal spectrum (badly conditioned for larger ``sigma``)."""
    rng = _rng(seed)
    H = rng.standard_normal(size=(n, n))
    U, _ = np.linalg.qr(H)
    eig = rng.lognormal(mean=0.0, sigma=sigma, size=n)
    Q = (U * eig) @ U.T
    Q = 0.5 * (Q + Q.T)
    if not np.min(np.linalg.eigvalsh(Q)) > 0:
        raise RuntimeError("generated Q is not positive definite")
    b = rng.standard_normal(size=n)
    return BarrierQuadraticInstance(Q, b, float(mu), float(rho))


def generate_birkhoff(m, p, dist="lognormal", seed=0, mu=None) -> BirkhoffInstance:
    """``mu`` defaults to ``100 / sqrt(p)`` with ``p`` the number of samples."""
    rng = _rng(seed)
    R = _positive_returns(rng, (p, m * m), dist)
    if mu is None:
        mu = 100.0 / math.sqrt(p)
    return BirkhoffInstance(R, float(mu))


def generate_quadratic(n, seed=0) -> QuadraticInstance:
    rng = _rng(seed)
    return QuadraticInstance(rng.standard_normal(n) / math.sqrt(n))


def quadratic_objective(inst: QuadraticInstance) -> QuadraticObjective:
    return QuadraticObjective(inst)
