"""Shared types: the objective interface, oracle counters and run traces."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """Raised when a first/second-order oracle is queried outside ``dom f``."""


@dataclass(frozen=True)
class GscParams:
    """Generalized self-concordance constants ``(M, nu)``.

    ``known`` is False when the constants are a convention rather than a proven
    property of the objective. Algorithms never read these values.
    """

    M: float
    nu: float
    known: bool = True

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError(f"M must be positive, got {self.M}")
        if not self.nu >= 2:
            raise ValueError(f"nu must be >= 2, got {self.nu}")


class Objective:
    """Oracle bundle for an extended-real convex function.

    Subclasses implement ``_value``, ``gradient``, ``in_domain`` and optionally
    ``hessian_vec``. ``value`` returns ``+inf`` outside the domain.
    """

    gsc_params: GscParams | None = None
    dim: int

    def in_domain(self, x: np.ndarray) -> bool:
        raise NotImplementedError

    def _value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def value(self, x: np.ndarray) -> float:
        if not self.in_domain(x):
            return math.inf
        return float(self._value(x))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hessian_vec(self, x: np.ndarray, d: np.ndarray) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no Hessian-vector product")

    def _require_domain(self, x):
        if not self.in_domain(x):
            raise DomainError(f"{type(self).__name__}: point outside dom f")


@dataclass
class OracleCounters:
    zoo: int = 0
    foo: int = 0
    lmo: int = 0
    dom: int = 0
    hvp: int = 0

    def snapshot(self) -> OracleCounters:
        return OracleCounters(self.zoo, self.foo, self.lmo, self.dom, self.hvp)

    def __sub__(self, other: OracleCounters) -> OracleCounters:
        return OracleCounters(
            self.zoo - other.zoo,
            self.foo - other.foo,
            self.lmo - other.lmo,
            self.dom - other.dom,
            self.hvp - other.hvp,
        )

    def as_tuple(self):
        return (self.zoo, self.foo, self.lmo, self.dom, self.hvp)


class CountedObjective(Objective):
    """Wrapper that tallies every oracle call in ``counters`` before delegating.

    The LMO counter lives here too so a run has a single counter object; the
    algorithms bump ``counters.lmo`` themselves.
    """

    def __init__(self, obj: Objective, counters: OracleCounters | None = None):
        self.inner = obj
        self.counters = counters if counters is not None else OracleCounters()
        self.dim = obj.dim
        self.gsc_params = obj.gsc_params

    def in_domain(self, x):
        self.counters.dom += 1
        return self.inner.in_domain(x)

    def value(self, x):
        self.counters.zoo += 1
        return self.inner.value(x)

    def gradient(self, x):
        self.counters.foo += 1
        return self.inner.gradient(x)

    def hessian_vec(self, x, d):
        self.counters.hvp += 1
        return self.inner.hessian_vec(x, d)


def counted_objective(obj: Objective) -> CountedObjective:
    if isinstance(obj, CountedObjective):
        return CountedObjective(obj.inner)
    return CountedObjective(obj)


def _check_dims(x, y):
    if np.shape(x) != np.shape(y):
        raise ValueError(f"dimension mismatch: {np.shape(x)} vs {np.shape(y)}")


def euclidean_norm(x) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=float)))


def inner(x, y) -> float:
    _check_dims(x, y)
    return float(np.dot(np.asarray(x, dtype=float), np.asarray(y, dtype=float)))


def axpy(x, gamma, d) -> np.ndarray:
    """Return a new array ``x + gamma * d``."""
    _check_dims(x, d)
    return np.asarray(x, dtype=float) + gamma * np.asarray(d, dtype=float)


class StepType(enum.Enum):
    FW = "FW"
    Away = "Away"
    Drop = "Drop"
    Frozen = "Frozen"


class TerminalStatus(enum.Enum):
    GapReached = "GapReached"
    MaxIter = "MaxIter"
    TimeLimit = "TimeLimit"
    Stalled = "Stalled"


@dataclass
class IterationRecord:
    """State after ``iter`` steps: ``f_value = f(x_iter)``, ``fw_gap = g(x_iter)``.

    ``step_size``/``step_type`` describe the step that produced ``x_iter``
    (for away and drop steps, the fraction of the maximal away step) and
    ``counters`` is the cumulative tally at the time the record was written.
    ``active_gap`` (away gap + FW gap) and ``active_size`` are only filled by
    away-step runs.
    """

    iter: int
    wall_time: float
    f_value: float
    fw_gap: float
    step_size: float
    step_type: StepType
    counters: OracleCounters
    active_gap: float | None = None
    active_size: int | None = None
    smoothness: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.step_size <= 1.0:
            raise ValueError(f"step size {self.step_size} outside [0, 1]")
        if self.step_type is StepType.Frozen and self.step_size != 0.0:
            raise ValueError("frozen step must record step_size 0")


@dataclass
class RunTrace:
    algorithm: str
    records: list[IterationRecord] = field(default_factory=list)
    terminal_status: TerminalStatus = TerminalStatus.MaxIter
    f_initial: float = math.inf
    fw_gap_initial: float = math.inf
    initial_counters: OracleCounters = field(default_factory=OracleCounters)
    x_final: np.ndarray | None = None
    iterates: list[np.ndarray] | None = None
    info: dict = field(default_factory=dict)

    @property
    def best_f(self) -> float:
        if not self.records:
            return self.f_initial
        return min(r.f_value for r in self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def counter_deltas(self) -> np.ndarray:
        """Per-record oracle call deltas as an ``(len, 5)`` int array (zoo, foo, lmo, dom, hvp)."""
        prev = self.initial_counters.as_tuple()
        out = []
        for r in self.records:
            cur = r.counters.as_tuple()
            out.append([c - p for c, p in zip(cur, prev)])
            prev = cur
        return np.array(out, dtype=int).reshape(-1, 5)
