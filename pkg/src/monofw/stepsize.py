"""Step-size rules: open loop, monotone acceptance, halving, and adaptive backtracking.

The backtracking estimate of the local smoothness constant is called ``L``
throughout (it is unrelated to the self-concordance constant ``M``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

GAMMA_UNDERFLOW = 1e-300
L_FLOOR = 1e-10
L_CEIL = 1e300
# relative slack on the sufficient-decrease test, absorbs round-off in f(x+gd) - f(x)
DECREASE_SLACK = 4 * np.finfo(float).eps


@dataclass(frozen=True)
class BacktrackConfig:
    tau: float = 2.0
    eta: float = 0.9
    L_init: float = 1.0

    def __post_init__(self):
        if not self.tau > 1:
            raise ValueError("tau must be > 1")
        if not 0 < self.eta <= 1:
            raise ValueError("eta must lie in (0, 1]")
        if not self.L_init > 0:
            raise ValueError("L_init must be positive")


@dataclass
class HalvingState:
    psi: int = 0


class StepResult(NamedTuple):
    gamma: float
    candidate: np.ndarray
    f_candidate: float


class BacktrackResult(NamedTuple):
    gamma: float
    L: float
    f_new: float
    trips: int


def open_loop(t: int) -> float:
    if t < 0:
        raise ValueError("iteration index must be nonnegative")
    return 2.0 / (t + 2)


def monotonic_accept(obj, x, f_x, candidate):
    """Return the candidate's value if it is in the domain and not worse than ``f_x``, else None.

    The domain oracle is queried first; the function is only evaluated for
    in-domain candidates.
    """
    if not obj.in_domain(candidate):
        return None
    f_new = obj.value(candidate)
    if f_new > f_x:
        return None
    return f_new


def _halve_until_accepted(obj, x, f_x, d, base, k):
    # gamma = min(1, 2^{-k} * base); returns (gamma, k, candidate, f_candidate)
    while True:
        gamma = min(1.0, base * 2.0**-k)
        if gamma < GAMMA_UNDERFLOW:
            return 0.0, k, x, f_x
        cand = x + gamma * d
        f_new = monotonic_accept(obj, x, f_x, cand)
        if f_new is not None:
            return gamma, k, cand, f_new
        k += 1


def halving_step(state: HalvingState, t, obj, x, f_x, d) -> StepResult:
    """Step ``2^{1-psi}/(t+2)``; each rejection permanently bumps ``state.psi``."""
    gamma, state.psi, cand, f_new = _halve_until_accepted(obj, x, f_x, d, 2.0 / (t + 2), state.psi)
    return StepResult(gamma, cand, f_new)


def stateless_halving_step(t, obj, x, f_x, d) -> StepResult:
    gamma, _, cand, f_new = _halve_until_accepted(obj, x, f_x, d, 2.0 / (t + 2), 0)
    return StepResult(gamma, cand, f_new)


def sufficient_decrease(f_x, f_new, gamma, L, gd, dd):
    """``f(x + g d) - f(x) <= L g^2/2 ||d||^2 + g <grad, d>`` up to round-off, and no increase."""
    lhs = f_new - f_x
    rhs = 0.5 * L * gamma * gamma * dd + gamma * gd
    return lhs <= 0.0 and lhs <= rhs + DECREASE_SLACK * (1.0 + abs(f_x))


def backtrack(obj, x, d, grad, L_prev, gamma_max=1.0, cfg: BacktrackConfig | None = None, f_x=None):
    cfg = cfg or BacktrackConfig()
    gd = float(np.dot(grad, d))
    if not gd < 0:
        raise ValueError(f"not a descent direction: <grad, d> = {gd}")
    dd = float(np.dot(d, d))
    if f_x is None:
        f_x = obj.value(x)
    L = max(cfg.eta * L_prev, L_FLOOR)
    trips = 0
    while True:
        gamma = min(-gd / (L * dd), gamma_max)
        cand = x + gamma * d
        if obj.in_domain(cand):
            f_new = obj.value(cand)
            if sufficient_decrease(f_x, f_new, gamma, L, gd, dd):
                return BacktrackResult(gamma, L, f_new, trips)
        L *= cfg.tau
        trips += 1
        if L > L_CEIL:
            raise FloatingPointError("smoothness estimate exceeded 1e300; objective is not locally smooth here")


def init_smoothness(obj, x0, v0, eps=1e-3) -> float:
    """Difference-quotient estimate ``||grad(x0) - grad(x0 + eps (v0-x0))|| / (eps ||v0-x0||)``."""
    x0 = np.asarray(x0, dtype=float)
    d = np.asarray(v0, dtype=float) - x0
    nd = float(np.linalg.norm(d))
    if nd == 0:
        raise ValueError("v0 must differ from x0")
    g0 = obj.gradient(x0)
    for _ in range(51):
        y = x0 + eps * d
        if obj.in_domain(y):
            L = float(np.linalg.norm(g0 - obj.gradient(y))) / (eps * nd)
            return max(L, L_FLOOR) if math.isfinite(L) else 1.0
        eps /= 2
    return 1.0
