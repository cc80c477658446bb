"""Frank-Wolfe loops: monotone open-loop (plain, halving, stateless) and backtracking (FW and away-step).

Every run returns a :class:`RunTrace`. Record ``k`` describes ``x_k``, the
iterate after ``k`` steps, together with the step that produced it, so the
first record is written once iteration 0 completes and the stopping test uses
the FW gap from the LMO call already made for the next iteration.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .core import CountedObjective, IterationRecord, RunTrace, StepType, TerminalStatus
from .lmo import ActiveSet, BasisVector, Permutation, ZeroPoint
from .stepsize import (
    BacktrackConfig,
    HalvingState,
    backtrack,
    halving_step,
    init_smoothness,
    monotonic_accept,
    open_loop,
    stateless_halving_step,
)

ACTIVE_SET_CHECK_EVERY = 100


@dataclass(frozen=True)
class StopCriteria:
    max_iter: int | None = 10_000
    fw_gap_tol: float = 0.0
    time_limit: float | None = None
    # stop after this many consecutive iterations without a strict decrease of f
    stall_iters: int | None = None

    def __post_init__(self):
        if self.max_iter is None and self.time_limit is None:
            raise ValueError("need a finite max_iter or time_limit")
        if self.fw_gap_tol < 0:
            raise ValueError("fw_gap_tol must be nonnegative")


def fw_gap(grad, x, v_dense) -> float:
    return float(np.dot(grad, x) - np.dot(grad, v_dense))


class _Run:
    """Shared bookkeeping: counted oracles, clock, stopping rule, trace."""

    def __init__(self, name, obj, lmo, stop, record_iterates):
        self.obj = obj if isinstance(obj, CountedObjective) else CountedObjective(obj)
        self.counters = self.obj.counters
        self.lmo = lmo
        self.stop = stop or StopCriteria()
        self.trace = RunTrace(name)
        if record_iterates:
            self.trace.iterates = []
        self.t0 = time.perf_counter()
        self._best = math.inf
        self._since_best = 0

    def call_lmo(self, g):
        self.counters.lmo += 1
        return self.lmo(g)

    def start(self, x, f, gap):
        if not math.isfinite(f):
            raise ValueError("x0 outside dom f")
        self.trace.f_initial = f
        self._best = f
        self.trace.fw_gap_initial = gap
        self.trace.initial_counters = self.counters.snapshot()
        if self.trace.iterates is not None:
            self.trace.iterates.append(x.copy())

    def check_start(self, x):
        contains = getattr(self.lmo, "contains", None)
        if contains is not None and not contains(x):
            raise ValueError("x0 is not feasible")
        if not self.obj.in_domain(x):
            raise ValueError("x0 outside dom f")

    def record(self, t, x, f, gap, gamma, kind, **extra):
        rec = IterationRecord(
            iter=t,
            wall_time=time.perf_counter() - self.t0,
            f_value=f,
            fw_gap=gap,
            step_size=gamma,
            step_type=kind,
            counters=self.counters.snapshot(),
            **extra,
        )
        self.trace.records.append(rec)
        if f < self._best:
            self._best, self._since_best = f, 0
        else:
            self._since_best += 1
        if self.trace.iterates is not None:
            self.trace.iterates.append(x.copy())

    def done(self, t, gap):
        """Check stopping criteria before taking step ``t``."""
        stop = self.stop
        if gap <= stop.fw_gap_tol:
            self.trace.terminal_status = TerminalStatus.GapReached
            return True
        if stop.max_iter is not None and t >= stop.max_iter:
            self.trace.terminal_status = TerminalStatus.MaxIter
            return True
        if stop.time_limit is not None and time.perf_counter() - self.t0 >= stop.time_limit:
            self.trace.terminal_status = TerminalStatus.TimeLimit
            return True
        if stop.stall_iters is not None and self._since_best >= stop.stall_iters:
            self.trace.terminal_status = TerminalStatus.Stalled
            return True
        return False

    def finish(self, x):
        self.trace.x_final = np.array(x, copy=True)
        return self.trace


def _as_point(x0):
    if isinstance(x0, (BasisVector, ZeroPoint, Permutation)):
        return x0.dense()
    return np.array(x0, dtype=float)


def _open_loop_run(name, step_rule, obj, lmo, x0, stop, record_iterates):
    run = _Run(name, obj, lmo, stop, record_iterates)
    o = run.obj
    x = _as_point(x0)
    run.check_start(x)
    f = o.value(x)
    g = o.gradient(x)
    v = run.call_lmo(g)
    vd = v.dense()
    gap = fw_gap(g, x, vd)
    run.start(x, f, gap)
    t = 0
    while not run.done(t, gap):
        d = vd - x
        gamma, cand, f_new = step_rule(t, o, x, f, d)
        if gamma > 0.0:
            x, f = cand, f_new
            # moved: the cached gradient and vertex are stale
            g = o.gradient(x)
            v = run.call_lmo(g)
            vd = v.dense()
            gap = fw_gap(g, x, vd)
            kind = StepType.FW
        else:
            kind = StepType.Frozen
        t += 1
        run.record(t, x, f, gap, gamma, kind)
    return run.finish(x)


def run_mfw(obj, lmo, x0, stop: StopCriteria | None = None, record_iterates=False) -> RunTrace:
    """Open-loop step ``2/(t+2)``; a candidate outside the domain or with higher value is not taken."""

    def rule(t, o, x, f, d):
        gamma = open_loop(t)
        cand = x + gamma * d
        f_new = monotonic_accept(o, x, f, cand)
        if f_new is None:
            return 0.0, x, f
        return gamma, cand, f_new

    return _open_loop_run("MFW", rule, obj, lmo, x0, stop, record_iterates)


def run_halving_mfw(obj, lmo, x0, stop: StopCriteria | None = None, record_iterates=False) -> RunTrace:
    state = HalvingState()

    def rule(t, o, x, f, d):
        return halving_step(state, t, o, x, f, d)

    trace = _open_loop_run("HalvingMFW", rule, obj, lmo, x0, stop, record_iterates)
    trace.info["halvings"] = state.psi
    return trace


def run_stateless_mfw(obj, lmo, x0, stop: StopCriteria | None = None, record_iterates=False) -> RunTrace:
    return _open_loop_run("StatelessMFW", stateless_halving_step, obj, lmo, x0, stop, record_iterates)


def run_bfw(obj, lmo, x0, cfg: BacktrackConfig | None = None, stop: StopCriteria | None = None,
            record_iterates=False, L_init=None) -> RunTrace:
    """Frank-Wolfe with the adaptive backtracking step; ``L_{-1}`` from a difference quotient unless given."""
    cfg = cfg or BacktrackConfig()
    run = _Run("BFW", obj, lmo, stop, record_iterates)
    o = run.obj
    x = _as_point(x0)
    run.check_start(x)
    f = o.value(x)
    g = o.gradient(x)
    v = run.call_lmo(g)
    vd = v.dense()
    gap = fw_gap(g, x, vd)
    run.start(x, f, gap)
    L = L_init
    if L is None and gap > run.stop.fw_gap_tol:
        L = init_smoothness(o, x, vd)
    t = 0
    while not run.done(t, gap):
        d = vd - x
        # the gap is positive here, so d is a descent direction
        res = backtrack(o, x, d, g, L, 1.0, cfg, f_x=f)
        L = res.L
        x = x + res.gamma * d
        f = res.f_new
        g = o.gradient(x)
        v = run.call_lmo(g)
        vd = v.dense()
        gap = fw_gap(g, x, vd)
        t += 1
        run.record(t, x, f, gap, res.gamma, StepType.FW, smoothness=L)
    return run.finish(x)


def run_bafw(obj, lmo, x0, cfg: BacktrackConfig | None = None, stop: StopCriteria | None = None,
             record_iterates=False, L_init=None) -> RunTrace:
    """Away-step Frank-Wolfe with backtracking.

    ``x0`` is a vertex, or an :class:`ActiveSet` when the vertices themselves
    are outside the domain (barrier problems).
    """
    cfg = cfg or BacktrackConfig()
    run = _Run("BAFW", obj, lmo, stop, record_iterates)
    o = run.obj
    if isinstance(x0, ActiveSet):
        S = x0
    elif isinstance(x0, (BasisVector, ZeroPoint, Permutation)):
        S = ActiveSet.from_vertex(x0)
    else:
        raise TypeError("B-AFW needs a vertex or an ActiveSet as starting point")
    x = S.x.copy()
    run.check_start(x)
    f = o.value(x)
    g = o.gradient(x)
    v = run.call_lmo(g)
    vd = v.dense()
    gx = float(np.dot(g, x))

    def gaps():
        a, ga = _away(S, g)
        return a, gx - v.dot(g), ga - gx

    a, fwg, awg = gaps()
    run.start(x, f, fwg)
    L = L_init
    if L is None and fwg > run.stop.fw_gap_tol:
        L = init_smoothness(o, x, vd)
    t = 0
    while not run.done(t, fwg):
        if fwg >= awg or len(S) == 1:
            d = vd - x
            gmax = 1.0
            away = False
        else:
            d = x - a.dense()
            gmax = S.gamma_max(a)
            away = True
        res = backtrack(o, x, d, g, L, gmax, cfg, f_x=f)
        L, gamma = res.L, res.gamma
        cand = x + gamma * d
        if away:
            dropped = S.update_away(a, gamma)
            kind = StepType.Drop if dropped else StepType.Away
        else:
            S.update_fw(v, gamma)
            kind = StepType.FW
        # keep the cached iterate bit-identical to the point that was evaluated
        S.x = cand
        x, f = cand, res.f_new
        g = o.gradient(x)
        v = run.call_lmo(g)
        vd = v.dense()
        gx = float(np.dot(g, x))
        a, fwg, awg = gaps()
        t += 1
        if t % ACTIVE_SET_CHECK_EVERY == 0:
            S.check()
        # gamma may exceed 1 on away steps; the trace stores the fraction of the maximal step
        frac = gamma if not away else min(1.0, gamma / gmax)
        run.record(t, x, f, fwg, frac, kind, active_gap=fwg + awg, active_size=len(S), smoothness=L)
    S.check()
    trace = run.finish(x)
    trace.info["active_set"] = S
    return trace


def _away(S, g):
    s = S.scores(g)
    i = int(np.argmax(s))
    return S.vertices[i], float(s[i])


ALGORITHMS = {
    "MFW": run_mfw,
    "HalvingMFW": run_halving_mfw,
    "StatelessMFW": run_stateless_mfw,
    "BFW": run_bfw,
    "BAFW": run_bafw,
}
