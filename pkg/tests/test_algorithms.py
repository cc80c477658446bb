import numpy as np
import pytest

from helpers import Linear, Quadratic
from monofw.algorithms import (
    StopCriteria,
    fw_gap,
    run_bafw,
    run_bfw,
    run_halving_mfw,
    run_mfw,
    run_stateless_mfw,
)
from monofw.core import Objective, StepType, TerminalStatus
from monofw.diagnostics import fit_line
from monofw.harness import project_simplex
from monofw.lmo import ActiveSet, BasisVector, L1Ball, ProbabilitySimplex
from monofw.objectives import (
    barrier_quadratic_objective,
    generate_barrier_quadratic,
    generate_logistic,
    generate_portfolio,
    logistic_objective,
    portfolio_objective,
)
from monofw.stepsize import sufficient_decrease

C3 = np.array([0.2, 0.5, 0.3])


def _nonincreasing(tr):
    f = np.r_[tr.f_initial, tr.column("f_value")]
    return np.all(np.diff(f) <= 0)


def test_fw_gap_examples():
    x = np.array([0.2, 0.8])
    assert fw_gap(np.array([1.0, 2.0]), x, x) == 0
    assert fw_gap(np.zeros(2), x, np.array([1.0, 0.0])) == 0


def test_stop_criteria_validation():
    with pytest.raises(ValueError):
        StopCriteria(max_iter=None, time_limit=None)
    with pytest.raises(ValueError):
        StopCriteria(fw_gap_tol=-1)


def test_mfw_quadratic():
    S = ProbabilitySimplex(3)
    tr = run_mfw(Quadratic(C3), S, S.default_start(), StopCriteria(max_iter=10_000))
    assert _nonincreasing(tr)
    assert tr.records[-1].fw_gap < 1e-3
    assert np.linalg.norm(tr.x_final - project_simplex(C3)) < 1e-2


def test_mfw_immediate_stop():
    S = ProbabilitySimplex(3)
    tr = run_mfw(Linear([0.0, 1.0, 2.0]), S, S.default_start(), StopCriteria(max_iter=100, fw_gap_tol=1e-12))
    assert tr.fw_gap_initial <= 1e-12 and not tr.records
    assert tr.terminal_status is TerminalStatus.GapReached


def test_mfw_rejects_bad_start():
    S = ProbabilitySimplex(3)
    with pytest.raises(ValueError):
        run_mfw(Quadratic(C3), S, np.array([0.5, 0.5, 0.5]))
    f = portfolio_objective(generate_portfolio(3, 4, "uniform", 0))
    with pytest.raises(ValueError):
        run_mfw(f, L1Ball(3, 1.0), np.array([-1.0, 0.0, 0.0]))


def test_mfw_frozen_steps_reuse_cache():
    f = portfolio_objective(generate_portfolio(30, 60, "lognormal", 2))
    S = ProbabilitySimplex(30)
    tr = run_mfw(f, S, S.default_start(), StopCriteria(max_iter=2000))
    d = tr.counter_deltas()  # zoo, foo, lmo, dom, hvp
    frozen = np.array([r.step_type is StepType.Frozen for r in tr.records])
    assert frozen.any()
    assert np.all(d <= 1)
    assert np.all(d[frozen, 1] == 0) and np.all(d[frozen, 2] == 0)
    assert np.all(tr.column("step_size")[frozen] == 0)
    last = tr.records[-1].counters
    assert last.foo <= len(tr.records) + 1 and last.lmo <= len(tr.records) + 1


def test_halving_matches_mfw_when_unconstrained():
    # a linear objective accepts every step: no halving ever happens
    S = ProbabilitySimplex(4)
    obj = Linear([3.0, 1.0, 2.0, 0.5])
    a = run_mfw(obj, S, S.default_start(), StopCriteria(max_iter=50), record_iterates=True)
    b = run_halving_mfw(obj, S, S.default_start(), StopCriteria(max_iter=50), record_iterates=True)
    c = run_stateless_mfw(obj, S, S.default_start(), StopCriteria(max_iter=50), record_iterates=True)
    for x, y, z in zip(a.iterates, b.iterates, c.iterates):
        np.testing.assert_array_equal(x, y)
        np.testing.assert_array_equal(x, z)
    assert b.info["halvings"] == 0


def test_halving_psi_positive_near_boundary():
    inst = generate_barrier_quadratic(30, seed=4)
    B = L1Ball(30, 1.0)
    tr = run_halving_mfw(barrier_quadratic_objective(inst), B, np.full(30, 1 / 30), StopCriteria(max_iter=200))
    assert tr.info["halvings"] > 0
    assert _nonincreasing(tr)
    assert all(r.step_type is not StepType.Frozen for r in tr.records)


def test_bfw_quadratic():
    S = ProbabilitySimplex(3)
    obj = Quadratic(C3)
    tr = run_bfw(obj, S, S.default_start(), stop=StopCriteria(max_iter=1000, fw_gap_tol=1e-6))
    assert tr.terminal_status is TerminalStatus.GapReached
    assert _nonincreasing(tr)


def test_bfw_steps_pass_reaudit():
    f = portfolio_objective(generate_portfolio(20, 40, "lognormal", 3))
    S = ProbabilitySimplex(20)
    tr = run_bfw(f, S, S.default_start(), stop=StopCriteria(max_iter=300), record_iterates=True)
    for k, r in enumerate(tr.records):
        x, y = tr.iterates[k], tr.iterates[k + 1]
        g = f.gradient(x)
        d = S(g).dense() - x
        gam = r.step_size
        assert f.in_domain(y)
        fx, fy = f.value(x), f.value(y)
        lhs = fy - fx
        rhs = 0.5 * r.smoothness * gam**2 * (d @ d) + gam * (g @ d)
        assert lhs <= rhs + 1e-12 * (1 + abs(fx))
        assert sufficient_decrease(fx, fy, gam, r.smoothness, g @ d, d @ d)


def test_bfw_logistic_geometric_tail():
    inst = generate_logistic(200, 20, mu=0.5, rho=1.0, seed=1)
    B = L1Ball(20, 1.0)
    f = logistic_objective(inst)
    tr = run_bfw(f, B, B.default_start(), stop=StopCriteria(max_iter=3000, fw_gap_tol=1e-12))
    assert np.sum(np.abs(tr.x_final)) < 0.9  # optimum is interior to the ball
    g = np.minimum.accumulate(tr.column("fw_gap"))
    t = tr.column("iter")
    k = (g > 1e-8) & (g < 1e-2)
    slope, _, r2 = fit_line(t[k], np.log(g[k]))
    assert slope < 0 and r2 >= 0.9


def test_bafw_singleton_forces_fw():
    S = ProbabilitySimplex(3)
    tr = run_bafw(Quadratic(C3), S, S.default_start(), stop=StopCriteria(max_iter=1))
    assert tr.records[0].step_type is StepType.FW


def test_bafw_drop_steps_and_bound():
    f = portfolio_objective(generate_portfolio(40, 80, "lognormal", 5))
    S = ProbabilitySimplex(40)
    tr = run_bafw(f, S, S.default_start(), stop=StopCriteria(max_iter=2000, fw_gap_tol=1e-10))
    kinds = {r.step_type for r in tr.records}
    assert StepType.FW in kinds and StepType.Away in kinds | {StepType.Drop}
    for r in tr.records:
        assert r.active_gap >= r.fw_gap >= -1e-10
    A = tr.info["active_set"]
    A.check()
    assert abs(A.weights.sum() - 1) <= 1e-12 * len(A)
    assert _nonincreasing(tr)


def test_bafw_drop_removes_vertex():
    # quadratic with optimum on an edge: starting from a 3-vertex set, vertex 2 must be dropped
    S = ProbabilitySimplex(3)
    obj = Quadratic([0.6, 0.6, -1.0])
    A = ActiveSet([BasisVector(i, 1.0, 3) for i in range(3)], [0.2, 0.2, 0.6])
    tr = run_bafw(obj, S, A, stop=StopCriteria(max_iter=200, fw_gap_tol=1e-12))
    assert any(r.step_type is StepType.Drop for r in tr.records)
    assert BasisVector(2, 1.0, 3) not in tr.info["active_set"]


def test_bafw_needs_vertex_or_active_set():
    S = ProbabilitySimplex(3)
    with pytest.raises(TypeError):
        run_bafw(Quadratic(C3), S, np.array([1.0, 0, 0]))


def test_bafw_barrier_start():
    inst = generate_barrier_quadratic(10, seed=1)
    B = L1Ball(10, 1.0)
    A = ActiveSet(*zip(*B.barycenter()))
    f = barrier_quadratic_objective(inst)
    tr = run_bafw(f, B, A, stop=StopCriteria(max_iter=500))
    assert _nonincreasing(tr)
    assert np.all(tr.x_final > 0)


def test_time_limit():
    S = ProbabilitySimplex(3)
    tr = run_mfw(Quadratic(C3), S, S.default_start(), StopCriteria(max_iter=None, time_limit=0.05))
    assert tr.terminal_status is TerminalStatus.TimeLimit


class _Spike(Objective):
    """Linear gradient, but any move away from the start raises the value: M-FW freezes forever."""

    dim = 3

    def in_domain(self, x):
        return True

    def _value(self, x):
        return 0.0 if x[1] == 1.0 else 1.0

    def gradient(self, x):
        return np.array([0.0, 1.0, 2.0])


def test_stall_stop():
    S = ProbabilitySimplex(3)
    tr = run_mfw(_Spike(), S, BasisVector(1, 1.0, 3), StopCriteria(max_iter=100, stall_iters=5))
    assert tr.terminal_status is TerminalStatus.Stalled and len(tr.records) == 5
    assert all(r.step_type is StepType.Frozen for r in tr.records)
