"""Experiment orchestration: problem construction, reference optimum, CSV traces, summaries."""

from __future__ import annotations

import csv
import enum
import json
import math
import os
import platform
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernels
from .algorithms import ALGORITHMS, StopCriteria, run_bafw
from .config import ConfigError, ExperimentConfig
from .core import RunTrace
from .diagnostics import Gap, fd_gradient_audit, fit_rate
from .instance_io import read_instance
from .lmo import ActiveSet, Birkhoff, L1Ball, ProbabilitySimplex, UnitSimplex, dense
from .objectives import (
    barrier_quadratic_objective,
    birkhoff_objective,
    generate_barrier_quadratic,
    generate_birkhoff,
    generate_kl,
    generate_logistic,
    generate_portfolio,
    generate_quadratic,
    kl_objective,
    logistic_objective,
    portfolio_objective,
    quadratic_objective,
)

CSV_COLUMNS = ("iter", "time_s", "f_value", "primal_gap", "fw_gap", "step_size", "step_type",
               "zoo", "foo", "lmo", "dom")
REFERENCE_STALL_ITERS = 1000
DEFAULT_REFERENCE_BUDGET = 100_000
BACKTRACKING = ("BFW", "BAFW")


@dataclass
class Problem:
    name: str
    inst: object
    objective: object
    feasible: object
    start: object  # vertex or dense point, for the open-loop and B-FW runs
    active_start: object  # vertex or ActiveSet, for B-AFW


def _make_instance(cfg: ExperimentConfig, rng):
    k, p = cfg.knob, cfg.problem
    if p == "portfolio":
        return generate_portfolio(k("n"), k("p"), k("distribution"), rng)
    if p == "kl":
        return generate_kl(k("N"), k("d"), k("sparsity"), k("noise_frac"), rng, R=k("R"))
    if p == "logistic":
        return generate_logistic(k("N"), k("n"), k("mu"), k("rho"), rng, noise=k("noise"))
    if p == "barrier_quadratic":
        return generate_barrier_quadratic(k("n"), k("mu"), rng, sigma=k("sigma"), rho=k("rho"))
    if p == "birkhoff":
        return generate_birkhoff(k("m"), k("p"), k("distribution"), rng, mu=k("mu"))
    return generate_quadratic(k("n"), rng)


def problem_from_instance(name, inst) -> Problem:
    if name == "portfolio":
        obj, X = portfolio_objective(inst), ProbabilitySimplex(inst.R.shape[1])
    elif name == "kl":
        obj, X = kl_objective(inst), UnitSimplex(inst.W.shape[1], inst.R)
    elif name == "logistic":
        obj, X = logistic_objective(inst), L1Ball(inst.A.shape[1], inst.rho)
    elif name == "barrier_quadratic":
        obj, X = barrier_quadratic_objective(inst), L1Ball(inst.b.size, inst.rho)
    elif name == "birkhoff":
        obj, X = birkhoff_objective(inst), Birkhoff(inst.m)
    elif name == "quadratic":
        obj, X = quadratic_objective(inst), ProbabilitySimplex(inst.c.size)
    else:
        raise ValueError(f"unknown problem {name!r}")
    v0 = X.default_start()
    if obj.in_domain(v0.dense()):
        return Problem(name, inst, obj, X, v0, v0)
    # vertices sit on the boundary of dom f: start from the barycenter instead
    S = ActiveSet(*zip(*X.barycenter()))
    if not obj.in_domain(S.x):
        raise ValueError(f"{name}: no in-domain starting point")
    return Problem(name, inst, obj, X, S.x.copy(), S)


def build_problem(cfg: ExperimentConfig) -> Problem:
    """Instance from ``cfg.instance`` if given, else generated from the config seed."""
    if cfg.instance is not None:
        name, inst, _ = read_instance(cfg.instance)
        if name != cfg.problem:
            raise ConfigError(f"instance file holds a {name!r} problem, config says {cfg.problem!r}")
        return problem_from_instance(name, inst)
    try:
        inst = _make_instance(cfg, np.random.default_rng(root_seed(cfg)))
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return problem_from_instance(cfg.problem, inst)


def root_seed(cfg):
    # one seed sequence per experiment; the instance draws from the root, audits from spawned children
    return np.random.SeedSequence(cfg.seed)


def fresh_start(problem: Problem, alg: str):
    """Starting point for ``alg``; active sets are copied so runs do not share state."""
    if alg == "BAFW":
        s = problem.active_start
        if isinstance(s, ActiveSet):
            return ActiveSet(list(s.vertices), list(s.weights))
        return s
    return problem.start


def run_algorithm(problem: Problem, alg: str, stop: StopCriteria, backtrack=None, **kw) -> RunTrace:
    fn = ALGORITHMS[alg]
    x0 = fresh_start(problem, alg)
    if alg in BACKTRACKING:
        return fn(problem.objective, problem.feasible, x0, cfg=backtrack, stop=stop, **kw)
    return fn(problem.objective, problem.feasible, x0, stop=stop, **kw)


# --------------------------------------------------------------------------
# reference optimum


class RefMethod(enum.Enum):
    LongRun = "LongRun"
    Analytic = "Analytic"


@dataclass
class ReferenceOptimum:
    f_star_est: float
    method: RefMethod
    run_budget: int
    trace: RunTrace | None = field(default=None, repr=False)


def project_simplex(c):
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(c)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, c.size + 1)
    r = k[u - css / k > 0][-1]
    return np.maximum(c - css[r - 1] / r, 0.0)


def estimate_f_star(cfg: ExperimentConfig, problem: Problem | None = None, method="auto") -> ReferenceOptimum:
    """Best value of a long, tight-tolerance away-step run (no extrapolation).

    The run is ``reference_factor`` times the experiment's budget and also ends
    once the objective has not decreased for ``REFERENCE_STALL_ITERS``
    iterations, which is where float64 round-off stops further progress.
    """
    problem = problem or build_problem(cfg)
    if method == "auto":
        method = "analytic" if problem.name == "quadratic" else "longrun"
    if method == "analytic":
        if problem.name != "quadratic":
            raise ValueError("analytic reference only exists for the quadratic problem")
        c = np.asarray(problem.inst.c)
        x = project_simplex(c)
        return ReferenceOptimum(float(0.5 * np.sum((x - c) ** 2)), RefMethod.Analytic, 0)
    budget = DEFAULT_REFERENCE_BUDGET if cfg.stop.max_iter is None else cfg.reference_factor * cfg.stop.max_iter
    tl = None if cfg.stop.time_limit is None else cfg.reference_factor * cfg.stop.time_limit
    stop = StopCriteria(max_iter=budget, fw_gap_tol=cfg.reference_gap_tol, time_limit=tl,
                        stall_iters=REFERENCE_STALL_ITERS)
    x0 = fresh_start(problem, "BAFW")
    tr = run_bafw(problem.objective, problem.feasible, x0, cfg=cfg.backtrack, stop=stop)
    return ReferenceOptimum(tr.best_f, RefMethod.LongRun, budget, tr)


# --------------------------------------------------------------------------
# traces on disk


def _num(v):
    return f"{v:.17g}"


def write_trace_csv(path, trace: RunTrace, f_ref: float, timing=True):
    """One row per record; ``time_s`` is ``nan`` when timing is off so reruns are byte-identical."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in trace.records:
            c = r.counters
            w.writerow([
                r.iter,
                _num(r.wall_time) if timing else "nan",
                _num(r.f_value),
                _num(r.f_value - f_ref),
                _num(r.fw_gap),
                _num(r.step_size),
                r.step_type.name,
                c.zoo, c.foo, c.lmo, c.dom,
            ])


def read_trace_csv(path):
    """Columns as a dict of arrays (``step_type`` stays a list of strings)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    missing = [c for c in CSV_COLUMNS if c not in rows[0]]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    out = {c: np.array([float(r[c]) for r in rows]) for c in CSV_COLUMNS if c != "step_type"}
    out["step_type"] = [r["step_type"] for r in rows]
    return out


# --------------------------------------------------------------------------
# experiment


@dataclass
class ExperimentResult:
    traces: dict
    reference: ReferenceOptimum
    files: list


def _check_writable(d: Path):
    try:
        d.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=d):
            pass
    except OSError as e:
        raise OSError(f"output directory {d} is not writable: {e.strerror}") from None


def _slopes(trace, f_ref, window):
    out = {}
    for name, gap in (("primal", Gap.Primal), ("fw_min", Gap.FWMin)):
        try:
            out[name] = fit_rate(trace, gap, window, f_ref=f_ref)[0]
        except ValueError:
            out[name] = None
    return out


def write_summary(path, cfg, ref, traces, slopes):
    lines = [
        f"problem {cfg.problem}  seed {cfg.seed}",
        f"reference f* = {ref.f_star_est:.17g} ({ref.method.value}, budget {ref.run_budget})",
        f"rate window t in [{cfg.rate_window[0]:g}, {cfg.rate_window[1]:g}]",
        "",
        f"{'algorithm':<14}{'status':<12}{'iters':>8}{'f_final':>24}{'primal_gap':>12}{'fw_gap':>12}"
        f"{'min_fw_gap':>12}{'zoo':>9}{'foo':>9}{'lmo':>9}{'dom':>9}{'slope_h':>9}{'slope_g':>9}",
    ]
    for alg, tr in traces.items():
        last = tr.records[-1] if tr.records else None
        f_last = last.f_value if last else tr.f_initial
        g_last = last.fw_gap if last else tr.fw_gap_initial
        g_min = min([g_last, tr.fw_gap_initial] + [r.fw_gap for r in tr.records])
        c = last.counters if last else tr.initial_counters
        s = slopes[alg]
        fmt = lambda v: f"{v:9.3f}" if v is not None else f"{'n/a':>9}"  # noqa: E731
        lines.append(
            f"{alg:<14}{tr.terminal_status.value:<12}{len(tr.records):>8}{f_last:>24.16g}"
            f"{f_last - ref.f_star_est:>12.3e}{g_last:>12.3e}{g_min:>12.3e}"
            f"{c.zoo:>9}{c.foo:>9}{c.lmo:>9}{c.dom:>9}{fmt(s['primal'])}{fmt(s['fw_min'])}"
        )
    beat = [a for a, tr in traces.items() if tr.best_f < ref.f_star_est]
    if beat:
        lines += ["", "note: " + ", ".join(beat) + " went below the reference value (primal gaps < 0)"]
    Path(path).write_text("\n".join(lines) + "\n")


def run_experiment(cfg: ExperimentConfig, log=None) -> ExperimentResult:
    from .plots import plot_convergence

    say = log or (lambda *_: None)
    out = Path(cfg.output_dir)
    _check_writable(out)
    started = time.time()
    problem = build_problem(cfg)
    say(f"reference run for {problem.name} ...")
    t = time.perf_counter()
    ref = estimate_f_star(cfg, problem)
    ref_time = time.perf_counter() - t
    say(f"  f* = {ref.f_star_est:.12g}")

    traces, run_times = {}, {}
    for alg in cfg.algorithms:
        say(f"running {alg} ...")
        t = time.perf_counter()
        traces[alg] = run_algorithm(problem, alg, cfg.stop, cfg.backtrack)
        run_times[alg] = time.perf_counter() - t

    files = []
    for alg, tr in traces.items():
        p = out / f"{alg}.csv"
        write_trace_csv(p, tr, ref.f_star_est, timing=cfg.timing)
        files.append(p)
    for axis in ("iter", "time"):
        p = out / f"gap_vs_{axis}.svg"
        plot_convergence(traces, ref.f_star_est, p, axis=axis, title=problem.name)
        files.append(p)
    slopes = {alg: _slopes(tr, ref.f_star_est, cfg.rate_window) for alg, tr in traces.items()}
    p = out / "summary.txt"
    write_summary(p, cfg, ref, traces, slopes)
    files.append(p)

    meta = {
        "started_unix": started,
        "reference_seconds": ref_time,
        "run_seconds": run_times,
        "final_wall_time": {a: (tr.records[-1].wall_time if tr.records else 0.0) for a, tr in traces.items()},
        "reference_iterations": len(ref.trace.records) if ref.trace else 0,
        "numba": _kernels.USE_NUMBA,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "host": platform.node(),
        "pid": os.getpid(),
    }
    p = out / "metadata.json"
    p.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    files.append(p)
    return ExperimentResult(traces, ref, files)


# --------------------------------------------------------------------------
# audits


@dataclass
class AuditReport:
    gradient_error: float
    lmo_violation: float
    points: int
    directions: int

    def ok(self, grad_tol=1e-5, lmo_tol=1e-10):
        return self.gradient_error <= grad_tol and self.lmo_violation <= lmo_tol


def in_domain_point(problem: Problem, rng, tries=60):
    """Random feasible point, pulled toward the start until it is inside ``dom f``."""
    x = problem.feasible.random_point(rng)
    anchor = dense(problem.start) if not isinstance(problem.start, np.ndarray) else problem.start
    for _ in range(tries):
        if problem.objective.in_domain(x):
            return x
        x = 0.5 * (x + anchor)
    raise RuntimeError("could not sample an in-domain point")


def lmo_certificate(feasible, rng, directions=20, points=50):
    """Worst ``<v, d> - <x, d>`` over sampled feasible ``x`` for LMO outputs ``v``; should be <= 0."""
    worst = -math.inf
    for _ in range(directions):
        d = rng.standard_normal(feasible.dim)
        v = feasible(d)
        vd = v.dot(d)
        for _ in range(points):
            x = feasible.random_point(rng)
            worst = max(worst, vd - float(x @ d))
    return worst


def audit(cfg: ExperimentConfig, points=20, directions=20) -> AuditReport:
    problem = build_problem(cfg)
    g_seq, l_seq = root_seed(cfg).spawn(2)
    rg, rl = np.random.default_rng(g_seq), np.random.default_rng(l_seq)
    err = max(fd_gradient_audit(problem.objective, in_domain_point(problem, rg)) for _ in range(points))
    viol = lmo_certificate(problem.feasible, rl, directions)
    return AuditReport(err, viol, points, directions)
