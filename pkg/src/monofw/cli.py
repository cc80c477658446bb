"""Command line: run, generate, audit, rates."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import PROBLEM_KEYS, PROBLEMS, ConfigError, load_config, parse_config
from .diagnostics import fit_rate_arrays

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


def _cmd_run(args):
    from .harness import run_experiment

    cfg = load_config(args.config)
    if args.output_dir:
        cfg.output_dir = Path(args.output_dir)
    log = None if args.quiet else (lambda m: print(m, file=sys.stderr))
    res = run_experiment(cfg, log=log)
    print((cfg.output_dir / "summary.txt").read_text(), end="")
    for p in res.files:
        print(f"wrote {p}", file=sys.stderr)
    return EXIT_OK


def _cmd_generate(args):
    from .harness import build_problem
    from .instance_io import write_instance

    lines = [f"problem = {args.problem}", f"seed = {args.seed}"]
    for kv in args.knob or []:
        lines.append(kv.replace("=", " = ", 1) if "=" in kv else kv)
    cfg = parse_config("\n".join(lines), source="<command line>")
    problem = build_problem(cfg)
    write_instance(args.output, problem.inst, seed=args.seed)
    print(f"wrote {args.output}", file=sys.stderr)
    return EXIT_OK


def _cmd_audit(args):
    from .harness import audit

    cfg = load_config(args.config)
    rep = audit(cfg, points=args.points)
    print(f"gradient audit: worst relative error {rep.gradient_error:.3e} over {rep.points} points (limit 1e-5)")
    print(f"lmo certificate: worst <v,d> - <x,d> = {rep.lmo_violation:.3e} over {rep.directions} directions"
          " (limit 1e-10)")
    ok = rep.ok()
    print("audit " + ("passed" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_RUNTIME


def _cmd_rates(args):
    from .harness import read_trace_csv

    try:
        a, b = (float(s) for s in args.window.split(":"))
    except ValueError:
        print(f"bad --window {args.window!r}, expected a:b", file=sys.stderr)
        return EXIT_CONFIG
    cols = read_trace_csv(args.trace)
    if args.gap == "primal":
        g = cols["primal_gap"]
    elif args.gap == "fw":
        g = cols["fw_gap"]
    else:
        g = np.minimum.accumulate(cols["fw_gap"])
    slope, intercept, r2 = fit_rate_arrays(cols["iter"], g, (a, b), semilog=args.semilog)
    print(f"slope {slope:.6f}  intercept {intercept:.6f}  r2 {r2:.6f}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="monofw", description="Monotone Frank-Wolfe experiments")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("run", help="run an experiment from a config file")
    p.add_argument("config")
    p.add_argument("-o", "--output-dir", default=None, help="override output_dir from the config")
    p.add_argument("-q", "--quiet", action="store_true")
    p.set_defaults(func=_cmd_run)

    knobs = ", ".join(f"{k}: {' '.join(v)}" for k, v in PROBLEM_KEYS.items())
    p = sub.add_parser("generate", help="write a problem instance file",
                       epilog=f"knobs per problem -- {knobs}")
    p.add_argument("problem", choices=PROBLEMS)
    p.add_argument("knob", nargs="*", help="problem knobs as key=value")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("audit", help="gradient finite-difference audit and LMO certificates")
    p.add_argument("config")
    p.add_argument("--points", type=int, default=20)
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("rates", help="fit a log-log slope to a trace CSV")
    p.add_argument("trace")
    p.add_argument("--window", required=True, help="iteration window a:b")
    p.add_argument("--gap", choices=("primal", "fw", "fwmin"), default="primal")
    p.add_argument("--semilog", action="store_true", help="fit log gap against t instead of log t")
    p.set_defaults(func=_cmd_rates)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # noqa: BLE001
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
