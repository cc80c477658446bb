"""Flat ``key = value`` experiment configuration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .algorithms import ALGORITHMS, StopCriteria
from .objectives import Distribution
from .stepsize import BacktrackConfig

PROBLEMS = ("portfolio", "kl", "logistic", "barrier_quadratic", "birkhoff", "quadratic")


class ConfigError(ValueError):
    def __init__(self, msg, line=None, source="<config>"):
        self.line = line
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + msg)


def _int(s):
    return int(s)


def _float(s):
    v = float(s)
    if math.isnan(v):
        raise ValueError("nan not allowed")
    return v


def _bool(s):
    s = s.lower()
    if s in ("on", "true", "yes", "1"):
        return True
    if s in ("off", "false", "no", "0"):
        return False
    raise ValueError(f"expected on/off, got {s!r}")


def _window(s):
    a, sep, b = s.partition(":")
    if not sep:
        raise ValueError("expected a:b")
    lo, hi = float(a), float(b)
    if not 0 < lo < hi:
        raise ValueError("need 0 < a < b")
    return lo, hi


def _algorithms(s):
    names = tuple(x.strip() for x in s.split(",") if x.strip())
    if not names:
        raise ValueError("empty algorithm list")
    for n in names:
        if n not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {n!r} (choose from {', '.join(ALGORITHMS)})")
    if len(set(names)) != len(names):
        raise ValueError("duplicate algorithm")
    return names


def _problem(s):
    if s not in PROBLEMS:
        raise ValueError(f"unknown problem {s!r} (choose from {', '.join(PROBLEMS)})")
    return s


def _dist(s):
    return Distribution.parse(s).value


def _optional_float(s):
    return None if s.lower() in ("none", "inf") else _float(s)


def _optional_int(s):
    return None if s.lower() == "none" else _int(s)


# key -> (parser, check or None); checks return an error string or None
_pos = lambda v: None if v > 0 else "must be positive"  # noqa: E731
_nonneg = lambda v: None if v >= 0 else "must be nonnegative"  # noqa: E731
_unit = lambda v: None if 0 <= v <= 1 else "must lie in [0, 1]"  # noqa: E731

GENERAL_KEYS = {
    "problem": (_problem, None),
    "seed": (_int, _nonneg),
    "algorithms": (_algorithms, None),
    "max_iter": (_optional_int, lambda v: None if v is None or v >= 0 else "must be nonnegative"),
    "fw_gap_tol": (_float, _nonneg),
    "time_limit": (_optional_float, lambda v: None if v is None or v > 0 else "must be positive"),
    "tau": (_float, lambda v: None if v > 1 else "must be > 1"),
    "eta": (_float, lambda v: None if 0 < v <= 1 else "must lie in (0, 1]"),
    "output_dir": (str, None),
    "timing": (_bool, None),
    "reference_factor": (_int, lambda v: None if v >= 1 else "must be >= 1"),
    "reference_gap_tol": (_float, _nonneg),
    "rate_window": (_window, None),
    "instance": (str, None),
}

# problem knobs and their defaults
PROBLEM_KEYS = {
    "portfolio": {"n": 100, "p": 200, "distribution": "lognormal"},
    "kl": {"N": 200, "d": 100, "sparsity": 0.3, "noise_frac": 0.1, "R": None},
    "logistic": {"N": 500, "n": 100, "mu": 0.1, "rho": 5.0, "noise": 0.1},
    "barrier_quadratic": {"n": 30, "mu": 1e-2, "sigma": 1.5, "rho": 1.0},
    "birkhoff": {"m": 10, "p": 100, "distribution": "lognormal", "mu": None},
    "quadratic": {"n": 50},
}

KNOB_PARSERS = {
    "n": (_int, _pos),
    "p": (_int, _pos),
    "N": (_int, _pos),
    "d": (_int, _pos),
    "m": (_int, _pos),
    "distribution": (_dist, None),
    "sparsity": (_float, _unit),
    "noise_frac": (_float, _nonneg),
    "noise": (_float, _nonneg),
    "R": (_optional_float, lambda v: None if v is None or v > 0 else "must be positive"),
    "mu": (_optional_float, lambda v: None if v is None or v >= 0 else "must be nonnegative"),
    "rho": (_float, _pos),
    "sigma": (_float, _pos),
}


@dataclass
class ExperimentConfig:
    problem: str
    seed: int = 0
    algorithms: tuple = ("MFW", "BAFW")
    stop: StopCriteria = field(default_factory=StopCriteria)
    backtrack: BacktrackConfig = field(default_factory=BacktrackConfig)
    output_dir: Path = Path("out")
    knobs: dict = field(default_factory=dict)
    timing: bool = False
    reference_factor: int = 10
    reference_gap_tol: float = 1e-13
    rate_window: tuple = (100.0, 10_000.0)
    instance: Path | None = None

    def knob(self, name):
        return self.knobs.get(name, PROBLEM_KEYS[self.problem][name])


def parse_config(text: str, source="<config>", base_dir=None) -> ExperimentConfig:
    """Parse the flat format; every error carries the offending line number."""
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, source)
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno, source)
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (first on line {seen[key][0]})", lineno, source)
        if key not in GENERAL_KEYS and key not in KNOB_PARSERS:
            raise ConfigError(f"unknown key {key!r}", lineno, source)
        parser, check = GENERAL_KEYS.get(key) or KNOB_PARSERS[key]
        try:
            v = parser(value)
        except ValueError as e:
            raise ConfigError(f"bad value for {key!r}: {e}", lineno, source) from None
        msg = check(v) if check else None
        if msg:
            raise ConfigError(f"{key} {msg}", lineno, source)
        seen[key] = (lineno, v)

    if "problem" not in seen:
        raise ConfigError("missing required key 'problem'", None, source)
    problem = seen["problem"][1]
    knobs = {}
    for key, (lineno, v) in seen.items():
        if key in KNOB_PARSERS:
            if key not in PROBLEM_KEYS[problem]:
                raise ConfigError(f"key {key!r} does not apply to problem {problem!r}", lineno, source)
            knobs[key] = v

    g = {k: v for k, (_, v) in seen.items() if k in GENERAL_KEYS}
    try:
        stop = StopCriteria(
            max_iter=g.get("max_iter", 10_000),
            fw_gap_tol=g.get("fw_gap_tol", 0.0),
            time_limit=g.get("time_limit"),
        )
    except ValueError as e:
        raise ConfigError(str(e), seen.get("max_iter", (None,))[0], source) from None
    bt = BacktrackConfig(tau=g.get("tau", 2.0), eta=g.get("eta", 0.9))
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    instance = g.get("instance")
    return ExperimentConfig(
        problem=problem,
        seed=g.get("seed", 0),
        algorithms=g.get("algorithms", ("MFW", "BAFW")),
        stop=stop,
        backtrack=bt,
        output_dir=base / g.get("output_dir", "out"),
        knobs=knobs,
        timing=g.get("timing", False),
        reference_factor=g.get("reference_factor", 10),
        reference_gap_tol=g.get("reference_gap_tol", 1e-13),
        rate_window=g.get("rate_window", (100.0, 10_000.0)),
        instance=base / instance if instance else None,
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror}", None, str(path)) from None
    return parse_config(text, source=str(path))
