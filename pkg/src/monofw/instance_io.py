"""Plain-text instance files.

Layout::

    <problem> <version> <dims> <seed>
    <field> <rows> <cols>
    <rows lines of cols numbers>
    ...

``dims`` is the problem's size tuple joined by ``x``. Scalars are stored as
1 x 1 blocks. Numbers are written with 17 significant digits so a round trip
is exact.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .objectives import (
    BarrierQuadraticInstance,
    BirkhoffInstance,
    KLInstance,
    LogisticInstance,
    PortfolioInstance,
    QuadraticInstance,
)

FORMAT_VERSION = 1

# problem -> (instance class, array fields, scalar fields)
LAYOUT = {
    "portfolio": (PortfolioInstance, ("R",), ()),
    "kl": (KLInstance, ("W", "y"), ("R",)),
    "logistic": (LogisticInstance, ("A", "y"), ("mu", "rho")),
    "barrier_quadratic": (BarrierQuadraticInstance, ("Q", "b"), ("mu", "rho")),
    "birkhoff": (BirkhoffInstance, ("R",), ("mu",)),
    "quadratic": (QuadraticInstance, ("c",), ()),
}


def problem_of(inst) -> str:
    for name, (cls, _, _) in LAYOUT.items():
        if type(inst) is cls:
            return name
    raise TypeError(f"no file layout for {type(inst).__name__}")


def _dims(problem, inst):
    if problem == "portfolio":
        return inst.R.shape
    if problem == "kl":
        return inst.W.shape
    if problem == "logistic":
        return inst.A.shape
    if problem == "barrier_quadratic":
        return (inst.b.size,)
    if problem == "birkhoff":
        return (inst.m, inst.R.shape[0])
    return (inst.c.size,)


def write_instance(path, inst, seed=0):
    problem = problem_of(inst)
    _, arrays, scalars = LAYOUT[problem]
    dims = "x".join(str(d) for d in _dims(problem, inst))
    lines = [f"{problem} {FORMAT_VERSION} {dims} {int(seed)}"]
    blocks = [(k, np.atleast_2d(getattr(inst, k))) for k in arrays]
    if problem == "kl" and inst.x0 is not None:
        blocks.append(("x0", np.atleast_2d(inst.x0)))
    blocks += [(k, np.array([[float(getattr(inst, k))]])) for k in scalars]
    for name, M in blocks:
        lines.append(f"{name} {M.shape[0]} {M.shape[1]}")
        lines.extend(" ".join(f"{v:.17g}" for v in row) for row in M)
    Path(path).write_text("\n".join(lines) + "\n")


def read_instance(path):
    """Returns ``(problem, instance, seed)``."""
    text = Path(path).read_text().split("\n")
    it = iter(enumerate(text, start=1))

    def next_line():
        for no, line in it:
            if line.strip():
                return no, line.split()
        return None, None

    no, head = next_line()
    if head is None or len(head) != 4:
        raise ValueError(f"{path}: bad header, expected 'problem version dims seed'")
    problem, ver, _, seed = head
    if problem not in LAYOUT:
        raise ValueError(f"{path}:{no}: unknown problem {problem!r}")
    if int(ver) != FORMAT_VERSION:
        raise ValueError(f"{path}:{no}: unsupported format version {ver}")
    fields = {}
    while True:
        no, tok = next_line()
        if tok is None:
            break
        if len(tok) != 3:
            raise ValueError(f"{path}:{no}: expected 'name rows cols'")
        name, r, c = tok[0], int(tok[1]), int(tok[2])
        rows = []
        for _ in range(r):
            rno, vals = next_line()
            if vals is None or len(vals) != c:
                raise ValueError(f"{path}:{rno}: block {name!r} expects {c} values per row")
            rows.append([float(v) for v in vals])
        fields[name] = np.array(rows).reshape(r, c)
    cls, arrays, scalars = LAYOUT[problem]
    kw = {}
    for k in arrays:
        if k not in fields:
            raise ValueError(f"{path}: missing block {k!r}")
        M = fields[k]
        kw[k] = M.ravel() if M.shape[0] == 1 and k in ("y", "b", "c") else M
    for k in scalars:
        if k not in fields:
            raise ValueError(f"{path}: missing block {k!r}")
        kw[k] = float(fields[k][0, 0])
    if "x0" in fields:
        kw["x0"] = fields["x0"].ravel()
    return problem, cls(**kw), int(seed)
