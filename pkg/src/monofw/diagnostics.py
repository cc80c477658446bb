"""Self-concordance quantities, the contraction envelope, rate fits and gradient audits."""

from __future__ import annotations

import enum
import math
import warnings

import numpy as np

from .core import GscParams

SERIES_RADIUS = 1e-3
_SERIES_TERMS = 12


def _omega_series(nu, tau):
    # Taylor expansion of omega_nu around 0; omega_nu(0) = 1/2.
    if nu == 2:
        # sum_{k>=2} tau^{k-2} / k!
        coeffs = [1.0 / math.factorial(k) for k in range(2, 2 + _SERIES_TERMS)]
    elif nu == 3:
        coeffs = [1.0 / k for k in range(2, 2 + _SERIES_TERMS)]
    elif nu == 4:
        coeffs = [1.0 / (k * (k - 1)) for k in range(2, 2 + _SERIES_TERMS)]
    else:
        # (1-tau)^p expansion, p = 2(3-nu)/(2-nu)
        p = 2.0 * (3.0 - nu) / (2.0 - nu)
        scale = -(nu - 2.0) / ((4.0 - nu) * p)
        binom = p * (p - 1.0) / 2.0
        coeffs = []
        for k in range(2, 2 + _SERIES_TERMS):
            coeffs.append(scale * binom * (-1.0) ** k)
            binom *= (p - k) / (k + 1.0)
    return sum(c * tau**i for i, c in enumerate(coeffs))


def omega_nu(nu: float, tau: float) -> float:
    nu, tau = float(nu), float(tau)
    if nu < 2:
        raise ValueError("nu must be >= 2")
    if nu > 2 and tau >= 1:
        raise ValueError(f"omega_nu is only defined for tau < 1 when nu > 2 (tau={tau})")
    if tau == 0.0:
        return 0.5
    if abs(tau) < SERIES_RADIUS:
        return _omega_series(nu, tau)
    if nu == 2:
        return (math.expm1(tau) - tau) / tau**2
    if nu == 3:
        return (-tau - math.log1p(-tau)) / tau**2
    if nu == 4:
        return ((1 - tau) * math.log1p(-tau) + tau) / tau**2
    p = 2.0 * (3.0 - nu) / (2.0 - nu)
    e = p * math.log1p(-tau)
    if e > 700.0:
        # nu just above 2 and tau > 0: the value is beyond float range
        return math.inf
    pw = math.expm1(e)  # (1-tau)^p - 1
    inner = (nu - 2.0) / (2.0 * (3.0 - nu) * tau) * pw - 1.0
    return (nu - 2.0) / (4.0 - nu) / tau * inner


def d_nu(p: GscParams, obj, x, y) -> float:
    x = np.asarray(x, dtype=float)
    d = np.asarray(y, dtype=float) - x
    nd = float(np.linalg.norm(d))
    if nd == 0:
        return 0.0
    if p.nu == 2:
        return p.M * nd
    q = float(np.dot(d, obj.hessian_vec(x, d)))
    if q < 0:
        warnings.warn(f"negative Hessian quadratic form {q:.3e}, clamped to 0", RuntimeWarning)
        q = 0.0
    return (p.nu / 2.0 - 1.0) * p.M * nd ** (3.0 - p.nu) * math.sqrt(q) ** (p.nu - 2.0)


def burn_in_T(p: GscParams, D: float, L: float = 1.0) -> int:
    if p.nu == 2:
        T = math.ceil(4.0 * p.M * D) - 2
    else:
        T = math.ceil(2.0 * p.M * D * L ** (p.nu / 2.0 - 1.0) * (p.nu - 2.0)) - 2
    return max(int(T), 0)


def envelope_t0(c0, c1, c2, alpha, rule="safe") -> int:
    """Switch point between the geometric and the sublinear phase.

    ``rule="floor"`` uses ``max(1, floor(log_{1-c1}(H / c0)))`` with
    ``H = (c1/c2)^{1/alpha}``. That value can end the geometric phase while the
    sequence is still above ``H``, which breaks the bound at ``t0 + 1``;
    ``rule="safe"`` uses ``max(1, ceil(.) + 1)``, which guarantees
    ``h_{t0} <= H``.
    """
    H = (c1 / c2) ** (1.0 / alpha)
    L = math.log(H / c0) / math.log1p(-c1)
    if rule == "floor":
        return max(1, math.floor(L))
    if rule == "safe":
        return max(1, math.ceil(L) + 1)
    raise ValueError(f"unknown rule {rule!r}")


def contraction_envelope(c0, c1, c2, alpha, t, rule="safe") -> float:
    """Upper bound on ``h_t`` when ``h_1 <= c0`` and ``h_t - h_{t+1} >= h_t min(c1, c2 h_t^alpha)``."""
    if not (0 < c1 < 1 and c0 > 0 and c2 > 0 and alpha > 0):
        raise ValueError("need c0 > 0, 0 < c1 < 1, c2 > 0, alpha > 0")
    if t < 1:
        raise ValueError("t starts at 1")
    t0 = envelope_t0(c0, c1, c2, alpha, rule)
    if t <= t0:
        return c0 * (1.0 - c1) ** (t - 1)
    H = (c1 / c2) ** (1.0 / alpha)
    return H / (1.0 + c1 * alpha * (t - t0)) ** (1.0 / alpha)


class Gap(enum.Enum):
    Primal = "primal"
    FW = "fw"
    FWMin = "fwmin"  # running minimum of the FW gap


def gap_series(trace, gap=Gap.Primal, f_ref=None):
    """``(t, gap_t)`` arrays from a trace."""
    gap = Gap(gap) if not isinstance(gap, Gap) else gap
    t = trace.column("iter")
    if gap is Gap.Primal:
        if f_ref is None:
            raise ValueError("primal gap needs a reference optimum")
        return t, trace.column("f_value") - f_ref
    g = trace.column("fw_gap")
    if gap is Gap.FWMin:
        g = np.minimum.accumulate(g)
    return t, g


def fit_line(x, y, min_points=10):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.size < min_points:
        raise ValueError(f"need at least {min_points} points, have {x.size}")
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def fit_rate_arrays(t, gaps, window, semilog=False):
    """Least squares on ``(log t, log gap)`` (or ``(t, log gap)``) over ``t_lo <= t <= t_hi``."""
    t, gaps = np.asarray(t, dtype=float), np.asarray(gaps, dtype=float)
    lo, hi = window
    keep = (t >= lo) & (t <= hi) & (gaps > 0) & np.isfinite(gaps)
    x = t[keep] if semilog else np.log(t[keep])
    return fit_line(x, np.log(gaps[keep]))


def fit_rate(trace, gap=Gap.Primal, window=(1, np.inf), f_ref=None, semilog=False):
    """Returns ``(slope, intercept, r_squared)``; nonpositive gaps in the window are dropped."""
    t, g = gap_series(trace, gap, f_ref)
    return fit_rate_arrays(t, g, window, semilog)


def fd_gradient_audit(obj, x, h_scale=1e-6, threshold=1e-8, grad=None):
    """Worst componentwise relative error of the analytic gradient against central differences.

    The step is ``h_scale * (1 + ||x||)`` rounded to a power of two, and the
    quotient divides by the step actually realized in floating point.
    """
    x = np.asarray(x, dtype=float)
    g = obj.gradient(x) if grad is None else grad
    h0 = 2.0 ** round(math.log2(h_scale * (1.0 + np.linalg.norm(x))))
    worst = 0.0
    for i in range(x.size):
        if abs(g[i]) <= threshold:
            continue
        h = h0
        for _ in range(51):
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] -= h
            step = xp[i] - xm[i]
            if step > 0 and obj.in_domain(xp) and obj.in_domain(xm):
                break
            h /= 2
        else:
            step = 0.0
        if not step > 0:
            warnings.warn(f"coordinate {i}: probes never entered the domain, skipped", RuntimeWarning)
            continue
        fd = (obj.value(xp) - obj.value(xm)) / step
        worst = max(worst, abs(fd - g[i]) / abs(g[i]))
    return worst


def fd_hvp_error(obj, x, d, h=1e-6):
    """Relative error of ``hessian_vec`` against a central difference of the gradient."""
    x, d = np.asarray(x, dtype=float), np.asarray(d, dtype=float)
    hv = obj.hessian_vec(x, d)
    fd = (obj.gradient(x + h * d) - obj.gradient(x - h * d)) / (2 * h)
    return float(np.linalg.norm(fd - hv) / max(np.linalg.norm(hv), 1e-300))
