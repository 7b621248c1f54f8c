"""Scalar special functions and order statistics.

Standard normal CDF and quantile, the central Student-t CDF, linear
interpolation percentiles and a two-sample Kolmogorov-Smirnov distance.
Everything here is a pure function.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation, relative error ~1.15e-9 before refinement.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def std_normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / _SQRT2PI


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF, accurate to ~1e-16 absolute in both tails."""
    if not math.isfinite(x):
        raise DomainError(f"std_normal_cdf needs a finite argument, got {x!r}")
    return 0.5 * math.erfc(-x / _SQRT2)


def _acklam_lower(p: float) -> float:
    # valid for 0 < p <= 0.5
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def std_normal_quantile(p: float) -> float:
    """Inverse of the standard normal CDF on the open interval (0, 1).

    Acklam's rational approximation followed by one Newton step on the
    CDF. The upper half is obtained by reflection so that the Newton
    residual is always evaluated where ``erfc`` keeps full relative
    precision.

    Raises
    ------
    DomainError
        If ``p`` is not strictly between 0 and 1. Clamping of MCMC
        frequencies is the caller's job (see ``scores.prob_to_z``).
    """
    p = float(p)
    if not (0.0 < p < 1.0):
        raise DomainError(f"std_normal_quantile needs 0 < p < 1, got {p!r}")
    if p > 0.5:
        return -std_normal_quantile(1.0 - p)
    if p == 0.5:
        return 0.0
    x = _acklam_lower(p)
    err = 0.5 * math.erfc(-x / _SQRT2) - p
    return x - err / std_normal_pdf(x)


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 10_000):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def regularized_incomplete_beta(a: float, b: float, x: float, xc: float | None = None) -> float:
    """I_x(a, b). ``xc`` may carry an exact value of 1 - x."""
    if xc is None:
        xc = 1.0 - x
    if x <= 0.0:
        return 0.0
    if xc <= 0.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log(xc))
    if x < (a + 1.0) / (a + b + 2.0):
        return math.exp(log_front) * _betacf(a, b, x) / a
    return 1.0 - math.exp(log_front) * _betacf(b, a, xc) / b


def student_t_cdf(t: float, nu: float) -> float:
    """CDF of the central Student-t law with ``nu`` degrees of freedom."""
    if not math.isfinite(t):
        raise DomainError(f"student_t_cdf needs a finite t, got {t!r}")
    if not (nu > 0) or not math.isfinite(nu):
        raise DomainError(f"degrees of freedom must be positive, got {nu!r}")
    if t == 0.0:
        return 0.5
    t2 = t * t
    # tail mass 0.5 * I_x(nu/2, 1/2) with x = nu / (nu + t^2)
    x = nu / (nu + t2)
    xc = t2 / (nu + t2)
    tail = 0.5 * regularized_incomplete_beta(0.5 * nu, 0.5, x, xc)
    return 1.0 - tail if t > 0 else tail


def _interp_sorted(s: np.ndarray, q):
    """Linear-interpolation quantile along the last axis of sorted ``s``."""
    m = s.shape[-1]
    h = np.asarray(q, dtype=float) * (m - 1)
    lo = np.floor(h).astype(int)
    hi = np.minimum(lo + 1, m - 1)
    frac = h - lo
    return s[..., lo] + frac * (s[..., hi] - s[..., lo])


def percentile(samples, q):
    """Quantile of ``samples`` at probability ``q`` (scalar or array).

    With the ``m`` samples sorted ascending the position is
    ``h = q * (m - 1)`` and neighbouring order statistics are
    interpolated linearly.
    """
    s = np.sort(np.asarray(samples, dtype=float).ravel())
    if s.size == 0:
        raise DomainError("percentile of an empty sample")
    qa = np.asarray(q, dtype=float)
    if np.any(~((qa >= 0.0) & (qa <= 1.0))):
        raise DomainError(f"percentile needs q in [0, 1], got {q!r}")
    out = _interp_sorted(s, qa)
    return float(out) if np.ndim(out) == 0 else out


def ks_two_sample(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise DomainError("ks_two_sample needs two non-empty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))
