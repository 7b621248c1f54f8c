"""Tweedie's formula with an estimated marginal.

For z ~ N(mu, sigma^2) and any prior on mu,

    E(mu | z)   = z + sigma^2 l'(z)
    Var(mu | z) = sigma^2 (1 + sigma^2 l''(z))

where l = log f is the log marginal density of z, here supplied by a
Lindsey fit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .lindsey import LindseyFit, log_density_deriv, log_density_second_deriv


@dataclass(frozen=True)
class CorrectionResult:
    raw_score: float
    correction_term: float
    corrected_mean: float
    corrected_sd: float
    variance_clamped: bool


def _check_sigma(sigma):
    if not (sigma > 0 and math.isfinite(sigma)):
        raise DomainError(f"sigma must be positive and finite, got {sigma!r}")


def correct(z: float, fit: LindseyFit, sigma: float = 1.0, *,
            allow_unconverged: bool = False) -> CorrectionResult:
    """Empirical Bayes posterior mean and SD of the location behind ``z``.

    A negative posterior variance (curvature below -1/sigma^2, usually a
    sparse tail) is clamped to zero and flagged.
    """
    if not math.isfinite(z):
        raise DomainError(f"score must be finite, got {z!r}")
    _check_sigma(sigma)
    s2 = sigma * sigma
    term = s2 * log_density_deriv(fit, z, allow_unconverged=allow_unconverged)
    var = s2 * (1.0 + s2 * log_density_second_deriv(fit, z, allow_unconverged=allow_unconverged))
    return CorrectionResult(
        raw_score=float(z),
        correction_term=float(term),
        corrected_mean=float(z + term),
        corrected_sd=math.sqrt(max(0.0, var)),
        variance_clamped=bool(var < 0.0),
    )


def correct_batch(scores, fit: LindseyFit, sigma: float = 1.0, *,
                  allow_unconverged: bool = False) -> list[CorrectionResult]:
    """``correct`` applied element-wise; output order is input order."""
    z = np.asarray(scores, dtype=float).ravel()
    if z.size == 0:
        return []
    bad = np.flatnonzero(~np.isfinite(z))
    if bad.size:
        raise DomainError(f"score[{bad[0]}] is not finite ({z[bad[0]]!r})")
    _check_sigma(sigma)
    s2 = sigma * sigma
    term = s2 * np.asarray(log_density_deriv(fit, z, allow_unconverged=allow_unconverged))
    var = s2 * (1.0 + s2 * np.asarray(log_density_second_deriv(fit, z, allow_unconverged=allow_unconverged)))
    mean = z + term
    sd = np.sqrt(np.maximum(var, 0.0))
    return [
        CorrectionResult(float(z[i]), float(term[i]), float(mean[i]), float(sd[i]), bool(var[i] < 0.0))
        for i in range(z.size)
    ]
