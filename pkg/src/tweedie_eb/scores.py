"""Transforms that put heterogeneous evidence on the standard normal scale."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpreadError, DomainError
from .special import percentile, std_normal_quantile, student_t_cdf


class Source(str, enum.Enum):
    T_TRANSFORM = "t_transform"
    PROB_TRANSFORM = "prob_transform"
    ROBUST_RATIO = "robust_ratio"


@dataclass(frozen=True)
class ScoreRecord:
    unit_id: int
    score: float
    source: Source
    clamped: bool = False

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise DomainError(f"unit {self.unit_id}: score is not finite")
        object.__setattr__(self, "source", Source(self.source))
        if self.clamped and self.source is not Source.PROB_TRANSFORM:
            raise DomainError("only probability-transformed scores can be clamped")


def t_to_z(t: float, nu: float) -> float:
    """Map a t statistic to the normal quantile of its own CDF value."""
    if t > 0:
        # evaluate the lower tail, where the CDF keeps relative precision
        return -std_normal_quantile(student_t_cdf(-t, nu))
    return std_normal_quantile(student_t_cdf(t, nu))


def prob_to_z(p: float, n_draws: int) -> tuple[float, bool]:
    """z score of an MCMC tail frequency estimated from ``n_draws`` draws.

    Frequencies of exactly 0 or 1 would map to infinite scores, so ``p`` is
    first clamped to ``[1/(2A), 1 - 1/(2A)]``, half the MCMC resolution.
    Returns the score and whether the clamp changed ``p``.
    """
    if n_draws < 1:
        raise DomainError(f"number of draws must be positive, got {n_draws}")
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"probability must be in [0, 1], got {p!r}")
    floor = 0.5 / n_draws
    clamped_p = min(max(p, floor), 1.0 - floor)
    return std_normal_quantile(clamped_p), clamped_p != p


def robust_sd(draws) -> float:
    """Half the distance between the 16th and 84th percentiles."""
    x = np.asarray(draws, dtype=float)
    if x.size < 2:
        raise DomainError("robust_sd needs at least two values")
    q16, q84 = percentile(x, [0.16, 0.84])
    s = 0.5 * (q84 - q16)
    if not s > 0:
        raise DegenerateSpreadError("no spread between the 16th and 84th percentiles")
    return float(s)


def posterior_score(median: float, s_r: float) -> float:
    """Posterior median over robust SD."""
    if not s_r > 0:
        raise DomainError(f"robust SD must be positive, got {s_r!r}")
    return median / s_r
