"""Per-unit Gibbs sampler for y = alpha + beta * d + u under Jeffreys priors.

Priors are flat on (alpha, beta) and on log(sigma). The sampler alternates

    sigma^2 | alpha, beta  ~  InvGamma(n/2, SSR/2)
    (alpha, beta) | sigma^2  ~  N(b_hat, sigma^2 (X'X)^-1)

with X the (1, d) design and b_hat the least-squares fit. For a 0/1
design, with n0 controls and n1 treated, the Cholesky factor of (X'X)^-1
is [[1/sqrt(n0), 0], [-1/sqrt(n0), 1/sqrt(n1)]], and

    SSR(alpha, beta) = SSR_min + n0 da^2 + n1 (da + db)^2

for the deviations (da, db) from b_hat.

Every unit draws from its own generator seeded with ``base_seed ^ unit_id``
(all gamma variates first, then all normal pairs), and the chain updates
are element-wise arithmetic, so a unit's result does not depend on which
other units share its batch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BatchFitError, DomainError, IdentifiabilityError
from .special import _interp_sorted

N_ITER = 11_000
BURN_IN = 1_000
SSR_FLOOR = 1e-12
QUANTILE_LEVELS = (0.05, 0.16, 0.5, 0.84, 0.95)
CHUNK = 200


@dataclass(frozen=True, eq=False)
class UnitData:
    unit_id: int
    y: np.ndarray
    d: np.ndarray
    true_beta: float | None = None

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        d = np.asarray(self.d, dtype=float)
        if y.ndim != 1 or y.shape != d.shape:
            raise DomainError(f"unit {self.unit_id}: y and d must be 1-D of equal length")
        if y.size < 3:
            raise DomainError(f"unit {self.unit_id}: need n >= 3 observations, got {y.size}")
        if not np.all((d == 0) | (d == 1)):
            raise DomainError(f"unit {self.unit_id}: d must be 0/1")
        if not np.all(np.isfinite(y)):
            raise DomainError(f"unit {self.unit_id}: non-finite response")
        if d.min() == d.max():
            raise IdentifiabilityError(f"unit {self.unit_id}: d has a single level, beta is unidentified")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "d", d)

    @property
    def n(self) -> int:
        return int(self.y.size)


@dataclass(frozen=True)
class PosteriorSummary:
    unit_id: int
    beta_median: float
    beta_robust_sd: float
    p_positive: float
    n_draws: int
    draw_quantiles: dict = field(default_factory=dict)
    seed: int = 0


def _least_squares(unit: UnitData):
    treated = unit.d == 1
    n1 = int(treated.sum())
    n0 = unit.n - n1
    m0 = float(unit.y[~treated].mean())
    m1 = float(unit.y[treated].mean())
    resid = unit.y - np.where(treated, m1, m0)
    return m0, m1 - m0, float(resid @ resid), n0, n1


def _run_chains(units, n_iter: int, burn_in: int, seeds):
    """Run one chain per unit; returns retained (alpha, beta) draws, shape (units, A)."""
    k = len(units)
    ls = [_least_squares(u) for u in units]
    a_hat = np.array([r[0] for r in ls])
    b_hat = np.array([r[1] for r in ls])
    ssr_min = np.array([r[2] for r in ls])
    n0 = np.array([r[3] for r in ls], dtype=float)
    n1 = np.array([r[4] for r in ls], dtype=float)
    inv_sqrt_n0 = 1.0 / np.sqrt(n0)
    inv_sqrt_n1 = 1.0 / np.sqrt(n1)

    gam = np.empty((k, n_iter))
    nrm = np.empty((k, n_iter, 2))
    for i, (u, s) in enumerate(zip(units, seeds)):
        rng = np.random.default_rng(s)
        gam[i] = rng.standard_gamma(0.5 * u.n, size=n_iter)
        nrm[i] = rng.standard_normal((n_iter, 2))

    kept = n_iter - burn_in
    alpha_out = np.empty((k, kept))
    beta_out = np.empty((k, kept))
    da = np.zeros(k)  # chain starts at the least-squares solution
    db = np.zeros(k)
    for t in range(n_iter):
        ssr = ssr_min + n0 * da * da + n1 * (da + db) * (da + db)
        sigma = np.sqrt(0.5 * np.maximum(ssr, SSR_FLOOR) / gam[:, t])
        z1 = nrm[:, t, 0]
        z2 = nrm[:, t, 1]
        da = sigma * (z1 * inv_sqrt_n0)
        db = sigma * (z2 * inv_sqrt_n1 - z1 * inv_sqrt_n0)
        if t >= burn_in:
            alpha_out[:, t - burn_in] = a_hat + da
            beta_out[:, t - burn_in] = b_hat + db
    return alpha_out, beta_out


def _check_iters(n_iter, burn_in):
    if not (0 <= burn_in < n_iter):
        raise DomainError(f"need n_iter > burn_in >= 0, got n_iter={n_iter}, burn_in={burn_in}")


def sample_posterior(data: UnitData, n_iter: int = N_ITER, burn_in: int = BURN_IN,
                     seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Retained (alpha, beta) draws for one unit."""
    _check_iters(n_iter, burn_in)
    a, b = _run_chains([data], n_iter, burn_in, [seed])
    return a[0], b[0]


def _summarize(unit_id: int, beta_draws: np.ndarray, seed: int) -> PosteriorSummary:
    s = np.sort(beta_draws)
    qs = _interp_sorted(s, np.array(QUANTILE_LEVELS))
    quantiles = {lvl: float(v) for lvl, v in zip(QUANTILE_LEVELS, qs)}
    s_r = 0.5 * (quantiles[0.84] - quantiles[0.16])
    return PosteriorSummary(
        unit_id=unit_id,
        beta_median=quantiles[0.5],
        beta_robust_sd=float(s_r),
        p_positive=float(np.count_nonzero(beta_draws > 0.0) / beta_draws.size),
        n_draws=int(beta_draws.size),
        draw_quantiles=quantiles,
        seed=int(seed),
    )


def gibbs_fit(data: UnitData, n_iter: int = N_ITER, burn_in: int = BURN_IN,
              seed: int = 0) -> PosteriorSummary:
    """Sample one unit's posterior and summarize the retained beta draws."""
    _, beta = sample_posterior(data, n_iter, burn_in, seed)
    return _summarize(data.unit_id, beta, seed)


def unit_seed(base_seed: int, unit_id: int) -> int:
    return int(base_seed) ^ int(unit_id)


def batch_fit(units, n_iter: int = N_ITER, burn_in: int = BURN_IN, base_seed: int = 0,
              *, draws_sink=None) -> list[PosteriorSummary]:
    """Fit every unit; unit ``j`` uses seed ``base_seed ^ j``.

    ``draws_sink(unit_id, beta_draws)``, when given, receives each unit's
    retained beta draws. Units whose summary fails are collected and
    reported in a ``BatchFitError`` after the others finish.
    """
    _check_iters(n_iter, burn_in)
    units = list(units)
    ids = [u.unit_id for u in units]
    if len(set(ids)) != len(ids):
        raise DomainError("unit ids must be distinct")

    results: list[PosteriorSummary] = []
    failures: dict = {}
    for start in range(0, len(units), CHUNK):
        chunk = units[start:start + CHUNK]
        seeds = [unit_seed(base_seed, u.unit_id) for u in chunk]
        _, beta = _run_chains(chunk, n_iter, burn_in, seeds)
        for u, s, row in zip(chunk, seeds, beta):
            try:
                summary = _summarize(u.unit_id, row, s)
                if not (summary.beta_robust_sd > 0 and math.isfinite(summary.beta_median)):
                    raise DomainError(f"unit {u.unit_id}: degenerate posterior draws")
            except (ArithmeticError, ValueError) as exc:
                failures[u.unit_id] = exc
                continue
            if draws_sink is not None:
                draws_sink(u.unit_id, row)
            results.append(summary)
    if failures:
        raise BatchFitError(failures, results)
    return results
