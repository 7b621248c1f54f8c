"""Marginal density estimation by Lindsey's method.

Scores are binned into a fixed-width histogram, and the bin counts are
treated as independent Poisson observations whose log-mean is a degree-J
polynomial in the (standardized) bin midpoint. The fitted polynomial is
the log marginal density up to an additive constant, so its derivatives
are exactly what Tweedie's formula needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import DomainError, FitError

DEFAULT_DEGREES = (2, 5)
TOLERANCE = 1e-8
MAX_ITER = 50


@dataclass(frozen=True, eq=False)
class Histogram:
    bin_width: float
    origin: float
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size == 0:
            raise DomainError("histogram needs at least one bin")
        if np.any(counts < 0):
            raise DomainError("histogram counts must be non-negative")
        if not self.bin_width > 0:
            raise DomainError(f"bin width must be positive, got {self.bin_width!r}")
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_bins(self) -> int:
        return int(self.counts.size)

    @property
    def left_edges(self) -> np.ndarray:
        return self.origin + np.arange(self.n_bins) * self.bin_width

    @property
    def midpoints(self) -> np.ndarray:
        return self.origin + (np.arange(self.n_bins) + 0.5) * self.bin_width


@dataclass(frozen=True)
class LindseyFit:
    """Polynomial log-mean on the abscissa ``(z - center) / scale``."""

    degree: int
    coefficients: tuple
    center: float
    scale: float
    converged: bool
    iterations: int
    deviance: float

    def __post_init__(self):
        if self.degree < 1:
            raise DomainError(f"degree must be >= 1, got {self.degree}")
        if len(self.coefficients) != self.degree + 1:
            raise DomainError("need degree + 1 coefficients")
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale!r}")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    def standardize(self, z):
        return (np.asarray(z, dtype=float) - self.center) / self.scale

    def log_mean(self, z):
        """Fitted log expected bin count at ``z``; log f(z) plus a constant."""
        return P.polyval(self.standardize(z), self.coefficients)

    def fitted_means(self, hist: Histogram) -> np.ndarray:
        return np.exp(self.log_mean(hist.midpoints))

    def density(self, z, hist: Histogram):
        """Fitted marginal density, normalized by the histogram's total and width."""
        return np.exp(self.log_mean(z)) / (hist.total * hist.bin_width)


def bin_scores(scores, bin_width: float, limits: tuple[float, float] | None = None) -> Histogram:
    """Bin ``scores`` into a fixed-width histogram.

    Without ``limits`` the origin is ``bin_width * floor(min / bin_width)``
    and bins are added until the maximum is covered. With explicit
    ``limits = (lo, hi)`` the origin is ``lo`` and every score must lie in
    ``[lo, hi]``.
    """
    z = np.asarray(scores, dtype=float).ravel()
    if z.size == 0:
        raise DomainError("cannot bin an empty score list")
    if not np.all(np.isfinite(z)):
        raise DomainError("scores must all be finite")
    if not (bin_width > 0 and math.isfinite(bin_width)):
        raise DomainError(f"bin width must be positive, got {bin_width!r}")

    if limits is None:
        origin = bin_width * math.floor(z.min() / bin_width)
        n_bins = int(math.floor((z.max() - origin) / bin_width)) + 1
    else:
        lo, hi = float(limits[0]), float(limits[1])
        if not hi > lo:
            raise DomainError(f"empty histogram range {limits!r}")
        outside = (z < lo) | (z > hi)
        if np.any(outside):
            raise DomainError(f"{int(outside.sum())} score(s) fall outside range {limits!r}")
        origin = lo
        n_bins = max(1, int(math.ceil((hi - lo) / bin_width)))

    idx = np.floor((z - origin) / bin_width).astype(np.int64)
    np.clip(idx, 0, n_bins - 1, out=idx)
    counts = np.bincount(idx, minlength=n_bins)
    return Histogram(bin_width=float(bin_width), origin=float(origin), counts=counts)


def poisson_loglik(counts, log_mu) -> float:
    """Poisson log-likelihood without the log(y!) term."""
    counts = np.asarray(counts, dtype=float)
    return float(np.sum(counts * log_mu - np.exp(log_mu)))


def poisson_deviance(counts, mu) -> float:
    y = np.asarray(counts, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        term = np.where(y > 0, y * np.log(y / mu), 0.0)
    return float(2.0 * np.sum(term - (y - mu)))


def design_matrix(hist: Histogram, degree: int) -> tuple[np.ndarray, float, float]:
    """Vandermonde basis of standardized midpoints, plus (center, scale)."""
    mids = hist.midpoints
    w = hist.counts.astype(float)
    total = w.sum()
    if total <= 0:
        raise DomainError("histogram is empty")
    center = float(np.dot(w, mids) / total)
    scale = float(math.sqrt(np.dot(w, (mids - center) ** 2) / total))
    if not scale > 0:
        raise FitError("all counts fall in a single bin; midpoint scale is zero", 0)
    x = (mids - center) / scale
    return np.vander(x, degree + 1, increasing=True), center, scale


def fit_lindsey(hist: Histogram, degree: int, *, tol: float = TOLERANCE,
                max_iter: int = MAX_ITER) -> LindseyFit:
    """Poisson regression of bin counts on a polynomial of order ``degree``.

    Newton/IRLS iterations from ``eta_0 = log(mean count + 0.1)``, other
    coefficients zero. A step that lowers the likelihood is halved until
    it does not. Convergence means the largest absolute coefficient
    update fell below ``tol``; if that has not happened after
    ``max_iter`` iterations the fit is returned with ``converged=False``.

    Raises
    ------
    FitError
        If the weighted normal equations are singular or the linear
        predictor overflows.
    """
    if degree < 1:
        raise DomainError(f"degree must be >= 1, got {degree}")
    if hist.n_bins <= degree + 1:
        raise DomainError(f"need more than {degree + 1} bins for degree {degree}, got {hist.n_bins}")
    if hist.total <= 0:
        raise DomainError("histogram is empty")

    X, center, scale = design_matrix(hist, degree)
    y = hist.counts.astype(float)
    eta = np.zeros(degree + 1)
    eta[0] = math.log(y.mean() + 0.1)

    lin = X @ eta
    ll = poisson_loglik(y, lin)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        mu = np.exp(lin)
        lhs = X.T @ (mu[:, None] * X)
        rhs = X.T @ (y - mu)
        try:
            step = np.linalg.solve(lhs, rhs)
        except np.linalg.LinAlgError as exc:
            raise FitError(f"singular weighted normal equations: {exc}", it) from exc
        if not np.all(np.isfinite(step)):
            raise FitError("non-finite IRLS step", it)

        for _ in range(60):
            trial = eta + step
            trial_lin = X @ trial
            with np.errstate(over="ignore"):
                trial_ll = poisson_loglik(y, trial_lin)
            if math.isfinite(trial_ll) and trial_ll >= ll - 1e-12 * abs(ll):
                break
            step = 0.5 * step
        else:
            raise FitError("step halving failed to improve the likelihood", it)

        eta, lin, ll = trial, trial_lin, trial_ll
        if np.max(np.abs(step)) < tol:
            converged = True
            break

    mu = np.exp(lin)
    return LindseyFit(
        degree=degree,
        coefficients=tuple(eta),
        center=center,
        scale=scale,
        converged=converged,
        iterations=it,
        deviance=max(0.0, poisson_deviance(y, mu)),
    )


def _check(fit: LindseyFit, allow_unconverged: bool):
    if not (fit.converged or allow_unconverged):
        raise FitError("Lindsey fit did not converge; pass allow_unconverged=True to use it anyway")


def log_density_deriv(fit: LindseyFit, z, *, allow_unconverged: bool = False):
    """d/dz of the fitted log density, by exact polynomial differentiation."""
    _check(fit, allow_unconverged)
    d1 = P.polyder(fit.coefficients)
    out = P.polyval(fit.standardize(z), d1) / fit.scale
    return float(out) if np.ndim(out) == 0 else out


def log_density_second_deriv(fit: LindseyFit, z, *, allow_unconverged: bool = False):
    _check(fit, allow_unconverged)
    d2 = P.polyder(fit.coefficients, 2)
    out = P.polyval(fit.standardize(z), d2) / fit.scale ** 2 if d2.size else np.zeros(np.shape(z))
    return float(out) if np.ndim(out) == 0 else out
