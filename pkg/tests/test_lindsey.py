import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tweedie_eb.errors import DomainError, FitError
from tweedie_eb.lindsey import (
    Histogram,
    LindseyFit,
    bin_scores,
    design_matrix,
    fit_lindsey,
    log_density_deriv,
    log_density_second_deriv,
)

from oracles import grid_refine_maximizer, normal_bin_counts


def exact_normal_hist(width=0.05, lo=-6.0, hi=6.0, total=10_000_000, scale=1.0):
    n = int(round((hi - lo) / width))
    edges = lo + width * np.arange(n + 1)
    counts = np.rint(normal_bin_counts(edges, total, scale=scale)).astype(int)
    return Histogram(bin_width=width, origin=lo, counts=counts)


@pytest.fixture(scope="module")
def normal_fit():
    return fit_lindsey(exact_normal_hist(), 2)


# binning ---------------------------------------------------------------

def test_bin_identical_points():
    h = bin_scores([0.1, 0.1, 0.1], 0.25)
    assert list(h.counts) == [3]
    assert h.total == 3
    assert h.origin == 0.0


def test_bin_hand_enumeration():
    h = bin_scores([-0.3, 0.1, 0.6], 0.25)
    assert h.origin == -0.5
    assert list(h.counts) == [1, 0, 1, 0, 1]
    np.testing.assert_allclose(h.midpoints, [-0.375, -0.125, 0.125, 0.375, 0.625])


def test_bin_normal_draws():
    z = np.random.default_rng(11).standard_normal(1000)
    h = bin_scores(z, 0.25)
    assert h.total == 1000
    # direct count oracle, one bin at a time
    for k, c in enumerate(h.counts):
        lo = h.origin + k * 0.25
        assert c == np.count_nonzero((z >= lo) & (z < lo + 0.25))
    mode_mid = h.midpoints[np.argmax(h.counts)]
    assert abs(mode_mid) <= 0.375


def test_bin_errors():
    with pytest.raises(DomainError):
        bin_scores([], 0.25)
    with pytest.raises(DomainError):
        bin_scores([0.0, np.nan], 0.25)
    with pytest.raises(DomainError):
        bin_scores([0.0, np.inf], 0.25)
    with pytest.raises(DomainError):
        bin_scores([0.0], 0.0)
    with pytest.raises(DomainError):
        bin_scores([0.0, 3.0], 0.25, limits=(-1.0, 2.0))


def test_bin_explicit_limits():
    h = bin_scores([-1.0, 0.0, 0.99, 2.0], 0.5, limits=(-1.0, 2.0))
    assert h.origin == -1.0
    assert list(h.counts) == [1, 0, 1, 1, 0, 1]


@settings(max_examples=100)
@given(st.lists(st.floats(min_value=-50, max_value=50), min_size=1, max_size=200),
       st.sampled_from([0.05, 0.1, 0.25, 1.0]))
def test_bin_every_score_lands_once(xs, w):
    h = bin_scores(xs, w)
    assert h.total == len(xs)
    assert h.origin <= min(xs)
    assert h.origin + h.n_bins * w > max(xs) - 1e-9


# fitting ---------------------------------------------------------------

def test_exact_normal_degree2(normal_fit):
    fit = normal_fit
    assert fit.converged
    assert len(fit.coefficients) == 3
    # quadratic coefficient on the raw abscissa is eta_2 / scale^2 = -1/2
    assert fit.coefficients[2] / fit.scale ** 2 == pytest.approx(-0.5, abs=1e-3)
    assert log_density_deriv(fit, 1.5) == pytest.approx(-1.5, abs=5e-3)
    assert log_density_second_deriv(fit, 0.3) == pytest.approx(-1.0, abs=2e-3)


def test_exact_normal_matches_grid_search(normal_fit):
    hist = exact_normal_hist()
    X, _, _ = design_matrix(hist, 2)
    y = hist.counts.astype(float)
    start = [np.log(y.mean()), 0.0, 0.0]
    ref = grid_refine_maximizer(X, y, start, width=4.0, tol=1e-10)
    np.testing.assert_allclose(normal_fit.coefficients, ref, atol=1e-6)


def test_uniform_histogram_is_flat():
    h = Histogram(bin_width=0.5, origin=0.0, counts=[40] * 12)
    fit = fit_lindsey(h, 1)
    assert fit.converged
    assert fit.coefficients[1] == pytest.approx(0.0, abs=1e-10)
    assert np.exp(fit.coefficients[0]) == pytest.approx(40.0, rel=1e-10)
    assert fit.deviance == pytest.approx(0.0, abs=1e-9)


def test_fitted_means_sum_to_total():
    z = np.random.default_rng(5).standard_normal(3000) * 1.3 + 0.4
    h = bin_scores(z, 0.25)
    for degree in (1, 2, 3, 5):
        fit = fit_lindsey(h, degree)
        assert fit.converged
        assert fit.fitted_means(h).sum() == pytest.approx(h.total, rel=1e-6)


def test_zero_bins_are_kept():
    h = Histogram(bin_width=1.0, origin=-4.0, counts=[0, 1, 8, 20, 21, 9, 2, 0])
    fit = fit_lindsey(h, 2)
    assert fit.converged
    assert h.n_bins == 8
    assert fit.fitted_means(h).shape == (8,)


def test_precondition_errors():
    h = Histogram(bin_width=1.0, origin=0.0, counts=[3, 5, 2])
    with pytest.raises(DomainError):
        fit_lindsey(h, 2)  # needs more than 3 bins
    with pytest.raises(DomainError):
        fit_lindsey(h, 0)
    with pytest.raises(FitError):
        fit_lindsey(Histogram(bin_width=1.0, origin=0.0, counts=[0, 0, 7, 0, 0]), 2)


def test_non_convergence_is_reported_not_raised():
    z = np.random.default_rng(1).standard_normal(500)
    fit = fit_lindsey(bin_scores(z, 0.25), 5, max_iter=2)
    assert not fit.converged
    assert fit.iterations == 2
    with pytest.raises(FitError):
        log_density_deriv(fit, 0.0)
    assert np.isfinite(log_density_deriv(fit, 0.0, allow_unconverged=True))


def test_lindsey_fit_validation():
    with pytest.raises(DomainError):
        LindseyFit(2, (0.0, 1.0), 0.0, 1.0, True, 1, 0.0)
    with pytest.raises(DomainError):
        LindseyFit(1, (0.0, 1.0), 0.0, 0.0, True, 1, 0.0)


# derivatives -----------------------------------------------------------

def test_degree2_derivative_is_affine():
    fit = LindseyFit(2, (1.0, 0.3, -0.8), 0.2, 1.5, True, 3, 0.0)
    z = np.linspace(-3, 3, 13)
    d = log_density_deriv(fit, z)
    slope = np.diff(d) / np.diff(z)
    np.testing.assert_allclose(slope, slope[0], atol=1e-12)
    assert slope[0] < 0


def test_stationary_point_at_center():
    fit = LindseyFit(3, (0.5, 0.0, -0.4, 0.1), 1.25, 0.7, True, 3, 0.0)
    assert log_density_deriv(fit, 1.25) == 0.0


def test_degree1_second_derivative_vanishes():
    fit = LindseyFit(1, (0.5, -0.2), 0.0, 2.0, True, 3, 0.0)
    assert log_density_second_deriv(fit, 0.7) == 0.0
    np.testing.assert_array_equal(log_density_second_deriv(fit, np.array([0.0, 3.0])), [0.0, 0.0])


def _fd_check(fit, rng):
    z = rng.uniform(-3, 3, size=100)
    h = 1e-5
    d1 = log_density_deriv(fit, z)
    fd1 = (fit.log_mean(z + h) - fit.log_mean(z - h)) / (2 * h)
    np.testing.assert_allclose(d1, fd1, atol=1e-6)
    d2 = log_density_second_deriv(fit, z)
    fd2 = (log_density_deriv(fit, z + h) - log_density_deriv(fit, z - h)) / (2 * h)
    np.testing.assert_allclose(d2, fd2, atol=1e-6)


def test_finite_difference_gradient_check():
    rng = np.random.default_rng(2)
    z = np.concatenate([rng.normal(0, 1, 900), rng.normal(3, 1, 100)])
    fit = fit_lindsey(bin_scores(z, 0.25), 5)
    _fd_check(fit, rng)
    fit2 = fit_lindsey(bin_scores(z, 0.25), 2)
    _fd_check(fit2, rng)


def test_second_derivative_fd_at_point(normal_fit):
    h = 1e-5
    fd = (log_density_deriv(normal_fit, 0.7 + h) - log_density_deriv(normal_fit, 0.7 - h)) / (2 * h)
    assert log_density_second_deriv(normal_fit, 0.7) == pytest.approx(fd, abs=1e-6)


def test_shift_invariance():
    rng = np.random.default_rng(8)
    z = rng.normal(0.0, 1.2, 2000)
    c = 1.37
    h0 = bin_scores(z, 0.25, limits=(-6.0, 6.0))
    h1 = bin_scores(z + c, 0.25, limits=(-6.0 + c, 6.0 + c))
    np.testing.assert_array_equal(h0.counts, h1.counts)
    f0, f1 = fit_lindsey(h0, 3), fit_lindsey(h1, 3)
    assert f1.center - f0.center == pytest.approx(c, abs=1e-12)
    pts = np.linspace(-2.5, 2.5, 11)
    np.testing.assert_allclose(log_density_deriv(f0, pts), log_density_deriv(f1, pts + c), atol=1e-8)
