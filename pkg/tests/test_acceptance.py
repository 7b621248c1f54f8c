"""Exit criteria, run at full scale. One PASS/FAIL line per criterion is
printed in the terminal summary."""

import time

import numpy as np
import pytest
from scipy import stats

from tweedie_eb import artifacts
from tweedie_eb.config import build_config
from tweedie_eb.gibbs import UnitData, sample_posterior
from tweedie_eb.lindsey import bin_scores, design_matrix, fit_lindsey
from tweedie_eb.pipeline import run_pipeline
from tweedie_eb.special import ks_two_sample, std_normal_quantile
from tweedie_eb.tweedie import correct_batch

from oracles import flat_prior_beta_posterior, grid_refine_maximizer

SEED = 2017
CSV_NAMES = ["units.csv", "summaries.csv", "scores.csv",
             "histogram_d2.csv", "fit_d2.csv", "corrections_d2.csv",
             "histogram_d5.csv", "fit_d5.csv", "corrections_d5.csv"]


def full_config(out, **values):
    base = {"seed": str(SEED), "output_dir": str(out), "lindsey_degrees": "2,5"}
    base.update({k: str(v) for k, v in values.items()})
    return build_config(base)


@pytest.fixture(scope="session")
def null_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("null")
    cfg = full_config(out, null_count=1000, nonnull_count=0, histogram_width=0.05)
    report = run_pipeline(cfg)
    return cfg, report


@pytest.fixture(scope="session")
def sweep(tmp_path_factory):
    root = tmp_path_factory.mktemp("sweep")
    start = time.perf_counter()
    runs = {}
    for sid in range(1, 7):
        cfg = full_config(root / f"scenario{sid}", scenario=sid)
        runs[sid] = (cfg, run_pipeline(cfg))
    return runs, time.perf_counter() - start


def test_tail_anchor(criterion):
    z = std_normal_quantile(0.0001)
    criterion("tail anchor", abs(z - (-3.719)) <= 0.001, f"quantile(1e-4) = {z:.6f}")


def test_null_calibration(null_run, criterion):
    cfg, report = null_run
    recs = artifacts.read_scores(cfg.output_dir / "scores.csv")
    robust = np.array([r.score for r in recs if r.source.value == "robust_ratio"])
    inverse = np.array([r.score for r in recs if r.source.value == "prob_transform"])
    assert robust.size == inverse.size == 1000
    mean, sd = robust.mean(), robust.std(ddof=1)
    ks = ks_two_sample(robust, inverse)
    ok = abs(mean) < 0.1 and 0.9 <= sd <= 1.1 and ks < 0.08
    criterion("null calibration", ok, f"mean {mean:.4f} sd {sd:.4f} KS {ks:.4f}")


def test_pure_null_shrinkage(null_run, criterion):
    _, report = null_run
    d2 = report.degrees[2]
    ratio = d2.corrected_variance / d2.raw_variance
    criterion("pure-null shrinkage", ratio < 0.1, f"variance ratio {ratio:.5f}")


def test_conjugate_oracle(criterion):
    z = np.random.default_rng(SEED).normal(0.0, np.sqrt(2.0), 5000)
    fit = fit_lindsey(bin_scores(z, 0.25), 2)
    corrected = np.array([r.corrected_mean for r in correct_batch(z, fit)])
    slope = np.polyfit(z, corrected, 1)[0]
    criterion("conjugate oracle", fit.converged and abs(slope - 0.5) <= 0.05, f"slope {slope:.4f}")


def test_gibbs_correctness(criterion):
    rng = np.random.default_rng(SEED)
    d = np.r_[np.zeros(15), np.ones(15)]
    unit = UnitData(0, 0.5 * d + rng.standard_normal(30), d)
    _, beta = sample_posterior(unit, 11_000, 1_000, seed=SEED)
    post = flat_prior_beta_posterior(unit.y, unit.d)
    ks = stats.kstest(beta, post.cdf).statistic
    p_gap = abs(np.mean(beta > 0) - post.sf(0.0))
    criterion("Gibbs correctness", ks < 0.03 and p_gap <= 0.02, f"KS {ks:.4f} |dp| {p_gap:.4f}")


def test_irls_correctness(criterion):
    rng = np.random.default_rng(SEED)
    z = rng.normal(0.3, 1.2, 4000)
    z = z[np.abs(z) < 3.75][:2000]
    hist = bin_scores(z, 0.25, limits=(-3.75, 3.75))
    assert hist.n_bins == 30
    fit = fit_lindsey(hist, 2)
    X, _, _ = design_matrix(hist, 2)
    y = hist.counts.astype(float)
    ref = grid_refine_maximizer(X, y, [np.log(y.mean()), 0.0, 0.0], width=4.0, tol=1e-10)
    gap = float(np.max(np.abs(np.array(fit.coefficients) - ref)))
    criterion("IRLS correctness", fit.converged and gap <= 1e-6, f"max coefficient gap {gap:.2e}")


def test_scenario_separation(sweep, criterion):
    runs, _ = sweep
    cfg, report = runs[2]
    raw_null, cor_null = report.degrees[5].group_means["null"]
    raw_non, cor_non = report.degrees[5].group_means["nonnull"]
    gap = cor_non - cor_null
    fig = cfg.output_dir / "figures"
    emitted = all((fig / n).is_file() for n in
                  ["before_after_d5.svg", "before_after_d5.csv", "correction_d5.svg", "correction_curve_d5.csv"])
    ids, _ = artifacts.read_corrections(cfg.output_dir / "corrections_d5.csv")
    groups = artifacts.unit_groups(cfg.output_dir / "units.csv")
    n_non = sum(groups[i] == "nonnull" for i in ids)
    criterion("scenario separation", gap > 1.5 and emitted and n_non == 100,
              f"corrected mean gap {gap:.3f} (non-null {cor_non:.3f}, null {cor_null:.3f}); figures {emitted}")


def test_determinism(sweep, tmp_path, criterion):
    runs, _ = sweep
    cfg, _ = runs[2]
    again = full_config(tmp_path, scenario=2)
    run_pipeline(again)
    diff = [n for n in CSV_NAMES if (cfg.output_dir / n).read_bytes() != (tmp_path / n).read_bytes()]
    criterion("determinism", not diff, f"differing CSVs: {diff or 'none'}")


def test_full_sweep_runtime(sweep, criterion):
    runs, elapsed = sweep
    done = sorted(runs) == [1, 2, 3, 4, 5, 6] and all((c.output_dir / "report.txt").is_file() for c, _ in runs.values())
    criterion("Table-1 sweep under 30 min", done and elapsed < 1800, f"{elapsed:.1f} s for 6 scenarios")
