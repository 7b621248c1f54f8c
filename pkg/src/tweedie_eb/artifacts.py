"""CSV readers and writers for every pipeline artifact.

Floats are written with 17 significant digits so that reading a file back
reproduces the exact doubles; reruns of a stage therefore give identical
bytes.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ConfigError, MissingArtifactError
from .gibbs import QUANTILE_LEVELS, PosteriorSummary, UnitData
from .lindsey import Histogram, LindseyFit
from .scores import ScoreRecord
from .tweedie import CorrectionResult

UNITS_HEADER = ["unit_id", "group", "true_beta", "obs", "d", "y"]
SUMMARY_HEADER = ["unit_id", "beta_median", "beta_robust_sd", "p_positive", "n_draws",
                  "q05", "q16", "q50", "q84", "q95", "seed"]
SCORE_HEADER = ["unit_id", "score", "source", "clamped"]
HISTOGRAM_HEADER = ["left_edge", "midpoint", "count", "fitted_mean"]
CORRECTION_HEADER = ["unit_id", "raw_score", "correction_term", "corrected_mean",
                     "corrected_sd", "variance_clamped"]
_QCOLS = dict(zip(QUANTILE_LEVELS, ["q05", "q16", "q50", "q84", "q95"]))


def fmt(x) -> str:
    return format(float(x), ".17g")


def _flag(b: bool) -> str:
    return "true" if b else "false"


def _parse_flag(text: str) -> bool:
    if text not in ("true", "false"):
        raise ValueError(f"expected true/false, got {text!r}")
    return text == "true"


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def read_rows(path, header=None) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise MissingArtifactError(path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if header is not None:
            missing = [h for h in header if h not in (reader.fieldnames or [])]
            if missing:
                raise ConfigError(f"{path}: missing column(s) {missing}")
        return list(reader)


# units ---------------------------------------------------------------------

def write_units(path, units) -> Path:
    rows = []
    for u in units:
        tb = "" if u.true_beta is None else fmt(u.true_beta)
        group = "" if u.true_beta is None else ("null" if u.true_beta == 0 else "nonnull")
        for i, (d, y) in enumerate(zip(u.d, u.y)):
            rows.append([u.unit_id, group, tb, i, int(d), fmt(y)])
    return write_rows(path, UNITS_HEADER, rows)


def read_units(path) -> list[UnitData]:
    """Long-format unit data; ``group`` and ``true_beta`` may be blank."""
    rows = read_rows(path, ["unit_id", "d", "y"])
    grouped: dict[int, list] = {}
    beta: dict[int, float | None] = {}
    for r in rows:
        uid = int(r["unit_id"])
        grouped.setdefault(uid, []).append((float(r["d"]), float(r["y"])))
        tb = (r.get("true_beta") or "").strip()
        beta[uid] = float(tb) if tb else None
    return [
        UnitData(uid, np.array([y for _, y in obs]), np.array([d for d, _ in obs]), beta[uid])
        for uid, obs in grouped.items()
    ]


def unit_groups(path) -> dict[int, str]:
    """unit_id -> 'null' / 'nonnull' / '' from a units file."""
    out = {}
    for r in read_rows(path, ["unit_id"]):
        out.setdefault(int(r["unit_id"]), (r.get("group") or "").strip())
    return out


# posterior summaries -------------------------------------------------------

def write_summaries(path, summaries) -> Path:
    rows = [
        [s.unit_id, fmt(s.beta_median), fmt(s.beta_robust_sd), fmt(s.p_positive), s.n_draws,
         *(fmt(s.draw_quantiles[q]) for q in QUANTILE_LEVELS), s.seed]
        for s in summaries
    ]
    return write_rows(path, SUMMARY_HEADER, rows)


def read_summaries(path) -> list[PosteriorSummary]:
    out = []
    for r in read_rows(path, SUMMARY_HEADER):
        out.append(PosteriorSummary(
            unit_id=int(r["unit_id"]),
            beta_median=float(r["beta_median"]),
            beta_robust_sd=float(r["beta_robust_sd"]),
            p_positive=float(r["p_positive"]),
            n_draws=int(r["n_draws"]),
            draw_quantiles={q: float(r[c]) for q, c in _QCOLS.items()},
            seed=int(r["seed"]),
        ))
    return out


def write_draws(path, draws) -> Path:
    return write_rows(path, ["beta"], ([fmt(b)] for b in draws))


# scores --------------------------------------------------------------------

def write_scores(path, records) -> Path:
    rows = [[r.unit_id, fmt(r.score), r.source.value, _flag(r.clamped)] for r in records]
    return write_rows(path, SCORE_HEADER, rows)


def read_scores(path) -> list[ScoreRecord]:
    return [
        ScoreRecord(int(r["unit_id"]), float(r["score"]), r["source"], _parse_flag(r["clamped"]))
        for r in read_rows(path, SCORE_HEADER)
    ]


# Lindsey fits --------------------------------------------------------------

def write_histogram(path, hist: Histogram, fit: LindseyFit | None = None) -> Path:
    mu = fit.fitted_means(hist) if fit is not None else np.full(hist.n_bins, np.nan)
    rows = [
        [fmt(e), fmt(m), int(c), fmt(f)]
        for e, m, c, f in zip(hist.left_edges, hist.midpoints, hist.counts, mu)
    ]
    return write_rows(path, HISTOGRAM_HEADER, rows)


def read_histogram(path) -> Histogram:
    rows = read_rows(path, HISTOGRAM_HEADER)
    if not rows:
        raise ConfigError(f"{path}: empty histogram")
    left0 = float(rows[0]["left_edge"])
    width = 2.0 * (float(rows[0]["midpoint"]) - left0)
    return Histogram(bin_width=width, origin=left0, counts=[int(r["count"]) for r in rows])


def fit_header(degree: int) -> list[str]:
    return ["degree", "center", "scale", "converged", "iterations", "deviance",
            *(f"eta_{j}" for j in range(degree + 1))]


def write_fit(path, fit: LindseyFit) -> Path:
    row = [fit.degree, fmt(fit.center), fmt(fit.scale), _flag(fit.converged), fit.iterations,
           fmt(fit.deviance), *(fmt(c) for c in fit.coefficients)]
    return write_rows(path, fit_header(fit.degree), [row])


def read_fit(path) -> LindseyFit:
    rows = read_rows(path, ["degree", "center", "scale", "converged", "iterations", "deviance"])
    if len(rows) != 1:
        raise ConfigError(f"{path}: expected exactly one fit row")
    r = rows[0]
    degree = int(r["degree"])
    return LindseyFit(
        degree=degree,
        coefficients=tuple(float(r[f"eta_{j}"]) for j in range(degree + 1)),
        center=float(r["center"]),
        scale=float(r["scale"]),
        converged=_parse_flag(r["converged"]),
        iterations=int(r["iterations"]),
        deviance=float(r["deviance"]),
    )


# corrections ---------------------------------------------------------------

def write_corrections(path, unit_ids, results) -> Path:
    rows = [
        [uid, fmt(c.raw_score), fmt(c.correction_term), fmt(c.corrected_mean),
         fmt(c.corrected_sd), _flag(c.variance_clamped)]
        for uid, c in zip(unit_ids, results)
    ]
    return write_rows(path, CORRECTION_HEADER, rows)


def read_corrections(path) -> tuple[list[int], list[CorrectionResult]]:
    ids, out = [], []
    for r in read_rows(path, CORRECTION_HEADER):
        ids.append(int(r["unit_id"]))
        out.append(CorrectionResult(
            float(r["raw_score"]), float(r["correction_term"]), float(r["corrected_mean"]),
            float(r["corrected_sd"]), _parse_flag(r["variance_clamped"]),
        ))
    return ids, out
