"""End-to-end simulation pipeline.

Each stage reads its inputs from ``output_dir`` and writes its outputs
there; nothing is passed in memory between stages, so any stage can be
rerun on its own from the persisted files:

    simulate  -> units.csv, config.txt
    fit       -> summaries.csv (and draws/ when dump_draws is set)
    score     -> scores.csv
    density   -> histogram_d{J}.csv, fit_d{J}.csv
    correct   -> corrections_d{J}.csv
    report    -> report.txt, figures/*.svg, figures/*.csv
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import artifacts, figures
from .config import PipelineConfig
from .errors import StageError
from .gibbs import batch_fit
from .lindsey import bin_scores, fit_lindsey, log_density_deriv
from .scenarios import generate
from .scores import ScoreRecord, Source, posterior_score, prob_to_z
from .special import ks_two_sample
from .tweedie import correct_batch

log = logging.getLogger(__name__)

STAGES = ("simulate", "fit", "score", "density", "correct", "report")
INCOMPLETE = "INCOMPLETE"
CURVE_STEP = 0.05


def _p(cfg: PipelineConfig, name: str) -> Path:
    return cfg.output_dir / name


def stage_simulate(cfg: PipelineConfig) -> list[Path]:
    units = generate(cfg.scenario)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    cfg_path = _p(cfg, "config.txt")
    cfg_path.write_text(cfg.to_text())
    return [artifacts.write_units(_p(cfg, "units.csv"), units), cfg_path]


def stage_fit(cfg: PipelineConfig) -> list[Path]:
    units = artifacts.read_units(_p(cfg, "units.csv"))
    written = []
    sink = None
    if cfg.dump_draws:
        def sink(unit_id, draws):
            written.append(artifacts.write_draws(_p(cfg, f"draws/unit_{unit_id}.csv"), draws))
    summaries = batch_fit(units, cfg.n_iter, cfg.burn_in, cfg.seed, draws_sink=sink)
    return [artifacts.write_summaries(_p(cfg, "summaries.csv"), summaries), *written]


def score_records(summaries) -> list[ScoreRecord]:
    """Robust-ratio records for all units, then probability-transform records."""
    robust = [
        ScoreRecord(s.unit_id, posterior_score(s.beta_median, s.beta_robust_sd), Source.ROBUST_RATIO)
        for s in summaries
    ]
    inverse = []
    for s in summaries:
        z, clamped = prob_to_z(s.p_positive, s.n_draws)
        inverse.append(ScoreRecord(s.unit_id, z, Source.PROB_TRANSFORM, clamped))
    return robust + inverse


def stage_score(cfg: PipelineConfig) -> list[Path]:
    summaries = artifacts.read_summaries(_p(cfg, "summaries.csv"))
    return [artifacts.write_scores(_p(cfg, "scores.csv"), score_records(summaries))]


def _scores_by_source(cfg: PipelineConfig, source: Source):
    recs = [r for r in artifacts.read_scores(_p(cfg, "scores.csv")) if r.source is source]
    return [r.unit_id for r in recs], np.array([r.score for r in recs])


def stage_density(cfg: PipelineConfig) -> list[Path]:
    _, z = _scores_by_source(cfg, Source.ROBUST_RATIO)
    hist = bin_scores(z, cfg.histogram_width)
    out = []
    for j in cfg.lindsey_degrees:
        fit = fit_lindsey(hist, j)
        if not fit.converged:
            log.warning("order-%d Poisson regression stopped after %d iterations without converging",
                        j, fit.iterations)
        out.append(artifacts.write_histogram(_p(cfg, f"histogram_d{j}.csv"), hist, fit))
        out.append(artifacts.write_fit(_p(cfg, f"fit_d{j}.csv"), fit))
    return out


def stage_correct(cfg: PipelineConfig) -> list[Path]:
    ids, z = _scores_by_source(cfg, Source.ROBUST_RATIO)
    out = []
    for j in cfg.lindsey_degrees:
        fit = artifacts.read_fit(_p(cfg, f"fit_d{j}.csv"))
        results = correct_batch(z, fit, cfg.sigma, allow_unconverged=True)
        out.append(artifacts.write_corrections(_p(cfg, f"corrections_d{j}.csv"), ids, results))
    return out


@dataclass
class DegreeReport:
    degree: int
    converged: bool
    iterations: int
    deviance: float
    fraction_clamped: float
    raw_variance: float
    corrected_variance: float
    group_means: dict = field(default_factory=dict)  # group -> (raw mean, corrected mean)


@dataclass
class PipelineReport:
    scenario_id: int
    n_units: int
    score_mean: float
    score_sd: float
    inverse_mean: float
    inverse_sd: float
    ks_sources: float
    fraction_prob_clamped: float
    degrees: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"scenario: {self.scenario_id}",
            f"units: {self.n_units}",
            f"robust-SD scores: mean {self.score_mean:.6f} sd {self.score_sd:.6f}",
            f"inverse-function scores: mean {self.inverse_mean:.6f} sd {self.inverse_sd:.6f}"
            f" (clamped {self.fraction_prob_clamped:.4f})",
            f"KS distance between score sources: {self.ks_sources:.6f}",
        ]
        for j, d in sorted(self.degrees.items()):
            lines.append("")
            lines.append(f"[order {j}] converged={str(d.converged).lower()} iterations={d.iterations}"
                         f" deviance={d.deviance:.6f}")
            lines.append(f"  variance raw {d.raw_variance:.6f} corrected {d.corrected_variance:.6f}"
                         f" ratio {d.corrected_variance / d.raw_variance:.6f}")
            lines.append(f"  fraction variance-clamped {d.fraction_clamped:.4f}")
            for g, (raw, cor) in sorted(d.group_means.items()):
                lines.append(f"  {g or 'all'}: mean raw {raw:.6f} corrected {cor:.6f}")
        return "\n".join(lines) + "\n"


def _group_means(ids, raw, corrected, groups: dict) -> dict:
    labels = np.array([groups.get(i, "") for i in ids])
    out = {}
    for g in sorted(set(labels)):
        m = labels == g
        out[g] = (float(raw[m].mean()), float(corrected[m].mean()))
    return out


def stage_report(cfg: PipelineConfig) -> PipelineReport:
    recs = artifacts.read_scores(_p(cfg, "scores.csv"))
    robust = np.array([r.score for r in recs if r.source is Source.ROBUST_RATIO])
    inverse = np.array([r.score for r in recs if r.source is Source.PROB_TRANSFORM])
    clamped = np.array([r.clamped for r in recs if r.source is Source.PROB_TRANSFORM])
    groups = artifacts.unit_groups(_p(cfg, "units.csv"))
    fig_dir = _p(cfg, "figures")

    report = PipelineReport(
        scenario_id=cfg.scenario.id,
        n_units=int(robust.size),
        score_mean=float(robust.mean()),
        score_sd=float(robust.std(ddof=1)) if robust.size > 1 else 0.0,
        inverse_mean=float(inverse.mean()),
        inverse_sd=float(inverse.std(ddof=1)) if inverse.size > 1 else 0.0,
        ks_sources=ks_two_sample(robust, inverse),
        fraction_prob_clamped=float(clamped.mean()),
    )
    produced = figures.source_histograms(fig_dir, robust, inverse, cfg.histogram_width)

    for j in cfg.lindsey_degrees:
        fit = artifacts.read_fit(_p(cfg, f"fit_d{j}.csv"))
        hist = artifacts.read_histogram(_p(cfg, f"histogram_d{j}.csv"))
        ids, results = artifacts.read_corrections(_p(cfg, f"corrections_d{j}.csv"))
        raw = np.array([c.raw_score for c in results])
        cor = np.array([c.corrected_mean for c in results])
        report.degrees[j] = DegreeReport(
            degree=j,
            converged=fit.converged,
            iterations=fit.iterations,
            deviance=fit.deviance,
            fraction_clamped=float(np.mean([c.variance_clamped for c in results])),
            raw_variance=float(raw.var(ddof=1)),
            corrected_variance=float(cor.var(ddof=1)),
            group_means=_group_means(ids, raw, cor, groups),
        )
        lo = hist.origin
        hi = hist.origin + hist.n_bins * hist.bin_width
        grid = np.linspace(lo, hi, int(round((hi - lo) / CURVE_STEP)) + 1)
        term = cfg.sigma ** 2 * log_density_deriv(fit, grid, allow_unconverged=True)
        produced += figures.density_overlay(fig_dir, hist, fit)
        produced += figures.correction_curve(fig_dir, grid, term, j)
        produced += figures.before_after(fig_dir, raw, cor, cfg.histogram_width, j)

    report_path = _p(cfg, "report.txt")
    report_path.write_text(report.to_text())
    report.artifacts = [report_path, *produced]
    return report


STAGE_FUNCS = {
    "simulate": stage_simulate,
    "fit": stage_fit,
    "score": stage_score,
    "density": stage_density,
    "correct": stage_correct,
    "report": stage_report,
}


def run_stage(name: str, cfg: PipelineConfig):
    """Run one stage, attributing any numerical failure to it."""
    try:
        return STAGE_FUNCS[name](cfg)
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        raise StageError(name, exc) from exc


def run_pipeline(cfg: PipelineConfig) -> PipelineReport:
    """simulate -> fit -> score -> density -> correct -> report.

    On failure an ``INCOMPLETE`` file naming the failed stage is left in
    ``output_dir`` and the error is re-raised.
    """
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    marker = _p(cfg, INCOMPLETE)
    marker.unlink(missing_ok=True)
    produced: list[Path] = []
    for name in STAGES:
        log.info("stage %s", name)
        try:
            result = run_stage(name, cfg)
        except Exception as exc:
            marker.write_text(f"stage={name}\nerror={exc}\n")
            raise
        if name == "report":
            result.artifacts = produced + result.artifacts
            return result
        produced.extend(result)
    raise AssertionError("unreachable")
