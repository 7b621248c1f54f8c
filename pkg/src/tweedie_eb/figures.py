"""Static SVG panels plus the CSV data behind each one."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .artifacts import fmt, write_rows  # noqa: E402
from .lindsey import Histogram, LindseyFit, bin_scores  # noqa: E402

plt.rcParams["svg.hashsalt"] = "tweedie-eb"
plt.rcParams["svg.fonttype"] = "none"

LIGHT = "#c8c8c8"
DARK = "#202020"


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return path


def common_grid(samples, width: float) -> tuple[float, int]:
    lo = min(float(np.min(s)) for s in samples)
    hi = max(float(np.max(s)) for s in samples)
    origin = width * math.floor(lo / width)
    n = int(math.floor((hi - origin) / width)) + 1
    return origin, n


def source_histograms(out_dir: Path, robust, inverse, width: float) -> list[Path]:
    """Robust-SD scores next to inverse-function scores."""
    origin, n = common_grid([robust, inverse], width)
    limits = (origin, origin + n * width)
    h_r = bin_scores(robust, width, limits)
    h_i = bin_scores(inverse, width, limits)
    rows = [[fmt(e), int(a), int(b)] for e, a, b in zip(h_r.left_edges, h_r.counts, h_i.counts)]
    csv_path = write_rows(out_dir / "scores_by_source.csv", ["left_edge", "robust_ratio", "prob_transform"], rows)

    fig, axes = plt.subplots(1, 2, figsize=(8, 3.5), sharey=True)
    for ax, h, title in ((axes[0], h_r, "score of robust SD"), (axes[1], h_i, "score of inverse function")):
        ax.bar(h.left_edges, h.counts, width=width, align="edge", color=LIGHT, edgecolor=DARK, linewidth=0.3)
        ax.set_title(title)
        ax.set_xlabel("z")
    axes[0].set_ylabel("count")
    return [csv_path, _save(fig, out_dir / "scores_by_source.svg")]


def density_overlay(out_dir: Path, hist: Histogram, fit: LindseyFit, n_grid: int = 400) -> list[Path]:
    """Score histogram with the fitted Poisson-regression curve (expected counts)."""
    lo, hi = hist.origin, hist.origin + hist.n_bins * hist.bin_width
    z = np.linspace(lo, hi, n_grid)
    expected = np.exp(fit.log_mean(z))
    j = fit.degree
    csv_path = write_rows(out_dir / f"density_curve_d{j}.csv", ["z", "expected_count"],
                          ([fmt(a), fmt(b)] for a, b in zip(z, expected)))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(hist.left_edges, hist.counts, width=hist.bin_width, align="edge",
           color=LIGHT, edgecolor=DARK, linewidth=0.3)
    ax.plot(z, expected, color=DARK, linewidth=1.2)
    ax.set_title(f"Poisson regression, order {j}")
    ax.set_xlabel("z")
    ax.set_ylabel("count")
    return [csv_path, _save(fig, out_dir / f"density_d{j}.svg")]


def correction_curve(out_dir: Path, z, term, degree: int) -> list[Path]:
    csv_path = write_rows(out_dir / f"correction_curve_d{degree}.csv", ["z", "correction_term"],
                          ([fmt(a), fmt(b)] for a, b in zip(z, term)))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.axhline(0.0, color=LIGHT, linewidth=0.8)
    ax.plot(z, term, color=DARK, linewidth=1.2)
    ax.set_title(f"Modification term, order {degree}")
    ax.set_xlabel("z")
    ax.set_ylabel("correction")
    return [csv_path, _save(fig, out_dir / f"correction_d{degree}.svg")]


def before_after(out_dir: Path, raw, corrected, width: float, degree: int) -> list[Path]:
    origin, n = common_grid([raw, corrected], width)
    limits = (origin, origin + n * width)
    h_raw = bin_scores(raw, width, limits)
    h_cor = bin_scores(corrected, width, limits)
    rows = [[fmt(e), int(a), int(b)] for e, a, b in zip(h_raw.left_edges, h_raw.counts, h_cor.counts)]
    csv_path = write_rows(out_dir / f"before_after_d{degree}.csv", ["left_edge", "raw", "corrected"], rows)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(h_raw.left_edges, h_raw.counts, width=width, align="edge", color=LIGHT, label="before")
    ax.bar(h_cor.left_edges, h_cor.counts, width=width * 0.5, align="edge", color=DARK, label="after")
    ax.set_title(f"Before and after correction, order {degree}")
    ax.set_xlabel("z")
    ax.set_ylabel("count")
    ax.legend(frameon=False)
    return [csv_path, _save(fig, out_dir / f"before_after_d{degree}.svg")]
