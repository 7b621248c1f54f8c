"""Local empirical Bayes (Tweedie's formula) correction of selection bias,
driven by posterior scores from per-unit Bayesian linear models."""

from .errors import (
    BatchFitError,
    ConfigError,
    DegenerateSpreadError,
    DomainError,
    FitError,
    IdentifiabilityError,
    MissingArtifactError,
    StageError,
)
from .gibbs import PosteriorSummary, UnitData, batch_fit, gibbs_fit, sample_posterior
from .lindsey import (
    Histogram,
    LindseyFit,
    bin_scores,
    fit_lindsey,
    log_density_deriv,
    log_density_second_deriv,
)
from .scores import ScoreRecord, Source, posterior_score, prob_to_z, robust_sd, t_to_z
from .special import percentile, std_normal_cdf, std_normal_quantile, student_t_cdf
from .tweedie import CorrectionResult, correct, correct_batch

__version__ = "0.1.0"
