"""Exception hierarchy shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateSpreadError(DomainError):
    """A sample has no spread between its 16th and 84th percentiles."""


class IdentifiabilityError(DomainError):
    """The design cannot identify the treatment effect."""


class FitError(ArithmeticError):
    """Poisson regression broke down (singular normal equations, overflow)."""

    def __init__(self, message: str, iteration: int | None = None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class BatchFitError(RuntimeError):
    """Some units failed inside a batch; the rest completed."""

    def __init__(self, failures: dict, completed: list):
        ids = ", ".join(str(k) for k in sorted(failures))
        super().__init__(f"{len(failures)} unit(s) failed: {ids}")
        self.failures = failures
        self.completed = completed


class ConfigError(ValueError):
    """Malformed config file or unknown override key."""


class MissingArtifactError(FileNotFoundError):
    """A stage input file does not exist."""

    def __init__(self, path):
        super().__init__(f"missing input artifact: {path}")
        self.path = path


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
