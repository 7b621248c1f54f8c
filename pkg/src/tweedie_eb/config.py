"""Pipeline configuration and its ``key = value`` text format.

Blank lines and ``#`` comments are ignored. Unknown keys are an error.
``lindsey_degrees`` is a comma-separated list; ``effect_law`` is
``kind:params`` (``constant:3``, ``normal:1,1``, ``exponential:0.5``) and
defaults to the scenario's row of the design table.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DomainError, MissingArtifactError
from .gibbs import BURN_IN, N_ITER
from .lindsey import DEFAULT_DEGREES
from .scenarios import EffectLaw, Scenario

# key -> (default, help)
KEYS: dict[str, tuple[str, str]] = {
    "scenario": ("1", "design table row, 1-6"),
    "null_count": ("900", "units with beta = 0"),
    "nonnull_count": ("100", "units with beta drawn from the effect law"),
    "n_per_unit": ("30", "observations per unit"),
    "treated_per_unit": ("15", "observations with d = 1 per unit"),
    "effect_law": ("", "override the scenario's effect law (kind:params)"),
    "noise_sd": ("1.0", "SD of the observation noise"),
    "seed": ("2017", "single source of all randomness"),
    "n_iter": (str(N_ITER), "Gibbs iterations per unit"),
    "burn_in": (str(BURN_IN), "leading iterations discarded"),
    "histogram_width": ("0.25", "bin width for the score histogram"),
    "lindsey_degrees": (",".join(map(str, DEFAULT_DEGREES)), "Poisson regression orders"),
    "sigma": ("1.0", "noise scale of the scores in Tweedie's formula"),
    "output_dir": ("out", "artifact directory"),
    "dump_draws": ("false", "also write raw beta draws per unit"),
}


@dataclass(frozen=True)
class PipelineConfig:
    scenario: Scenario
    n_iter: int = N_ITER
    burn_in: int = BURN_IN
    histogram_width: float = 0.25
    lindsey_degrees: tuple = DEFAULT_DEGREES
    sigma: float = 1.0
    output_dir: Path = field(default=Path("out"))
    dump_draws: bool = False

    def __post_init__(self):
        if not self.lindsey_degrees or any(int(j) < 1 for j in self.lindsey_degrees):
            raise DomainError("lindsey_degrees must be non-empty with every degree >= 1")
        if not (0 <= self.burn_in < self.n_iter):
            raise DomainError("need n_iter > burn_in >= 0")
        if not self.histogram_width > 0:
            raise DomainError("histogram_width must be positive")
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        object.__setattr__(self, "lindsey_degrees", tuple(int(j) for j in self.lindsey_degrees))

    @property
    def seed(self) -> int:
        return self.scenario.seed

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in as_mapping(self).items())


def as_mapping(cfg: PipelineConfig) -> dict[str, str]:
    sc = cfg.scenario
    return {
        "scenario": str(sc.id),
        "null_count": str(sc.null_count),
        "nonnull_count": str(sc.nonnull_count),
        "n_per_unit": str(sc.n_per_unit),
        "treated_per_unit": str(sc.treated_per_unit),
        "effect_law": str(sc.effect_law),
        "noise_sd": repr(sc.noise_sd),
        "seed": str(sc.seed),
        "n_iter": str(cfg.n_iter),
        "burn_in": str(cfg.burn_in),
        "histogram_width": repr(cfg.histogram_width),
        "lindsey_degrees": ",".join(map(str, cfg.lindsey_degrees)),
        "sigma": repr(cfg.sigma),
        "output_dir": str(cfg.output_dir),
        "dump_draws": "true" if cfg.dump_draws else "false",
    }


def parse_pairs(text: str, source: str = "<config>") -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = value.strip()
    return out


def parse_overrides(items) -> dict[str, str]:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"override must be key=value, got {item!r}")
        if key not in KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        out[key] = value.strip()
    return out


def _bool(text: str) -> bool:
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def build_config(values: dict[str, str]) -> PipelineConfig:
    """Combine ``values`` with defaults into a validated config."""
    v = {k: d for k, (d, _) in KEYS.items()}
    v.update(values)
    try:
        law = EffectLaw.parse(v["effect_law"]) if v["effect_law"] else None
        scenario = Scenario(
            id=int(v["scenario"]),
            null_count=int(v["null_count"]),
            nonnull_count=int(v["nonnull_count"]),
            n_per_unit=int(v["n_per_unit"]),
            treated_per_unit=int(v["treated_per_unit"]),
            effect_law=law,
            noise_sd=float(v["noise_sd"]),
            seed=int(v["seed"]),
        )
        return PipelineConfig(
            scenario=scenario,
            n_iter=int(v["n_iter"]),
            burn_in=int(v["burn_in"]),
            histogram_width=float(v["histogram_width"]),
            lindsey_degrees=tuple(int(j) for j in v["lindsey_degrees"].split(",") if j.strip()),
            sigma=float(v["sigma"]),
            output_dir=Path(v["output_dir"]),
            dump_draws=_bool(v["dump_draws"]),
        )
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path=None, overrides=()) -> PipelineConfig:
    values: dict[str, str] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise MissingArtifactError(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values.update(parse_pairs(text, str(path)))
    values.update(parse_overrides(overrides))
    return build_config(values)


def describe_keys() -> str:
    width = max(map(len, KEYS))
    lines = ["config keys (default in brackets):"]
    for k, (default, text) in KEYS.items():
        shown = default if default else "from scenario"
        lines.append(f"  {k:<{width}}  [{shown}]  {text}")
    return "\n".join(lines)
