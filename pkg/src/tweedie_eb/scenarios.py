"""The six simulation designs and the data generator.

Every unit has n observations, the first ``n - treated`` with d = 0 and the
rest with d = 1, and y = beta_j * d + u with u ~ N(0, noise_sd^2). Null
units have beta_j = 0; non-null units draw beta_j from the scenario's
effect law.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .gibbs import UnitData

EFFECT_KINDS = ("constant", "normal", "exponential")


@dataclass(frozen=True)
class EffectLaw:
    kind: str
    params: tuple

    def __post_init__(self):
        if self.kind not in EFFECT_KINDS:
            raise DomainError(f"unknown effect law {self.kind!r}")
        want = {"constant": 1, "normal": 2, "exponential": 1}[self.kind]
        if len(self.params) != want:
            raise DomainError(f"{self.kind} law takes {want} parameter(s), got {self.params!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind == "normal" and self.params[1] < 0:
            raise DomainError("normal effect law needs sd >= 0")
        if self.kind == "exponential" and not self.params[0] > 0:
            raise DomainError("exponential effect law needs rate > 0")

    @classmethod
    def parse(cls, text: str) -> "EffectLaw":
        """Parse ``kind:p1[,p2]``, e.g. ``constant:3`` or ``normal:1,1``."""
        kind, _, rest = text.strip().partition(":")
        try:
            params = tuple(float(v) for v in rest.split(",")) if rest.strip() else ()
        except ValueError as exc:
            raise DomainError(f"bad effect law {text!r}") from exc
        return cls(kind.strip(), params)

    def __str__(self) -> str:
        return f"{self.kind}:" + ",".join(repr(p) for p in self.params)

    @property
    def mean(self) -> float:
        if self.kind == "exponential":
            return 1.0 / self.params[0]
        return self.params[0]

    @property
    def sd(self) -> float:
        return {"constant": 0.0, "normal": self.params[-1],
                "exponential": 1.0 / self.params[0]}[self.kind]

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(size, self.params[0])
        if self.kind == "normal":
            return rng.normal(self.params[0], self.params[1], size)
        return rng.exponential(1.0 / self.params[0], size)


# Table 1; exponential laws are given by rate, so rate 1/3 has mean 3.
TABLE1 = {
    1: EffectLaw("constant", (1.0,)),
    2: EffectLaw("constant", (3.0,)),
    3: EffectLaw("normal", (1.0, 1.0)),
    4: EffectLaw("normal", (3.0, 1.0)),
    5: EffectLaw("exponential", (1.0,)),
    6: EffectLaw("exponential", (1.0 / 3.0,)),
}


@dataclass(frozen=True)
class Scenario:
    id: int = 1
    null_count: int = 900
    nonnull_count: int = 100
    n_per_unit: int = 30
    treated_per_unit: int = 15
    effect_law: EffectLaw | None = None
    noise_sd: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.id not in TABLE1:
            raise DomainError(f"scenario id must be 1-6, got {self.id}")
        if self.effect_law is None:
            object.__setattr__(self, "effect_law", TABLE1[self.id])
        if self.null_count < 0 or self.nonnull_count < 0 or self.total == 0:
            raise DomainError("unit counts must be non-negative with a positive total")
        if not (0 < self.treated_per_unit < self.n_per_unit):
            raise DomainError("need 0 < treated_per_unit < n_per_unit")
        if self.n_per_unit < 3:
            raise DomainError("need at least 3 observations per unit")
        if not self.noise_sd > 0:
            raise DomainError("noise_sd must be positive")

    @property
    def total(self) -> int:
        return self.null_count + self.nonnull_count

    def with_(self, **changes) -> "Scenario":
        return replace(self, **changes)


def design(scenario: Scenario) -> np.ndarray:
    d = np.zeros(scenario.n_per_unit)
    d[scenario.n_per_unit - scenario.treated_per_unit:] = 1.0
    return d


def generate(scenario: Scenario) -> list[UnitData]:
    """Simulate all units; ids 0..null_count-1 are null, the rest non-null.

    The generator is seeded with ``[seed, 1]`` so its stream never
    coincides with a Gibbs chain seeded from the same integer.
    """
    rng = np.random.default_rng([scenario.seed, 1])
    betas = np.concatenate([
        np.zeros(scenario.null_count),
        scenario.effect_law.draw(rng, scenario.nonnull_count),
    ])
    noise = rng.standard_normal((scenario.total, scenario.n_per_unit)) * scenario.noise_sd
    d = design(scenario)
    return [
        UnitData(unit_id=j, y=betas[j] * d + noise[j], d=d, true_beta=float(betas[j]))
        for j in range(scenario.total)
    ]
