"""Result containers shared across the estimation and checking layers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Two-sided score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class ExperimentReport:
    """A reproducible Monte Carlo estimate: the config echo plus the base
    seed fully determine the numbers."""

    quantity: str
    estimate: Optional[float]
    se: Optional[float]
    replicas: int
    censored: int
    base_seed: int
    config: dict
    samples: Optional[tuple] = None  # per-replica values, kept only on request

    def __post_init__(self):
        if self.se is not None and self.se < 0:
            raise ValueError("standard error must be nonnegative")
        if self.censored > self.replicas:
            raise ValueError("censored count exceeds replica count")

    @property
    def biased_low(self) -> bool:
        """Censoring truncates the right tail, so the mean is biased low."""
        return self.censored > 0

    def to_json_dict(self) -> dict:
        return {
            "quantity": self.quantity,
            "estimate": self.estimate,
            "se": self.se,
            "replicas": self.replicas,
            "censored": self.censored,
            "seed": self.base_seed,
            "config": self.config,
        }

    def samples_csv(self) -> str:
        """Per-replica dump with header replica,seed,value,censored."""
        if self.samples is None:
            raise ValueError("report was built without samples")
        lines = ["replica,seed,value,censored"]
        for i, (seed, value, censored) in enumerate(self.samples):
            val = "" if value is None else repr(value)
            lines.append(f"{i},{seed},{val},{int(censored)}")
        return "\n".join(lines) + "\n"


_DEFAULTS = {
    "c_line": 0.05,
    "c_star": 0.05,
    "c_coup": 0.05,
    "c_split": 0.5,
    "c_eps": 0.05,
}


@dataclass(frozen=True)
class Constants:
    """The calibrated stand-ins for the existence-only constants of the
    extinction-time bounds. c0 is derived as min(c_line, c_star)/3 unless
    explicitly overridden by the user."""

    c_line: float
    c_star: float
    c0: float
    c_coup: float
    c_split: float
    c_eps: float
    provenance: str = "default"

    def __post_init__(self):
        for name in ("c_line", "c_star", "c0", "c_coup", "c_split", "c_eps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.provenance not in ("default", "calibrated", "user"):
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @classmethod
    def default(cls) -> "Constants":
        return cls(provenance="default", c0=min(_DEFAULTS["c_line"], _DEFAULTS["c_star"]) / 3.0,
                   **_DEFAULTS)

    @classmethod
    def build(cls, provenance: str = "user", **overrides) -> "Constants":
        vals = dict(_DEFAULTS)
        vals.update({k: v for k, v in overrides.items() if k != "c0" and v is not None})
        c0 = overrides.get("c0")
        if c0 is None:
            c0 = min(vals["c_line"], vals["c_star"]) / 3.0
        return cls(provenance=provenance, c0=c0, **vals)

    def to_dict(self) -> dict:
        return {
            "c_line": self.c_line,
            "c_star": self.c_star,
            "c0": self.c0,
            "c_coup": self.c_coup,
            "c_split": self.c_split,
            "c_eps": self.c_eps,
            "provenance": self.provenance,
        }


VERDICT_HOLDS = "holds"
VERDICT_NOISE = "violated-within-noise"
VERDICT_VIOLATED = "violated"


@dataclass(frozen=True)
class BoundCheck:
    """One inequality check: lhs (estimated or exact) against rhs."""

    name: str
    lhs: float
    rhs: float
    margin: float
    verdict: str
    lhs_se: Optional[float] = None
    note: str = ""

    @classmethod
    def compare_le(cls, name: str, lhs: float, rhs: float, lhs_se: Optional[float] = None,
                   margin: float = 0.0, note: str = "") -> "BoundCheck":
        """Check lhs <= rhs + margin; excesses within 3 se count as noise."""
        excess = lhs - rhs - margin
        if excess <= 0:
            verdict = VERDICT_HOLDS
        elif lhs_se is not None and excess <= 3.0 * lhs_se:
            verdict = VERDICT_NOISE
        else:
            verdict = VERDICT_VIOLATED
        return cls(name, lhs, rhs, margin, verdict, lhs_se, note)

    @classmethod
    def compare_ge(cls, name: str, lhs: float, rhs: float, lhs_se: Optional[float] = None,
                   margin: float = 0.0, note: str = "") -> "BoundCheck":
        """Check lhs >= rhs - margin; shortfalls within 3 se count as noise."""
        shortfall = rhs - lhs - margin
        if shortfall <= 0:
            verdict = VERDICT_HOLDS
        elif lhs_se is not None and shortfall <= 3.0 * lhs_se:
            verdict = VERDICT_NOISE
        else:
            verdict = VERDICT_VIOLATED
        return cls(name, lhs, rhs, margin, verdict, lhs_se, note)

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "lhs_se": self.lhs_se,
            "rhs": self.rhs,
            "margin": self.margin,
            "verdict": self.verdict,
            "note": self.note,
        }
