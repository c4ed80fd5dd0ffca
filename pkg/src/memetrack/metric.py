"""Weighted cluster distance: perceptual decay blended with annotation overlap.

Distance between two clusters is 1 minus a weighted sum of four
similarities: an exponential decay of the medoid Hamming score plus
Jaccard overlaps of the meme, people, and culture name sets. When both
clusters carry annotations the full weights apply; otherwise the metric
falls back to the perceptual term alone.

The decay is exp(-d/tau). The alternative closed form
1 - d / (tau * e^(64/tau)) is retained behind the ``printed_eq2`` formula
switch for comparison, but it does not reproduce the documented reference
values (0.4 at d=1, tau=1; 0.98 at d=1, tau=64), so it is not the default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Collection

from .hashing import MAX_DISTANCE, hamming

FULL_WEIGHTS = (0.4, 0.4, 0.1, 0.1)  # perceptual, meme, people, culture
PARTIAL_WEIGHTS = (1.0, 0.0, 0.0, 0.0)

FORMULAS = ("exp_decay", "printed_eq2")


class MetricConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MetricConfig:
    tau: float = 25.0
    full_weights: tuple[float, float, float, float] = FULL_WEIGHTS
    partial_weights: tuple[float, float, float, float] = PARTIAL_WEIGHTS
    formula: str = "exp_decay"

    def validate(self) -> "MetricConfig":
        if not self.tau > 0:
            raise MetricConfigError(f"tau must be positive, got {self.tau}")
        if self.formula not in FORMULAS:
            raise MetricConfigError(f"unknown formula {self.formula!r}")
        for name, w in (("full", self.full_weights), ("partial", self.partial_weights)):
            if len(w) != 4 or any(not 0.0 <= x <= 1.0 for x in w):
                raise MetricConfigError(f"{name} weights must be four values in [0, 1]")
            if abs(math.fsum(w) - 1.0) > 1e-9:
                raise MetricConfigError(f"{name} weights must sum to 1, got {math.fsum(w)}")
        return self


@dataclass(frozen=True)
class ClusterProfile:
    """What the metric needs to know about one cluster."""

    cluster_id: int
    medoid: int  # 64-bit hash
    meme_names: frozenset[str] = field(default_factory=frozenset)
    people_names: frozenset[str] = field(default_factory=frozenset)
    culture_names: frozenset[str] = field(default_factory=frozenset)

    @property
    def annotated(self) -> bool:
        return bool(self.meme_names or self.people_names or self.culture_names)


def r_perceptual(d: float, tau: float, formula: str = "exp_decay") -> float:
    """Perceptual similarity in [0, 1] from a Hamming score."""
    if not tau > 0:
        raise MetricConfigError(f"tau must be positive, got {tau}")
    if not 0 <= d <= MAX_DISTANCE:
        raise ValueError(f"Hamming score out of [0, {MAX_DISTANCE}]: {d}")
    if formula == "exp_decay":
        return math.exp(-d / tau)
    if formula == "printed_eq2":
        return 1.0 - d / (tau * math.exp(MAX_DISTANCE / tau))
    raise MetricConfigError(f"unknown formula {formula!r}")


def jaccard(a: Collection, b: Collection) -> float:
    """|A ∩ B| / |A ∪ B|; two empty sets share no evidence, so 0."""
    sa, sb = set(a), set(b)
    union = sa | sb
    if not union:
        return 0.0
    return len(sa & sb) / len(union)


def cluster_distance(p: ClusterProfile, q: ClusterProfile, cfg: MetricConfig) -> float:
    """Weighted distance in [0, 1]; 0 only when every weighted similarity is 1.

    Full weights when both profiles are annotated, partial otherwise.
    Computed as sum(w * (1 - r)), identical to 1 - sum(w * r) because the
    weights sum to 1, and exact for the documented fixed points.
    """
    cfg.validate()
    weights = cfg.full_weights if (p.annotated and q.annotated) else cfg.partial_weights
    d = hamming(p.medoid, q.medoid)
    sims = (
        r_perceptual(d, cfg.tau, cfg.formula),
        jaccard(p.meme_names, q.meme_names),
        jaccard(p.people_names, q.people_names),
        jaccard(p.culture_names, q.culture_names),
    )
    return sum(w * (1.0 - r) for w, r in zip(weights, sims))
