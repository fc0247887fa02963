"""Reference-based detectors: SDD-R (3-sigma) and SDD-R+ (rank by prior).

Both map every collection to a distribution, average those into a reference,
and score each collection by its divergence from that reference.  SDD-R flags
z-scores above 3 under a Gaussian fitted to all divergences; SDD-R+ instead
flags the ceil(n * alpha) highest divergences when the anomaly fraction is
known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .divergence import KL_SMOOTHING_DEFAULT, DivergenceMetric
from .histograms import (
    Distribution,
    align_histograms,
    build_first_level,
    build_second_level,
    normalize,
)
from .ingest import DataCollection
from .threshold import fit_gaussian

Z_SCORE_CUTOFF = 3.0
DEGENERATE_SIGMA = 1e-12


@dataclass(frozen=True)
class Verdict:
    """Per-collection outcome: score, decision and the rule that produced it."""

    collection_ref: str
    divergence: float
    flagged: bool
    rule: str

    def __post_init__(self):
        if not self.divergence >= 0 and not math.isnan(self.divergence):
            raise ValueError("divergence must be non-negative")


@dataclass(frozen=True)
class DetectorConfig:
    """Histogram level, divergence metric and binning shared by all detectors."""

    level: int = 1
    metric: str = "jsd"
    smoothing: float | None = None
    bins_per_day: int = 24
    value_bin_width: int = 1

    def __post_init__(self):
        if self.level not in (1, 2):
            raise ValueError("level must be 1 or 2")
        DivergenceMetric(self.metric)  # validates the kind
        if self.smoothing is not None and self.smoothing < 0:
            raise ValueError("smoothing must be non-negative")

    @property
    def epsilon(self) -> float:
        if self.smoothing is not None:
            return self.smoothing
        return KL_SMOOTHING_DEFAULT if self.metric == "kl" else 0.0

    @property
    def divergence_metric(self) -> DivergenceMetric:
        return DivergenceMetric(self.metric)


def collection_distribution(collection: DataCollection, cfg: DetectorConfig) -> Distribution:
    """The configured-level distribution of a single collection."""
    first = build_first_level(collection, cfg.bins_per_day)
    hist = first if cfg.level == 1 else build_second_level(first, cfg.value_bin_width)
    return normalize(hist, cfg.epsilon)


def batch_distributions(collections: list[DataCollection], cfg: DetectorConfig) -> list[Distribution]:
    """Distributions for a batch, aligned onto one shared bin range.

    Level-1 histograms already share edges; level-2 histograms are padded to
    the widest count range before normalizing so they can be averaged and
    compared directly.
    """
    firsts = [build_first_level(c, cfg.bins_per_day) for c in collections]
    if cfg.level == 1:
        return [normalize(h, cfg.epsilon) for h in firsts]
    seconds = align_histograms([build_second_level(h, cfg.value_bin_width) for h in firsts])
    return [normalize(h, cfg.epsilon) for h in seconds]


def reference_distribution(ps: list[Distribution]) -> Distribution:
    """Pointwise arithmetic mean of equal-length distributions."""
    if not ps:
        raise ValueError("need at least one distribution")
    length = len(ps[0])
    if any(len(p) != length for p in ps):
        raise ValueError("length mismatch among distributions")
    mean = np.mean([p.mass for p in ps], axis=0)
    return Distribution(mean, ps[0].bin_edges)


def divergences_from_reference(
    dists: list[Distribution], reference: Distribution, metric: DivergenceMetric
) -> np.ndarray:
    return np.array([metric.compute(p, reference) for p in dists])


def detect_sddr(collections: list[DataCollection], cfg: DetectorConfig | None = None) -> list[Verdict]:
    """Flag collections whose divergence from the batch reference is a 3-sigma outlier.

    A degenerate divergence spread (sigma below 1e-12, e.g. all-identical
    inputs) flags nothing.
    """
    cfg = cfg or DetectorConfig()
    if len(collections) < 2:
        raise ValueError("need at least two collections")
    dists = batch_distributions(collections, cfg)
    reference = reference_distribution(dists)
    divs = divergences_from_reference(dists, reference, cfg.divergence_metric)
    params = fit_gaussian(divs)
    if params.sigma < DEGENERATE_SIGMA:
        flagged = np.zeros(len(divs), dtype=bool)
    else:
        flagged = (divs - params.mu) / params.sigma > Z_SCORE_CUTOFF
    return [
        Verdict(c.key, float(d), bool(f), "z3")
        for c, d, f in zip(collections, divs, flagged)
    ]


def rank_alpha_count(n: int, alpha: float) -> int:
    """ceil(n * alpha), guarded against float slop, at least 1, at most n."""
    return min(n, max(1, math.ceil(n * alpha - 1e-9)))


def detect_sddr_plus(
    collections: list[DataCollection], cfg: DetectorConfig | None = None, alpha: float = 0.2
) -> list[Verdict]:
    """Flag the ceil(n * alpha) collections most divergent from the reference.

    Ties are broken by input order: the earlier collection wins the flag.
    """
    cfg = cfg or DetectorConfig()
    if not collections:
        raise ValueError("need at least one collection")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie strictly inside (0, 1)")
    dists = batch_distributions(collections, cfg)
    reference = reference_distribution(dists)
    divs = divergences_from_reference(dists, reference, cfg.divergence_metric)
    k = rank_alpha_count(len(collections), alpha)
    order = sorted(range(len(collections)), key=lambda i: (-divs[i], i))
    flagged = set(order[:k])
    return [
        Verdict(c.key, float(d), i in flagged, "rank_alpha")
        for i, (c, d) in enumerate(zip(collections, divs))
    ]
