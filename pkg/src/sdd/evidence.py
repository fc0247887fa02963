"""Evidence-based detection: per-class Gaussians and an adaptive threshold.

Two evidence sets (distributions known normal and known anomalous) induce two
Gaussians over divergence-from-reference values; the decision threshold is the
expected-error minimizer between them.  With FIFO eviction the evidence sets
double as sliding windows, letting the detector follow concept drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .detect import (
    DEGENERATE_SIGMA,
    DetectorConfig,
    Verdict,
    collection_distribution,
    reference_distribution,
)
from .histograms import Distribution, align, align_many, resmooth
from .ingest import DataCollection
from .threshold import GaussianParams, ThresholdInputs, fit_gaussian, optimal_threshold

STATIC = "static"
FIFO_WINDOW = "fifo_window"


class EvidenceSet:
    """Bounded, insertion-ordered container of distributions.

    ``static`` sets never change after construction; ``fifo_window`` sets
    evict their oldest member when a new one pushes them over capacity.
    """

    def __init__(self, members, capacity: int, policy: str = STATIC):
        members = list(members)
        if policy not in (STATIC, FIFO_WINDOW):
            raise ValueError(f"unknown policy {policy!r}")
        if capacity < 1:
            raise ValueError("capacity must be positive")
        if len(members) > capacity:
            raise ValueError(f"{len(members)} members exceed capacity {capacity}")
        self.members: list[Distribution] = members
        self.capacity = capacity
        self.policy = policy

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def add(self, dist: Distribution) -> bool:
        """Append a member; returns True when the oldest one was evicted."""
        if self.policy != FIFO_WINDOW:
            raise ValueError("static evidence set rejects updates")
        self.members.append(dist)
        if len(self.members) > self.capacity:
            self.members.pop(0)
            return True
        return False


@dataclass
class SddeState:
    """Evidence sets plus detector configuration; owns the prepared threshold.

    Preparation is lazy: the reference, per-class Gaussians and threshold are
    recomputed only when evidence changed since the last call, and cached
    divergence values are reused whenever the reference was untouched.
    ``divergence_evals`` counts actual metric invocations so the linear cost
    contract can be checked.
    """

    normal_evidence: EvidenceSet
    anomalous_evidence: EvidenceSet
    alpha: float = 0.5
    cfg: DetectorConfig = field(default_factory=DetectorConfig)
    divergence_evals: int = 0

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie strictly inside (0, 1)")
        self._prepared: tuple[Distribution, float] | None = None
        self._normal_divs: list[float | None] = [None] * len(self.normal_evidence)
        self._anom_divs: list[float | None] = [None] * len(self.anomalous_evidence)
        self._prepared_span: int | None = None
        self.normal_fit: GaussianParams | None = None
        self.anomalous_fit: GaussianParams | None = None

    # -- internals ---------------------------------------------------------

    def _div(self, p: Distribution, q: Distribution) -> float:
        self.divergence_evals += 1
        return self.cfg.divergence_metric.compute(p, q)

    # -- operations --------------------------------------------------------

    def prepare(self) -> tuple[Distribution, float]:
        """Reference distribution and decision threshold for classification.

        Raises when the evidence classes are not separated (anomalous mean
        divergence not above the normal one), which signals unusable
        anomalous evidence.
        """
        if self._prepared is not None:
            return self._prepared
        if len(self.normal_evidence) < 2 or len(self.anomalous_evidence) < 2:
            raise ValueError("need at least two members in each evidence set")

        normal, anom = list(self.normal_evidence), list(self.anomalous_evidence)
        if self.cfg.level == 2:
            together = align_many(normal + anom)
            span = len(together[0])
            if self.cfg.divergence_metric.needs_positivity:
                together = [resmooth(d, self.cfg.epsilon) for d in together]
                if self._prepared_span is not None and self._prepared_span != span:
                    # smoothing depends on the padded width, so cached values died
                    self._normal_divs = [None] * len(self._normal_divs)
                    self._anom_divs = [None] * len(self._anom_divs)
            normal, anom = together[: len(normal)], together[len(normal) :]
            self._prepared_span = span

        reference = reference_distribution(normal)
        for cache, dists in ((self._normal_divs, normal), (self._anom_divs, anom)):
            for i, d in enumerate(dists):
                if cache[i] is None:
                    cache[i] = self._div(d, reference)

        self.normal_fit = _floored(fit_gaussian(self._normal_divs))
        self.anomalous_fit = _floored(fit_gaussian(self._anom_divs))
        if self.anomalous_fit.mu <= self.normal_fit.mu:
            raise ValueError(
                "evidence classes not separated: anomalous divergences do not "
                "exceed normal ones"
            )
        t = optimal_threshold(
            ThresholdInputs(self.normal_fit, self.anomalous_fit, self.alpha)
        )
        self._prepared = (reference, t)
        return self._prepared

    def classify(self, collection: DataCollection) -> Verdict:
        """Flag the collection when its divergence from the reference exceeds t."""
        reference, t = self.prepare()
        p = collection_distribution(collection, self.cfg)
        eps = self.cfg.epsilon if self.cfg.divergence_metric.needs_positivity else 0.0
        p_al, ref_al = align(p, reference, eps)
        d = self._div(p_al, ref_al)
        return Verdict(collection.key, d, d > t, "threshold")

    def update_dynamic(self, collection: DataCollection, verdict: Verdict) -> "SddeState":
        """Fold a classified collection into the evidence window it belongs to.

        Flagged collections join the anomalous window, the rest the normal
        one; the oldest member is evicted once the window is full.  Only
        ``fifo_window`` evidence accepts updates.
        """
        target, cache = (
            (self.anomalous_evidence, self._anom_divs)
            if verdict.flagged
            else (self.normal_evidence, self._normal_divs)
        )
        p = collection_distribution(collection, self.cfg)
        evicted = target.add(p)  # raises on static policy, state untouched
        if verdict.flagged:
            # reference unchanged: the classify-time divergence stays valid
            cache.append(verdict.divergence)
        else:
            cache.append(None)
        if evicted:
            cache.pop(0)
        if not verdict.flagged:
            # the reference moves with the normal evidence: all values stale
            self._normal_divs = [None] * len(self._normal_divs)
            self._anom_divs = [None] * len(self._anom_divs)
        self._prepared = None
        return self


def _floored(params: GaussianParams) -> GaussianParams:
    return GaussianParams(params.mu, max(params.sigma, DEGENERATE_SIGMA))


def evidence_from_collections(
    collections: list[DataCollection],
    cfg: DetectorConfig,
    capacity: int | None = None,
    policy: str = STATIC,
) -> EvidenceSet:
    """Build an evidence set from labeled collections via the standard pipeline."""
    dists = [collection_distribution(c, cfg) for c in collections]
    if capacity is None:
        capacity = max(1, len(dists))
    return EvidenceSet(dists, capacity, policy)
