"""Statistical divergences between binned distributions, all in bits.

Base-2 logarithms are fixed throughout so that Jensen-Shannon values of a
distribution pair live in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .histograms import Distribution

KL_SMOOTHING_DEFAULT = 1e-6


@dataclass(frozen=True)
class DivergenceMetric:
    """Selector for the pluggable divergence used by the detectors."""

    kind: str
    log_base: int = 2

    def __post_init__(self):
        if self.kind not in ("kl", "jsd"):
            raise ValueError(f"unknown divergence kind {self.kind!r}")
        if self.log_base != 2:
            raise ValueError("only base-2 logarithms are supported")

    @property
    def needs_positivity(self) -> bool:
        return self.kind == "kl"

    def compute(self, p, q) -> float:
        return kl(p, q) if self.kind == "kl" else jsd_pair(p, q)


def _mass(x) -> np.ndarray:
    if isinstance(x, Distribution):
        return x.mass
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError("expected a 1-d probability vector")
    return arr


def entropy_bits(p) -> float:
    """Shannon entropy with the 0*log(0) = 0 convention."""
    mass = _mass(p)
    nz = mass[mass > 0]
    return float(-(nz * np.log2(nz)).sum())


def kl(p, q) -> float:
    """Kullback-Leibler divergence sum(p * log2(p/q)).

    Requires q > 0 wherever p > 0; callers must smooth their estimates if
    that cannot be guaranteed.
    """
    pm, qm = _mass(p), _mass(q)
    if len(pm) != len(qm):
        raise ValueError(f"length mismatch: {len(pm)} vs {len(qm)}")
    support = pm > 0
    if np.any(qm[support] == 0):
        raise ValueError("absolute continuity violated: q has a zero bin where p > 0")
    ps = pm[support]
    return max(0.0, float((ps * np.log2(ps / qm[support])).sum()))


def jsd_pair(p, q) -> float:
    """Jensen-Shannon divergence in bits; symmetric and bounded by 1."""
    pm, qm = _mass(p), _mass(q)
    if len(pm) != len(qm):
        raise ValueError(f"length mismatch: {len(pm)} vs {len(qm)}")
    m = 0.5 * (pm + qm)
    # max() guards against -1e-16 style rounding residue
    return max(0.0, entropy_bits(m) - 0.5 * (entropy_bits(pm) + entropy_bits(qm)))


def jsd_multi(ps: Sequence, weights: Sequence[float] | None = None) -> float:
    """Jensen-Shannon divergence of several distributions at once.

    Equals ``jsd_pair`` for two inputs with uniform weights.  Comparing one
    distribution against many this way dilutes differences, which is exactly
    why the detectors stick to pairwise divergence against a reference.
    """
    masses = [_mass(p) for p in ps]
    if len(masses) < 2:
        raise ValueError("need at least two distributions")
    length = len(masses[0])
    if any(len(m) != length for m in masses):
        raise ValueError("length mismatch among distributions")
    if weights is None:
        w = np.full(len(masses), 1.0 / len(masses))
    else:
        w = np.asarray(weights, dtype=float)
        if len(w) != len(masses):
            raise ValueError("need one weight per distribution")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be non-negative and sum to 1")
    mixture = sum(wi * m for wi, m in zip(w, masses))
    return max(0.0, entropy_bits(mixture) - sum(wi * entropy_bits(m) for wi, m in zip(w, masses)))
