"""Histogram construction and normalization.

Two views of a collection are used: a first-level histogram (events per
time-of-day bin) and a second-level histogram built on top of it (how many
first-level bins hold each raw count value).  The second level is what makes
volume inflation visible even when the time-of-day shape is preserved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import SECONDS_PER_DAY, DataCollection


@dataclass(frozen=True)
class Histogram:
    """Counts over contiguous [edge[i], edge[i+1]) bins."""

    bin_edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if edges.ndim != 1 or counts.ndim != 1 or len(edges) != len(counts) + 1:
            raise ValueError("need len(bin_edges) == len(counts) + 1")
        if not np.all(np.diff(edges) > 0):
            raise ValueError("bin edges must be strictly ascending")
        if np.any(counts < 0):
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class Distribution:
    """A probability vector over the same bin layout as a Histogram."""

    mass: np.ndarray
    bin_edges: np.ndarray

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=float)
        edges = np.asarray(self.bin_edges, dtype=float)
        if mass.ndim != 1 or len(edges) != len(mass) + 1:
            raise ValueError("need len(bin_edges) == len(mass) + 1")
        if np.any(mass < 0):
            raise ValueError("mass must be non-negative")
        if abs(mass.sum() - 1.0) > 1e-9:
            raise ValueError(f"mass must sum to 1, got {mass.sum()!r}")
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "bin_edges", edges)

    def __len__(self) -> int:
        return len(self.mass)


def build_first_level(collection: DataCollection, bins_per_day: int = 24) -> Histogram:
    """Histogram of a collection's events over equal time-of-day bins.

    Bins are left-closed; ``bins_per_day`` must divide 86400.
    """
    if bins_per_day <= 0 or SECONDS_PER_DAY % bins_per_day != 0:
        raise ValueError(f"bins_per_day must divide {SECONDS_PER_DAY}, got {bins_per_day}")
    width = SECONDS_PER_DAY // bins_per_day
    offsets = np.asarray(collection.events, dtype=np.int64)
    if offsets.size:
        counts = np.bincount(offsets // width, minlength=bins_per_day)
    else:
        counts = np.zeros(bins_per_day, dtype=np.int64)
    edges = np.arange(bins_per_day + 1, dtype=float) * width
    return Histogram(edges, counts)


def build_second_level(first: Histogram, value_bin_width: int = 1) -> Histogram:
    """Histogram over the raw count values of a first-level histogram.

    Bin j counts how many first-level bins hold a count in
    [j*w, (j+1)*w); the edges span [0, max_count + w).  Total mass therefore
    equals the number of first-level bins, and doubling every first-level
    count shifts the occupied bins upward without changing that total.
    """
    if value_bin_width <= 0:
        raise ValueError("value_bin_width must be positive")
    if len(first.counts) == 0:
        raise ValueError("first-level histogram must have at least one bin")
    w = int(value_bin_width)
    indices = first.counts // w
    n_bins = int(indices.max()) + 1
    counts = np.bincount(indices, minlength=n_bins)
    edges = np.arange(n_bins + 1, dtype=float) * w
    return Histogram(edges, counts)


def normalize(h: Histogram, epsilon: float = 0.0) -> Distribution:
    """Turn counts into a probability vector, optionally additively smoothed.

    Each bin gets (count + epsilon) / (total + bins * epsilon).  A histogram
    with zero total and zero epsilon has no distribution.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    total = h.counts.sum()
    if total == 0 and epsilon == 0:
        raise ValueError("degenerate histogram: all counts zero and no smoothing")
    mass = (h.counts + epsilon) / (total + len(h.counts) * epsilon)
    return Distribution(mass, h.bin_edges)


def _lattice(edges: np.ndarray) -> tuple[float, float, float]:
    widths = np.diff(edges)
    w = float(widths[0])
    if not np.allclose(widths, w):
        raise ValueError("bins must be uniform to align")
    return float(edges[0]), float(edges[-1]), w


def resmooth(d: Distribution, epsilon: float) -> Distribution:
    """Additively smooth an existing distribution so every bin is positive."""
    if epsilon <= 0:
        return d
    mass = (d.mass + epsilon) / (1.0 + len(d.mass) * epsilon)
    return Distribution(mass, d.bin_edges)


def align(a: Distribution, b: Distribution, epsilon: float = 0.0) -> tuple[Distribution, Distribution]:
    """Re-express two distributions over the union of their edge ranges.

    Bins absent from one input get zero mass; pass ``epsilon`` > 0 to
    re-smooth the padded vectors when a positivity-requiring divergence
    follows.  Bin widths must match and sit on a common lattice.
    """
    lo_a, hi_a, w_a = _lattice(a.bin_edges)
    lo_b, hi_b, w_b = _lattice(b.bin_edges)
    if not np.isclose(w_a, w_b):
        raise ValueError(f"incompatible bin widths: {w_a} vs {w_b}")
    w = w_a
    if not np.isclose((lo_a - lo_b) / w, round((lo_a - lo_b) / w)):
        raise ValueError("bin edges do not share a lattice")
    if np.array_equal(a.bin_edges, b.bin_edges) and epsilon == 0:
        return a, b
    lo = min(lo_a, lo_b)
    hi = max(hi_a, hi_b)
    n = int(round((hi - lo) / w))
    edges = lo + np.arange(n + 1, dtype=float) * w

    def pad(d: Distribution, lo_d: float) -> Distribution:
        offset = int(round((lo_d - lo) / w))
        mass = np.zeros(n)
        mass[offset : offset + len(d.mass)] = d.mass
        return resmooth(Distribution(mass, edges), epsilon)

    return pad(a, lo_a), pad(b, lo_b)


def align_many(dists: list[Distribution], epsilon: float = 0.0) -> list[Distribution]:
    """Re-express a batch of distributions over the union of their edge ranges."""
    if not dists:
        return []
    lattices = [_lattice(d.bin_edges) for d in dists]
    w = lattices[0][2]
    for lo_d, _, w_d in lattices:
        if not np.isclose(w_d, w):
            raise ValueError(f"incompatible bin widths: {w_d} vs {w}")
        if not np.isclose((lo_d - lattices[0][0]) / w, round((lo_d - lattices[0][0]) / w)):
            raise ValueError("bin edges do not share a lattice")
    lo = min(l for l, _, _ in lattices)
    hi = max(h for _, h, _ in lattices)
    n = int(round((hi - lo) / w))
    edges = lo + np.arange(n + 1, dtype=float) * w
    out = []
    for d, (lo_d, _, _) in zip(dists, lattices):
        offset = int(round((lo_d - lo) / w))
        mass = np.zeros(n)
        mass[offset : offset + len(d.mass)] = d.mass
        out.append(resmooth(Distribution(mass, edges), epsilon))
    return out


def align_histograms(hists: list[Histogram]) -> list[Histogram]:
    """Pad a batch of same-width histograms onto one shared edge range."""
    if not hists:
        return []
    lattices = [_lattice(h.bin_edges) for h in hists]
    w = lattices[0][2]
    for lo_h, _, w_h in lattices:
        if not np.isclose(w_h, w):
            raise ValueError(f"incompatible bin widths: {w_h} vs {w}")
        if not np.isclose((lo_h - lattices[0][0]) / w, round((lo_h - lattices[0][0]) / w)):
            raise ValueError("bin edges do not share a lattice")
    lo = min(l for l, _, _ in lattices)
    hi = max(h for _, h, _ in lattices)
    n = int(round((hi - lo) / w))
    edges = lo + np.arange(n + 1, dtype=float) * w
    out = []
    for h, (lo_h, _, _) in zip(hists, lattices):
        offset = int(round((lo_h - lo) / w))
        counts = np.zeros(n, dtype=np.int64)
        counts[offset : offset + len(h.counts)] = h.counts
        out.append(Histogram(edges, counts))
    return out
