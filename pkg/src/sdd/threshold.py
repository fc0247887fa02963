"""Gaussian fits over divergence samples and the expected-error-optimal cutoff.

Given one Gaussian fitted to divergences of known-normal collections and one
fitted to known-anomalous ones, plus a prior anomaly probability, the optimal
decision threshold minimizes

    alpha * P(anomalous scores below t) + (1 - alpha) * P(normal scores above t).

Stationary points satisfy alpha * pdf_a(t) = (1 - alpha) * pdf_n(t), a
quadratic in t, solved in closed form with the minimizing root selected; a
golden-section search backs up the degenerate no-root regime.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class GaussianParams:
    mu: float
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


@dataclass(frozen=True)
class ThresholdInputs:
    """Both class Gaussians plus the prior anomaly probability."""

    normal: GaussianParams
    anomalous: GaussianParams
    alpha: float

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie strictly inside (0, 1)")


def fit_gaussian(values) -> GaussianParams:
    """Mean and maximum-likelihood (divide-by-n) standard deviation."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or len(arr) < 2:
        raise ValueError("need at least two values to fit a Gaussian")
    return GaussianParams(float(arr.mean()), float(arr.std(ddof=0)))


def _phi(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def expected_error(t: float, inputs: ThresholdInputs) -> float:
    """Alpha-weighted misclassification probability of thresholding at t."""
    n, a = inputs.normal, inputs.anomalous
    if n.sigma <= 0 or a.sigma <= 0:
        raise ValueError("sigma must be positive")
    miss = _phi((t - a.mu) / a.sigma)
    false_alarm = 1.0 - _phi((t - n.mu) / n.sigma)
    return inputs.alpha * miss + (1.0 - inputs.alpha) * false_alarm


def golden_section_minimize(f, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 500) -> float:
    """Golden-section search for a minimum of f on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def _is_local_minimum(t: float, inputs: ThresholdInputs) -> bool:
    """The stationary-point selection rule: second derivative positive at t.

    Written exactly as the pdf-weighted inequality
    alpha*(t-mu_a)/sigma_a^3 * exp(...) < (1-alpha)*(t-mu_n)/sigma_n^3 * exp(...)
    so it can be cross-checked against the direct error comparison.
    """
    n, a = inputs.normal, inputs.anomalous
    lhs = (
        inputs.alpha
        * (t - a.mu)
        / a.sigma**3
        * math.exp(-((t - a.mu) ** 2) / (2.0 * a.sigma**2))
    )
    rhs = (
        (1.0 - inputs.alpha)
        * (t - n.mu)
        / n.sigma**3
        * math.exp(-((t - n.mu) ** 2) / (2.0 * n.sigma**2))
    )
    return lhs < rhs


def optimal_threshold(inputs: ThresholdInputs) -> float:
    """Threshold minimizing :func:`expected_error` for the given class pair.

    Uses the closed-form root of alpha*pdf_a(t) = (1-alpha)*pdf_n(t) when the
    class sigmas differ, the log-ratio shift of the midpoint when they match,
    and golden-section minimization when the quadratic has no real root.
    """
    n, a = inputs.normal, inputs.anomalous
    alpha = inputs.alpha
    if n.sigma <= 0 or a.sigma <= 0:
        raise ValueError("sigma must be positive")
    if a.mu <= n.mu:
        raise ValueError("class order violated: anomalous mean must exceed normal mean")

    if a.sigma == n.sigma:
        k = a.sigma
        return (n.mu + a.mu) / 2.0 + k * k * math.log((1.0 - alpha) / alpha) / (a.mu - n.mu)

    # Quadratic A t^2 + B t + C = 0 from equating the weighted log-densities.
    log_ratio = math.log((1.0 - alpha) * a.sigma / (alpha * n.sigma))
    A = (a.sigma**2 - n.sigma**2) / (2.0 * n.sigma**2 * a.sigma**2)
    B = a.mu / a.sigma**2 - n.mu / n.sigma**2
    C = n.mu**2 / (2.0 * n.sigma**2) - a.mu**2 / (2.0 * a.sigma**2) - log_ratio
    disc = B * B - 4.0 * A * C
    lo = n.mu - 6.0 * n.sigma
    hi = a.mu + 6.0 * a.sigma
    if disc <= 0:
        # One weighted pdf dominates everywhere: no interior stationary point.
        return golden_section_minimize(lambda t: expected_error(t, inputs), lo, hi)

    sq = math.sqrt(disc)
    q = -(B + math.copysign(sq, B)) / 2.0
    roots = sorted({q / A, C / q} if q != 0 else {-B / (2.0 * A)})

    selected = [t for t in roots if _is_local_minimum(t, inputs)]
    errors = {t: expected_error(t, inputs) for t in roots}
    by_error = min(roots, key=lambda t: errors[t])
    if len(selected) == 1:
        t = selected[0]
        scale = abs(errors[roots[0]] - errors[roots[-1]]) + 1e-15
        if errors[t] > errors[by_error] + 1e-12 * scale:
            raise RuntimeError(
                "root selection inconsistency: stationarity rule and error "
                "comparison disagree"
            )
        return t
    # Both sides equal at the stationary points: fall back on the comparison.
    warnings.warn(
        "threshold root selection hit the equality edge case; "
        "using direct expected-error comparison",
        RuntimeWarning,
        stacklevel=2,
    )
    return by_error
