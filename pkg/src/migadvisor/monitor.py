"""Post-migration drift detection on API latency distributions.

Three distributions per API are compared on a shared histogram grid: the
pre-migration estimate produced during recommendation, the distribution
measured right after migration, and a recent measurement window.  When the
recent distribution diverges from the measured baseline much faster than
the estimate ever did, the placement model is stale and a new
recommendation round is suggested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

DEFAULT_BINS = 30
SMOOTHING_EPS = 1e-6
DEFAULT_RATIO_THRESHOLD = 5.0
DEFAULT_MIN_SAMPLES = 30


@dataclass(frozen=True)
class LatencyHistogram:
    """Probability masses over shared bin edges for one API."""

    api: str
    edges: tuple[float, ...]  # len = bins + 1
    masses: tuple[float, ...]  # len = bins; smoothed, sums to 1

    def __post_init__(self) -> None:
        if len(self.edges) != len(self.masses) + 1:
            raise ValueError("edges must be one longer than masses")
        total = math.fsum(self.masses)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"masses sum to {total}, expected 1")
        if min(self.masses) <= 0:
            raise ValueError("masses must be strictly positive (smoothed)")


def quantile_edges(samples: Sequence[float], bins: int = DEFAULT_BINS) -> tuple[float, ...]:
    """Bin edges at the sample quantiles, deduplicated and padded open-ended."""
    arr = np.asarray(sorted(samples), dtype=float)
    edges = np.unique(np.quantile(arr, np.linspace(0.0, 1.0, bins + 1)))
    if len(edges) < 2:
        edges = np.array([edges[0] - 0.5, edges[0] + 0.5])
    # open outer bins so later samples outside the observed range still count
    edges[0] = -math.inf
    edges[-1] = math.inf
    return tuple(float(e) for e in edges)


def histogram(
    api: str, samples: Sequence[float], edges: Sequence[float], eps: float = SMOOTHING_EPS
) -> LatencyHistogram:
    """Smoothed probability histogram of samples on the given edges."""
    if not samples:
        raise ValueError("no samples")
    counts, _ = np.histogram(np.asarray(samples, dtype=float), bins=np.asarray(edges))
    masses = counts.astype(float) / counts.sum()
    masses = masses + eps
    masses = masses / masses.sum()
    return LatencyHistogram(api, tuple(float(e) for e in edges), tuple(float(m) for m in masses))


def kl_divergence(p: LatencyHistogram, q: LatencyHistogram) -> float:
    if p.edges != q.edges:
        raise ValueError("histograms use different bin edges")
    return float(
        sum(pi * math.log(pi / qi) for pi, qi in zip(p.masses, q.masses))
    )


@dataclass(frozen=True)
class DriftStatus:
    """Per-API drift verdict."""

    api: str
    ratio: float
    triggered: bool
    inconclusive: bool
    baseline_divergence: float
    recent_divergence: float
    recent_samples: int


def drift_check(
    real: LatencyHistogram,
    approx: LatencyHistogram,
    recent_samples: Sequence[float],
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD,
    min_samples: int = DEFAULT_MIN_SAMPLES,
    eps: float = SMOOTHING_EPS,
) -> DriftStatus:
    """Compare a recent sample window against the measured baseline.

    The divergence of the recommendation-round estimate from the measured
    distribution serves as the noise floor: a recent window that diverges
    more than ``ratio_threshold`` times that floor signals drift.
    """
    if len(recent_samples) < min_samples:
        return DriftStatus(
            api=real.api,
            ratio=0.0,
            triggered=False,
            inconclusive=True,
            baseline_divergence=kl_divergence(real, approx),
            recent_divergence=0.0,
            recent_samples=len(recent_samples),
        )
    recent = histogram(real.api, recent_samples, real.edges, eps)
    d_base = kl_divergence(real, approx)
    d_recent = kl_divergence(real, recent)
    ratio = d_recent / max(d_base, eps)
    return DriftStatus(
        api=real.api,
        ratio=ratio,
        triggered=ratio > ratio_threshold,
        inconclusive=False,
        baseline_divergence=d_base,
        recent_divergence=d_recent,
        recent_samples=len(recent_samples),
    )


def split_half_table(
    samples_by_api: Mapping[str, Sequence[float]],
    recent_by_api: Mapping[str, Sequence[float]],
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD,
    min_samples: int = DEFAULT_MIN_SAMPLES,
) -> dict[str, DriftStatus]:
    """Drift table without an explicit prediction distribution.

    Alternating halves of the baseline samples act as the measured
    distribution and its expected noise floor, so the ratio reads "how much
    further has the recent window drifted than ordinary sampling noise".
    """
    table = {}
    for api in sorted(samples_by_api):
        samples = list(samples_by_api[api])
        real, floor = samples[0::2], samples[1::2]
        if len(real) < min_samples or len(floor) < min_samples:
            table[api] = DriftStatus(api, 0.0, False, True, 0.0, 0.0, 0)
            continue
        edges = quantile_edges(real)
        table[api] = drift_check(
            histogram(api, real, edges),
            histogram(api, floor, edges),
            tuple(recent_by_api.get(api, ())),
            ratio_threshold,
            min_samples,
        )
    return table


def check_all(
    real: Mapping[str, LatencyHistogram],
    approx: Mapping[str, LatencyHistogram],
    recent: Mapping[str, Sequence[float]],
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD,
    min_samples: int = DEFAULT_MIN_SAMPLES,
) -> dict[str, DriftStatus]:
    """Drift verdict per API; any triggered API recommends a new round."""
    statuses = {}
    for api in sorted(real):
        statuses[api] = drift_check(
            real[api],
            approx[api],
            tuple(recent.get(api, ())),
            ratio_threshold,
            min_samples,
        )
    return statuses
