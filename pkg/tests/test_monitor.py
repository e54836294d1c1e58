"""Latency-distribution drift detection."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from migadvisor.monitor import (
    DEFAULT_BINS,
    LatencyHistogram,
    check_all,
    drift_check,
    histogram,
    kl_divergence,
    quantile_edges,
    split_half_table,
)


def hist(api, masses, edges=None):
    if edges is None:
        edges = tuple(float(k) for k in range(len(masses) + 1))
    return LatencyHistogram(api, edges, tuple(masses))


class TestHistogram:
    def test_masses_sum_to_one_and_positive(self):
        samples = list(np.random.default_rng(0).normal(100, 10, 500))
        edges = quantile_edges(samples)
        h = histogram("/a", samples, edges)
        assert math.fsum(h.masses) == pytest.approx(1.0, abs=1e-9)
        assert min(h.masses) > 0

    def test_open_outer_bins_capture_outliers(self):
        edges = quantile_edges([1.0, 2.0, 3.0, 4.0, 5.0], bins=4)
        assert edges[0] == -math.inf and edges[-1] == math.inf
        h = histogram("/a", [-1000.0, 1000.0], edges)
        assert h.masses[0] > 0.4 and h.masses[-1] > 0.4

    def test_degenerate_constant_samples(self):
        edges = quantile_edges([7.0] * 50)
        h = histogram("/a", [7.0] * 50, edges)
        assert math.fsum(h.masses) == pytest.approx(1.0, abs=1e-9)

    def test_invalid_masses_rejected(self):
        with pytest.raises(ValueError):
            hist("/a", (0.5, 0.6))  # sums past 1
        with pytest.raises(ValueError):
            hist("/a", (1.0, 0.0))  # zero mass bin
        with pytest.raises(ValueError):
            LatencyHistogram("/a", (0.0, 1.0), (0.5, 0.5))  # edge count off

    def test_empty_samples_rejected(self):
        with pytest.raises(ValueError):
            histogram("/a", [], (0.0, 1.0))


class TestKLDivergence:
    def test_hand_computed_two_bin_case(self):
        p = hist("/a", (0.5, 0.5))
        q = hist("/a", (0.9, 0.1))
        expected = 0.5 * math.log(5 / 9) + 0.5 * math.log(5)
        assert kl_divergence(p, q) == pytest.approx(expected)
        assert kl_divergence(p, q) == pytest.approx(0.5108, abs=1e-4)

    def test_identical_zero(self):
        p = hist("/a", (0.3, 0.7))
        assert kl_divergence(p, p) == 0.0

    def test_mismatched_edges_rejected(self):
        p = hist("/a", (0.5, 0.5))
        q = hist("/a", (0.5, 0.5), edges=(0.0, 2.0, 4.0))
        with pytest.raises(ValueError):
            kl_divergence(p, q)

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8),
        st.lists(st.floats(0.01, 1.0), min_size=2, max_size=8),
    )
    def test_nonnegative(self, raw_p, raw_q):
        n = min(len(raw_p), len(raw_q))
        p_mass = np.array(raw_p[:n]) / math.fsum(raw_p[:n])
        q_mass = np.array(raw_q[:n]) / math.fsum(raw_q[:n])
        p_mass[-1] += 1.0 - math.fsum(p_mass)  # exact renormalization
        q_mass[-1] += 1.0 - math.fsum(q_mass)
        p = hist("/a", tuple(p_mass))
        q = hist("/a", tuple(q_mass))
        assert kl_divergence(p, q) >= -1e-12


class TestDriftCheck:
    def setup_method(self):
        rng = np.random.default_rng(0)
        self.real_samples = list(rng.normal(100, 10, 400))
        self.edges = quantile_edges(self.real_samples)
        self.real = histogram("/a", self.real_samples, self.edges)
        # the estimate is close to the measurement: a small noise floor
        self.approx = histogram("/a", list(rng.normal(101, 10, 400)), self.edges)

    def test_recent_like_real_not_triggered(self):
        recent = list(np.random.default_rng(1).normal(100, 10, 200))
        status = drift_check(self.real, self.approx, recent)
        assert not status.triggered and not status.inconclusive
        assert status.ratio < 5

    def test_shifted_recent_triggered(self):
        recent = list(np.random.default_rng(2).normal(200, 10, 200))
        status = drift_check(self.real, self.approx, recent)
        assert status.triggered
        assert status.ratio > 5

    def test_few_samples_inconclusive(self):
        status = drift_check(self.real, self.approx, [1.0, 2.0])
        assert status.inconclusive and not status.triggered
        assert status.recent_samples == 2

    def test_threshold_configurable(self):
        recent = list(np.random.default_rng(2).normal(200, 10, 200))
        loose = drift_check(self.real, self.approx, recent, ratio_threshold=1e9)
        assert not loose.triggered

    def test_check_all_covers_every_api(self):
        real = {"/a": self.real}
        approx = {"/a": self.approx}
        recent = {"/a": list(np.random.default_rng(3).normal(100, 10, 100))}
        table = check_all(real, approx, recent)
        assert set(table) == {"/a"}


class TestSplitHalfTable:
    def test_matching_recent_not_triggered(self):
        rng = np.random.default_rng(5)
        baseline = {"/a": list(rng.normal(50, 5, 400))}
        recent = {"/a": list(rng.normal(50, 5, 120))}
        table = split_half_table(baseline, recent)
        assert not table["/a"].triggered

    def test_shifted_recent_triggered(self):
        rng = np.random.default_rng(6)
        baseline = {"/a": list(rng.normal(50, 5, 400))}
        recent = {"/a": list(rng.normal(120, 5, 120))}
        table = split_half_table(baseline, recent)
        assert table["/a"].triggered

    def test_short_baseline_inconclusive(self):
        table = split_half_table({"/a": [1.0, 2.0, 3.0]}, {"/a": [1.0] * 100})
        assert table["/a"].inconclusive

    def test_missing_recent_inconclusive(self):
        rng = np.random.default_rng(7)
        table = split_half_table({"/a": list(rng.normal(50, 5, 400))}, {})
        assert table["/a"].inconclusive and not table["/a"].triggered
