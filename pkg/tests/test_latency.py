"""Delay injection: re-timing cascades, background semantics, estimation."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from migadvisor.footprint import FootprintEntry, LinkParams, NetworkFootprint
from migadvisor.latency import (
    compile_trace,
    estimate_api_latency,
    inject_delays,
    q_perf,
)
from migadvisor.plans import MigrationPlan, Preferences
from migadvisor.telemetry import Span, Trace

MS = 1000  # us per ms

NO_DELAY = LinkParams(0.0, 0.0, 0.0, 0.0)


def delay_links(delta_ms):
    """Links whose split-edge delay is a constant delta regardless of bytes."""
    return LinkParams(0.0, delta_ms / 1e3, 0.0, 0.0)


def span(sid, parent, component, start, dur):
    return Span("t1", sid, parent, component, "op", start, dur)


def cascade_trace():
    """Root [0,100]ms; A=[10,40] and B=[12,42] parallel; C=[50,90]
    sequential; response gap 10 ms."""
    return Trace(
        "t1",
        "/post",
        (
            span("s0", None, "root", 0, 100 * MS),
            span("sa", "s0", "comp_a", 10 * MS, 30 * MS),
            span("sb", "s0", "comp_b", 12 * MS, 30 * MS),
            span("sc", "s0", "comp_c", 50 * MS, 40 * MS),
        ),
    )


def plan_for(trace, cloud=()):
    components = {s.component for s in trace.spans}
    return MigrationPlan({c: ("cloud" if c in cloud else "onprem") for c in components})


class TestCascade:
    def test_hand_traced_offload(self):
        # offload only A's component with a 20 ms delay: A'=[30,60], B
        # unchanged, C' starts max(60,42)+8=68, root latency 100 -> 118 ms
        trace = cascade_trace()
        adjusted = inject_delays(
            trace, plan_for(trace, cloud={"comp_a"}), NetworkFootprint(), delay_links(20.0)
        )
        assert adjusted.times["sa"] == (30 * MS, 60 * MS)
        assert adjusted.times["sb"] == (12 * MS, 42 * MS)
        assert adjusted.times["sc"] == (68 * MS, 108 * MS)
        assert adjusted.latency_us == pytest.approx(118 * MS)
        assert adjusted.original_latency_us == 100 * MS

    def test_identity_plan_unchanged(self):
        trace = cascade_trace()
        adjusted = inject_delays(trace, plan_for(trace), NetworkFootprint(), delay_links(20.0))
        assert adjusted.latency_us == adjusted.original_latency_us
        for s in trace.spans:
            assert adjusted.times[s.span_id] == (s.start_us, s.end_us)

    def test_zero_delta_unchanged(self):
        trace = cascade_trace()
        adjusted = inject_delays(
            trace, plan_for(trace, cloud={"comp_a"}), NetworkFootprint(), NO_DELAY
        )
        assert adjusted.latency_us == adjusted.original_latency_us

    def test_parallel_sibling_shift(self):
        # offloading B delays B but not A; C waits for the later of the two
        trace = cascade_trace()
        adjusted = inject_delays(
            trace, plan_for(trace, cloud={"comp_b"}), NetworkFootprint(), delay_links(20.0)
        )
        assert adjusted.times["sa"] == (10 * MS, 40 * MS)
        assert adjusted.times["sb"] == (32 * MS, 62 * MS)
        assert adjusted.times["sc"][0] == 70 * MS  # max(40, 62) + 8 gap

    def test_delay_uses_footprint_bytes(self):
        trace = cascade_trace()
        fp = NetworkFootprint()
        fp.add(FootprintEntry("/post", "root", "comp_a", 600.0, 400.0))
        # 1 ms latency shift plus 1000 bytes at 10 us/byte = 10 ms transfer
        links = LinkParams(0.0, 1e-3, 0.0, 1e-5)
        adjusted = inject_delays(trace, plan_for(trace, cloud={"comp_a"}), fp, links)
        assert adjusted.times["sa"][0] == pytest.approx(10 * MS + 11 * MS)


class TestBackground:
    def bg_trace(self):
        return Trace(
            "t1",
            "/notify",
            (
                span("s0", None, "root", 0, 50 * MS),
                span("sa", "s0", "worker", 10 * MS, 20 * MS),
                span("sn", "s0", "notifier", 35 * MS, 60 * MS),  # outlives root
            ),
        )

    def test_offloading_background_component_free(self):
        trace = self.bg_trace()
        adjusted = inject_delays(
            trace, plan_for(trace, cloud={"notifier"}), NetworkFootprint(), delay_links(30.0)
        )
        assert adjusted.latency_us == adjusted.original_latency_us

    def test_background_start_still_shifts(self):
        trace = self.bg_trace()
        adjusted = inject_delays(
            trace, plan_for(trace, cloud={"notifier"}), NetworkFootprint(), delay_links(30.0)
        )
        assert adjusted.times["sn"][0] == 65 * MS


class TestCompile:
    def test_anchors_and_gaps(self):
        compiled = compile_trace(cascade_trace())
        assert compiled.spans["sa"].anchor_ids == ()
        assert compiled.spans["sb"].anchor_ids == ()  # parallel to A
        assert set(compiled.spans["sc"].anchor_ids) == {"sa", "sb"}
        assert compiled.spans["sc"].start_gap_us == 8 * MS
        assert compiled.spans["s0"].end_gap_us == 10 * MS

    def test_plan_must_cover_components(self):
        trace = cascade_trace()
        compiled = compile_trace(trace)
        from migadvisor.latency import inject_compiled

        with pytest.raises(ValueError, match="not covered"):
            inject_compiled(
                compiled, MigrationPlan({"root": "onprem"}), NetworkFootprint(), NO_DELAY
            )


class TestEstimate:
    def test_identical_traces_equal_samples(self):
        traces = [
            Trace(f"t{i}", "/post", tuple(
                Span(f"t{i}", s.span_id, s.parent_span_id, s.component, s.operation, s.start_us, s.duration_us)
                for s in cascade_trace().spans
            ))
            for i in range(10)
        ]
        est = estimate_api_latency(
            traces, plan_for(traces[0], cloud={"comp_a"}), NetworkFootprint(), delay_links(20.0)
        )
        assert len(set(est.samples)) == 1
        assert est.mean_us == pytest.approx(118 * MS)
        assert est.ratio == pytest.approx(1.18)

    def test_sample_budget_caps_traces(self):
        traces = [
            Trace(f"t{i:03d}", "/x", (Span(f"t{i:03d}", "s0", None, "a", "op", 0, 1000),))
            for i in range(30)
        ]
        est = estimate_api_latency(
            traces, MigrationPlan({"a": "onprem"}), NetworkFootprint(), NO_DELAY, sample_budget=7
        )
        assert len(est.samples) == 7

    def test_mixed_apis_rejected(self):
        t1 = Trace("a", "/x", (Span("a", "s0", None, "c", "op", 0, 10),))
        t2 = Trace("b", "/y", (Span("b", "s0", None, "c", "op", 0, 10),))
        with pytest.raises(ValueError, match="multiple apis"):
            estimate_api_latency([t1, t2], MigrationPlan({"c": "onprem"}), NetworkFootprint(), NO_DELAY)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.0, 100.0), st.floats(0.0, 100.0))
    def test_latency_monotone_in_delay(self, d1, d2):
        trace = cascade_trace()
        plan = plan_for(trace, cloud={"comp_a", "comp_c"})
        lo, hi = sorted((d1, d2))
        a_lo = inject_delays(trace, plan, NetworkFootprint(), delay_links(lo))
        a_hi = inject_delays(trace, plan, NetworkFootprint(), delay_links(hi))
        assert a_lo.latency_us <= a_hi.latency_us + 1e-9


class TestQPerf:
    def make_estimate(self, api, ratio):
        from migadvisor.latency import LatencyEstimate

        return LatencyEstimate(api, (100.0 * ratio,), (100.0,))

    def test_identity_ratio_one(self):
        estimates = {"/a": self.make_estimate("/a", 1.0), "/b": self.make_estimate("/b", 1.0)}
        assert q_perf(estimates, Preferences()) == pytest.approx(1.0)

    def test_critical_weight_doubles(self):
        estimates = {"/a": self.make_estimate("/a", 1.5), "/b": self.make_estimate("/b", 1.0)}
        plain = q_perf(estimates, Preferences())
        weighted = q_perf(estimates, Preferences(critical_apis=frozenset({"/a"})))
        assert plain == pytest.approx(1.25)
        assert weighted == pytest.approx((2 * 1.5 + 1.0) / 2)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            q_perf({}, Preferences())


class TestOracleAgreement:
    def test_estimator_matches_oracle_on_random_plans(self, mini_parts, mini_corpus):
        # cross-module equivalence: true footprints + noiseless traces must
        # reproduce the discrete-event replay almost exactly
        from migadvisor.scenario import oracle_latency
        from migadvisor.telemetry import group_traces_by_api
        from tests.conftest import LINKS

        topology, _ = mini_parts
        truth = mini_corpus.truth.footprint
        grouped = group_traces_by_api(mini_corpus.traces)
        order = sorted(topology.components)
        rng = np.random.default_rng(11)
        for _ in range(5):
            bits = rng.integers(0, 2, size=len(order))
            plan = MigrationPlan.from_bits(order, bits)
            for api, traces in grouped.items():
                est = estimate_api_latency(traces[:20], plan, truth, LINKS)
                oracle = oracle_latency(topology, plan, LINKS, api, n_samples=1)
                assert est.mean_us == pytest.approx(oracle, rel=1e-3)
