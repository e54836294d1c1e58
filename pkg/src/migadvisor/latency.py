"""Post-migration latency estimation by delay injection on recorded traces.

Each recorded trace is re-timed under a candidate plan: invocations whose
endpoints land in different datacenters get their child span's start shifted
by the learned delay, downstream sequential work is pushed back while
original gaps and span durations are preserved, and background work never
delays the response.  The per-trace latencies approximate the post-migration
latency distribution of the API.

Traces are compiled once (tree structure, sibling relations, gaps) so that
re-timing under many candidate plans is a cheap arithmetic pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .footprint import LinkParams, NetworkFootprint, compute_delay
from .plans import MigrationPlan, Preferences
from .telemetry import Trace
from .workflow import (
    DEFAULT_OVERLAP_THRESHOLD,
    ExecutionRelation,
    build_span_tree,
    classify_pair,
    is_background,
)

DEFAULT_SAMPLE_BUDGET = 100


@dataclass(frozen=True)
class CompiledSpan:
    span_id: str
    component: str
    parent_component: Optional[str]
    duration_us: float
    # start = base + start_gap (+ migration delay); base is the adjusted
    # parent start, or the max adjusted end over the anchor siblings
    anchor_ids: tuple[str, ...]
    start_gap_us: float
    children: tuple[str, ...]
    # end = max adjusted child event + end_gap for internal spans; events are
    # (child id, True when only the child's start matters, i.e. background)
    end_events: tuple[tuple[str, bool], ...]
    end_gap_us: float


@dataclass(frozen=True)
class CompiledTrace:
    trace_id: str
    api: str
    root_id: str
    root_start_us: float
    spans: Mapping[str, CompiledSpan]
    original_latency_us: float


@dataclass(frozen=True)
class AdjustedTrace:
    """Re-timed spans of one trace under a migration plan."""

    trace_id: str
    api: str
    times: Mapping[str, tuple[float, float]]  # span_id -> (start_us, end_us)
    latency_us: float
    original_latency_us: float


@dataclass(frozen=True)
class LatencyEstimate:
    """Per-API sample latencies under a plan, with the pre-migration samples."""

    api: str
    samples: tuple[float, ...]
    original_samples: tuple[float, ...]

    @property
    def mean_us(self) -> float:
        return sum(self.samples) / len(self.samples)

    @property
    def original_mean_us(self) -> float:
        return sum(self.original_samples) / len(self.original_samples)

    @property
    def ratio(self) -> float:
        return self.mean_us / self.original_mean_us


def compile_trace(
    trace: Trace, overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD
) -> CompiledTrace:
    """Precompute anchors, gaps, and relations for fast re-timing."""
    tree = build_span_tree(trace)
    compiled: dict[str, CompiledSpan] = {}

    def compile_span(span) -> None:
        kids = tree.children_of(span)
        parent = tree.parent_of(span)
        siblings = tree.children_of(parent) if parent is not None else ()
        anchors = []
        if parent is not None:
            mine = [s for s in siblings if s.span_id == span.span_id][0]
            earlier = siblings[: siblings.index(mine)]
            anchors = [
                m
                for m in earlier
                if not is_background(m, parent)
                and classify_pair(m, span, overlap_threshold)
                is ExecutionRelation.SEQUENTIAL
            ]
        if anchors:
            base_orig = max(m.end_us for m in anchors)
        elif parent is not None:
            base_orig = parent.start_us
        else:
            base_orig = span.start_us
        end_events = []
        events = []
        for child in kids:
            bg = is_background(child, span)
            end_events.append((child.span_id, bg))
            events.append(child.start_us if bg else child.end_us)
        end_gap = float(span.end_us - max(events)) if kids else 0.0
        compiled[span.span_id] = CompiledSpan(
            span_id=span.span_id,
            component=span.component,
            parent_component=(parent.component if parent is not None else None),
            duration_us=float(span.duration_us),
            anchor_ids=tuple(m.span_id for m in anchors),
            start_gap_us=float(span.start_us - base_orig),
            children=tuple(c.span_id for c in kids),
            end_events=tuple(end_events),
            end_gap_us=end_gap,
        )
        for child in kids:
            compile_span(child)

    compile_span(tree.root)
    return CompiledTrace(
        trace_id=trace.trace_id,
        api=trace.api,
        root_id=tree.root.span_id,
        root_start_us=float(tree.root.start_us),
        spans=compiled,
        original_latency_us=float(tree.root.duration_us),
    )


def inject_compiled(
    compiled: CompiledTrace,
    plan: MigrationPlan,
    footprint: NetworkFootprint,
    links: LinkParams,
) -> AdjustedTrace:
    """Re-time a compiled trace under a plan."""
    spans = compiled.spans
    times: dict[str, tuple[float, float]] = {}

    delay_cache: dict[tuple[str, str], float] = {}

    def edge_delay(src: str, dst: str) -> float:
        if src == dst or not plan.split(src, dst):
            return 0.0
        key = (src, dst)
        if key not in delay_cache:
            rtt = footprint.round_trip_bytes(compiled.api, src, dst)
            delay_cache[key] = compute_delay(rtt, links) * 1e6
        return delay_cache[key]

    def process(span_id: str, new_start: float) -> None:
        cs = spans[span_id]
        if not cs.children:
            times[span_id] = (new_start, new_start + cs.duration_us)
            return
        dispatches: dict[str, float] = {}
        for child_id in cs.children:
            child = spans[child_id]
            if child.anchor_ids:
                base = max(times[a][1] for a in child.anchor_ids)
            else:
                base = new_start
            delay = edge_delay(cs.component, child.component)
            # dispatch happens locally; the delay only defers the child
            dispatch = max(base + child.start_gap_us, new_start)
            dispatches[child_id] = dispatch
            process(child_id, max(dispatch + delay, new_start))
        max_event = max(
            (dispatches[cid] if bg else times[cid][1]) for cid, bg in cs.end_events
        )
        times[span_id] = (new_start, max(max_event + cs.end_gap_us, new_start))

    for cs in spans.values():
        if cs.component not in plan.placement:
            raise ValueError(f"component {cs.component!r} not covered by plan")
    process(compiled.root_id, compiled.root_start_us)
    start, end = times[compiled.root_id]
    return AdjustedTrace(
        trace_id=compiled.trace_id,
        api=compiled.api,
        times=times,
        latency_us=end - start,
        original_latency_us=compiled.original_latency_us,
    )


def inject_delays(
    trace: Trace,
    plan: MigrationPlan,
    footprint: NetworkFootprint,
    links: LinkParams,
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
) -> AdjustedTrace:
    """Re-time one trace under a plan and return the adjusted span times."""
    return inject_compiled(compile_trace(trace, overlap_threshold), plan, footprint, links)


def estimate_api_latency(
    traces: Sequence[Trace | CompiledTrace],
    plan: MigrationPlan,
    footprint: NetworkFootprint,
    links: LinkParams,
    sample_budget: int = DEFAULT_SAMPLE_BUDGET,
    overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD,
) -> LatencyEstimate:
    """Inject delays on up to ``sample_budget`` traces of one API."""
    if not traces:
        raise ValueError("need at least one trace")
    compiled = [
        t if isinstance(t, CompiledTrace) else compile_trace(t, overlap_threshold)
        for t in traces
    ]
    apis = {t.api for t in compiled}
    if len(apis) != 1:
        raise ValueError(f"traces span multiple apis: {sorted(apis)}")
    chosen = sorted(compiled, key=lambda t: t.trace_id)[:sample_budget]
    samples, originals = [], []
    for ct in chosen:
        adjusted = inject_compiled(ct, plan, footprint, links)
        samples.append(adjusted.latency_us)
        originals.append(adjusted.original_latency_us)
    return LatencyEstimate(apis.pop(), tuple(samples), tuple(originals))


def q_perf(estimates: Mapping[str, LatencyEstimate], prefs: Preferences) -> float:
    """Weighted mean latency ratio over all APIs (1.0 = no impact)."""
    if not estimates:
        raise ValueError("no latency estimates")
    total = 0.0
    for api in sorted(estimates):
        total += prefs.api_weight(api) * estimates[api].ratio
    return total / len(estimates)
