"""Span-tree construction and execution-relation classification.

Sibling spans are classified as parallel or sequential based on temporal
overlap; a child outliving its parent runs in the background and never
delays the parent's response.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .telemetry import ComponentCatalog, Span, Trace

DEFAULT_OVERLAP_THRESHOLD = 0.5


class ExecutionRelation(Enum):
    PARALLEL = "parallel"
    SEQUENTIAL = "sequential"
    BACKGROUND = "background"


class WorkflowError(Exception):
    pass


@dataclass
class SpanTree:
    """Parent/child adjacency over one trace, children ordered by start time."""

    trace: Trace
    root: Span
    children: dict[str, tuple[Span, ...]]  # parent span_id -> children
    parent: dict[str, Span]  # child span_id -> parent span

    def children_of(self, span: Span) -> tuple[Span, ...]:
        return self.children.get(span.span_id, ())

    def parent_of(self, span: Span) -> Span | None:
        return self.parent.get(span.span_id)


def build_span_tree(trace: Trace) -> SpanTree:
    roots = [s for s in trace.spans if s.is_root]
    if len(roots) != 1:
        raise WorkflowError(
            f"trace {trace.trace_id}: expected one root span, found {len(roots)}"
        )
    by_id = {s.span_id: s for s in trace.spans}
    children: dict[str, list[Span]] = {}
    parent: dict[str, Span] = {}
    for span in trace.spans:
        if span.parent_span_id is None:
            continue
        if span.parent_span_id not in by_id:
            raise WorkflowError(
                f"trace {trace.trace_id}: span {span.span_id} has dangling parent"
            )
        parent[span.span_id] = by_id[span.parent_span_id]
        children.setdefault(span.parent_span_id, []).append(span)
    ordered = {
        pid: tuple(sorted(kids, key=lambda s: (s.start_us, s.span_id)))
        for pid, kids in children.items()
    }
    tree = SpanTree(trace=trace, root=roots[0], children=ordered, parent=parent)
    # reachability doubles as a cycle check
    count, stack = 0, [roots[0]]
    while stack:
        span = stack.pop()
        count += 1
        if count > len(trace.spans):
            raise WorkflowError(f"trace {trace.trace_id}: cycle among spans")
        stack.extend(tree.children_of(span))
    if count != len(trace.spans):
        raise WorkflowError(f"trace {trace.trace_id}: unreachable spans")
    return tree


def classify_pair(
    a: Span, b: Span, overlap_threshold: float = DEFAULT_OVERLAP_THRESHOLD
) -> ExecutionRelation:
    """Classify two sibling spans as parallel or sequential.

    Parallel when the temporal overlap covers at least ``overlap_threshold``
    of the shorter sibling's duration.  Zero-duration spans are parallel only
    when their starts coincide (deterministic tie-break).
    """
    if a.parent_span_id != b.parent_span_id or a.trace_id != b.trace_id:
        raise WorkflowError("classify_pair requires siblings of the same trace")
    shorter = min(a.duration_us, b.duration_us)
    if shorter == 0:
        if a.start_us == b.start_us:
            return ExecutionRelation.PARALLEL
        return ExecutionRelation.SEQUENTIAL
    overlap = min(a.end_us, b.end_us) - max(a.start_us, b.start_us)
    if overlap >= overlap_threshold * shorter:
        return ExecutionRelation.PARALLEL
    return ExecutionRelation.SEQUENTIAL


def is_background(span: Span, parent: Span) -> bool:
    """True iff the span ends strictly after its parent ends."""
    if span.parent_span_id != parent.span_id:
        raise WorkflowError("is_background requires a valid parent link")
    return span.end_us > parent.end_us


def components_of_api(
    traces: Iterable[Trace], catalog: ComponentCatalog
) -> tuple[set[str], set[str]]:
    """Return (components used by the api, stateful subset)."""
    used: set[str] = set()
    for trace in traces:
        for span in trace.spans:
            used.add(span.component)
    stateful = {c for c in used if catalog.is_stateful(c)}
    return used, stateful
