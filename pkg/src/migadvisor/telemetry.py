"""Telemetry ingestion: traces, resource metrics, pairwise traffic, catalog.

All inputs are line-delimited JSON, one record per line.  Loaders reject
malformed records individually (with line diagnostics) instead of failing
the whole file.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional

ONPREM = "onprem"
CLOUD = "cloud"
LOCATIONS = (ONPREM, CLOUD)

RESOURCES = ("cpu", "memory", "storage")


class TelemetryError(Exception):
    """Raised for unrecoverable telemetry input problems."""


@dataclass(frozen=True)
class Span:
    """One timed operation within a trace."""

    trace_id: str
    span_id: str
    parent_span_id: Optional[str]
    component: str
    operation: str
    start_us: int
    duration_us: int

    @property
    def end_us(self) -> int:
        return self.start_us + self.duration_us

    @property
    def is_root(self) -> bool:
        return self.parent_span_id is None


@dataclass(frozen=True)
class Trace:
    """A tree of spans describing one end-to-end API request."""

    trace_id: str
    api: str
    spans: tuple[Span, ...]

    @property
    def root(self) -> Span:
        for s in self.spans:
            if s.is_root:
                return s
        raise TelemetryError(f"trace {self.trace_id} has no root span")


@dataclass(frozen=True)
class ComponentUsageSeries:
    """Time-ordered usage samples for one component/resource pair."""

    component: str
    resource: str
    samples: tuple[tuple[int, float], ...]  # (window_start, value)


@dataclass(frozen=True)
class PairwiseTrafficWindow:
    """Bytes exchanged between two components within one window."""

    src: str
    dst: str
    window_start: int
    window_len_s: float
    req_bytes: float
    resp_bytes: float


@dataclass(frozen=True)
class ComponentInfo:
    name: str
    stateful: bool
    original_location: str


@dataclass
class ComponentCatalog:
    """Component inventory with statefulness and original placement."""

    components: dict[str, ComponentInfo] = field(default_factory=dict)

    def __contains__(self, name: str) -> bool:
        return name in self.components

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.components))

    def __len__(self) -> int:
        return len(self.components)

    def info(self, name: str) -> ComponentInfo:
        return self.components[name]

    def is_stateful(self, name: str) -> bool:
        return self.components[name].stateful

    def original_location(self, name: str) -> str:
        return self.components[name].original_location

    def names(self) -> list[str]:
        return sorted(self.components)


@dataclass
class LoadReport:
    """Per-file ingestion diagnostics."""

    accepted: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)

    def reject(self, line_no: int, reason: str) -> None:
        self.rejected.append((line_no, reason))


def _iter_jsonl(path: Path) -> Iterator[tuple[int, str]]:
    try:
        text = path.read_text()
    except OSError as exc:
        raise TelemetryError(f"cannot read {path}: {exc}") from exc
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if line:
            yield line_no, line


def _parse_trace(record: dict) -> Trace:
    spans = []
    for raw in record["spans"]:
        spans.append(
            Span(
                trace_id=record["trace_id"],
                span_id=str(raw["span_id"]),
                parent_span_id=(
                    str(raw["parent_span_id"])
                    if raw.get("parent_span_id") is not None
                    else None
                ),
                component=str(raw["component"]),
                operation=str(raw.get("operation", "")),
                start_us=int(raw["start_us"]),
                duration_us=int(raw["duration_us"]),
            )
        )
    trace = Trace(trace_id=str(record["trace_id"]), api=str(record["api"]), spans=tuple(spans))
    validate_trace(trace)
    return trace


def validate_trace(trace: Trace) -> None:
    """Enforce structural invariants; raises ValueError on violation."""
    if not trace.spans:
        raise ValueError("trace has no spans")
    roots = [s for s in trace.spans if s.is_root]
    if len(roots) != 1:
        raise ValueError(f"expected exactly one root span, found {len(roots)}")
    by_id = {s.span_id: s for s in trace.spans}
    if len(by_id) != len(trace.spans):
        raise ValueError("duplicate span ids")
    for s in trace.spans:
        if s.duration_us < 0:
            raise ValueError(f"span {s.span_id} has negative duration")
        if s.parent_span_id is not None:
            parent = by_id.get(s.parent_span_id)
            if parent is None:
                raise ValueError(f"span {s.span_id} references missing parent {s.parent_span_id}")
            if s.start_us < parent.start_us:
                raise ValueError(f"span {s.span_id} starts before its parent")
    # reachability from root guards against cycles among non-root spans
    children: dict[str, list[str]] = defaultdict(list)
    for s in trace.spans:
        if s.parent_span_id is not None:
            children[s.parent_span_id].append(s.span_id)
    seen = set()
    stack = [roots[0].span_id]
    while stack:
        sid = stack.pop()
        if sid in seen:
            raise ValueError("cycle detected among spans")
        seen.add(sid)
        stack.extend(children[sid])
    if len(seen) != len(trace.spans):
        raise ValueError("spans not reachable from root")


def load_traces(path: str | Path, report: Optional[LoadReport] = None) -> list[Trace]:
    """Load traces from a line-delimited JSON file.

    Structurally invalid records are skipped and recorded in ``report``.
    """
    report = report if report is not None else LoadReport()
    traces = []
    for line_no, line in _iter_jsonl(Path(path)):
        try:
            record = json.loads(line)
            traces.append(_parse_trace(record))
            report.accepted += 1
        except (ValueError, KeyError, TypeError) as exc:
            report.reject(line_no, str(exc))
    return traces


def load_usage_series(path: str | Path, report: Optional[LoadReport] = None) -> list[ComponentUsageSeries]:
    report = report if report is not None else LoadReport()
    grouped: dict[tuple[str, str], list[tuple[int, float]]] = defaultdict(list)
    for line_no, line in _iter_jsonl(Path(path)):
        try:
            rec = json.loads(line)
            resource = str(rec["resource"])
            if resource not in RESOURCES:
                raise ValueError(f"unknown resource {resource!r}")
            value = float(rec["value"])
            if value < 0:
                raise ValueError("negative usage value")
            grouped[(str(rec["component"]), resource)].append((int(rec["window_start"]), value))
            report.accepted += 1
        except (ValueError, KeyError, TypeError) as exc:
            report.reject(line_no, str(exc))
    series = []
    for (component, resource), samples in sorted(grouped.items()):
        samples.sort()
        starts = [w for w, _ in samples]
        if len(set(starts)) != len(starts):
            raise TelemetryError(f"duplicate window_start for {component}/{resource}")
        series.append(ComponentUsageSeries(component, resource, tuple(samples)))
    return series


def load_traffic_windows(path: str | Path, report: Optional[LoadReport] = None) -> list[PairwiseTrafficWindow]:
    report = report if report is not None else LoadReport()
    windows = []
    for line_no, line in _iter_jsonl(Path(path)):
        try:
            rec = json.loads(line)
            src, dst = str(rec["src"]), str(rec["dst"])
            if src == dst:
                raise ValueError("src equals dst")
            wlen = float(rec.get("window_len_s", 5))
            if wlen <= 0:
                raise ValueError("non-positive window length")
            req_b, resp_b = float(rec["req_bytes"]), float(rec["resp_bytes"])
            if req_b < 0 or resp_b < 0:
                raise ValueError("negative byte count")
            windows.append(
                PairwiseTrafficWindow(src, dst, int(rec["window_start"]), wlen, req_b, resp_b)
            )
            report.accepted += 1
        except (ValueError, KeyError, TypeError) as exc:
            report.reject(line_no, str(exc))
    return windows


def load_catalog(path: str | Path) -> ComponentCatalog:
    catalog = ComponentCatalog()
    for line_no, line in _iter_jsonl(Path(path)):
        try:
            rec = json.loads(line)
            name = str(rec["name"])
            location = str(rec["original_location"])
            if location not in LOCATIONS:
                raise ValueError(f"unknown location {location!r}")
            if name in catalog.components:
                raise ValueError(f"duplicate component {name!r}")
            catalog.components[name] = ComponentInfo(name, bool(rec["stateful"]), location)
        except (ValueError, KeyError, TypeError) as exc:
            raise TelemetryError(f"{path}:{line_no}: {exc}") from exc
    return catalog


def check_catalog_coverage(
    catalog: ComponentCatalog,
    traces: Iterable[Trace],
    traffic: Iterable[PairwiseTrafficWindow],
) -> None:
    """Every component referenced by a span or traffic window must be cataloged."""
    missing = set()
    for trace in traces:
        for span in trace.spans:
            if span.component not in catalog:
                missing.add(span.component)
    for window in traffic:
        for name in (window.src, window.dst):
            if name not in catalog:
                missing.add(name)
    if missing:
        raise TelemetryError(f"components missing from catalog: {sorted(missing)}")


def window_index(start_us: int, window_len_s: float) -> int:
    """Epoch-aligned window index for a span start timestamp."""
    return int(start_us // int(round(window_len_s * 1_000_000)))


# invocation counts: {api: {(src, dst): {window_index: count}}}
InvocationCounts = dict[str, dict[tuple[str, str], dict[int, int]]]


def count_invocations(traces: Iterable[Trace], window_len_s: float = 5.0) -> InvocationCounts:
    """Count parent->child span edges per api, directed pair, and window.

    A span edge is assigned to the window containing the child span's start.
    """
    counts: InvocationCounts = {}
    for trace in traces:
        by_id = {s.span_id: s for s in trace.spans}
        per_api = counts.setdefault(trace.api, {})
        for span in trace.spans:
            if span.parent_span_id is None:
                continue
            parent = by_id[span.parent_span_id]
            if parent.component == span.component:
                continue  # in-process call, no network edge
            edge = (parent.component, span.component)
            widx = window_index(span.start_us, window_len_s)
            per_edge = per_api.setdefault(edge, {})
            per_edge[widx] = per_edge.get(widx, 0) + 1
    return counts


def group_traces_by_api(traces: Iterable[Trace]) -> dict[str, list[Trace]]:
    grouped: dict[str, list[Trace]] = defaultdict(list)
    for trace in traces:
        grouped[trace.api].append(trace)
    return dict(grouped)
