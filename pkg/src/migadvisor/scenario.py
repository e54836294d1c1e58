"""Synthetic scenario generation and a discrete-event latency oracle.

Topologies describe components, per-API call trees with execution relations,
and true per-edge payload sizes.  The generator emits telemetry corpora
(traces, resource metrics, pairwise traffic, catalog) consistent with those
ground truths; the oracle replays a call tree under a candidate plan to
provide an independent latency reference for the delay-injection estimator.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .footprint import FootprintEntry, LinkParams, NetworkFootprint, compute_delay
from .plans import MigrationPlan
from .quality import ExpectedUsage
from .telemetry import (
    ONPREM,
    ComponentCatalog,
    ComponentInfo,
    PairwiseTrafficWindow,
    Span,
    Trace,
)

PARALLEL = "parallel"
SEQUENTIAL = "sequential"
BACKGROUND = "background"


@dataclass(frozen=True)
class CallNode:
    """One invocation in an API call tree.

    ``relation`` positions the node against its preceding sibling group:
    sequential/background nodes start after all earlier foreground siblings
    finish, parallel nodes share the previous sibling's anchor.  Background
    nodes outlive their parent and never delay its response.
    """

    component: str
    operation: str = "op"
    relation: str = SEQUENTIAL
    pre_gap_us: int = 1000
    service_us: int = 10000  # leaf duration; for internal nodes: response tail
    req_bytes: float = 0.0
    resp_bytes: float = 0.0
    children: tuple["CallNode", ...] = ()


@dataclass(frozen=True)
class ComponentSpec:
    name: str
    stateful: bool = False
    cpu_per_req: float = 0.01  # cores consumed per handled span
    mem_per_req: float = 0.02  # GB
    base_cpu: float = 0.05
    base_mem: float = 0.1
    storage_gb: float = 0.0


@dataclass
class AppTopology:
    """Components plus one call tree per API with true payload sizes."""

    components: dict[str, ComponentSpec]
    apis: dict[str, CallNode]

    def __post_init__(self) -> None:
        for api, root in self.apis.items():
            for node in iter_nodes(root):
                if node.component not in self.components:
                    raise ValueError(f"{api}: unknown component {node.component!r}")

    def catalog(self, original: Optional[MigrationPlan] = None) -> ComponentCatalog:
        catalog = ComponentCatalog()
        for name, spec in sorted(self.components.items()):
            location = original.location(name) if original is not None else ONPREM
            catalog.components[name] = ComponentInfo(name, spec.stateful, location)
        return catalog

    def true_footprint(self) -> NetworkFootprint:
        """Per-API mean payload sizes of every parent->child edge."""
        fp = NetworkFootprint()
        for api, root in sorted(self.apis.items()):
            sums: dict[tuple[str, str], list[float]] = {}
            counts: dict[tuple[str, str], int] = {}
            for parent, child in iter_edges(root):
                if parent.component == child.component:
                    continue
                edge = (parent.component, child.component)
                acc = sums.setdefault(edge, [0.0, 0.0])
                acc[0] += child.req_bytes
                acc[1] += child.resp_bytes
                counts[edge] = counts.get(edge, 0) + 1
            for edge, (req, resp) in sums.items():
                n = counts[edge]
                fp.add(FootprintEntry(api, edge[0], edge[1], req / n, resp / n))
        return fp

    def edge_calls_per_request(self, api: str) -> dict[tuple[str, str], int]:
        calls: dict[tuple[str, str], int] = {}
        for parent, child in iter_edges(self.apis[api]):
            if parent.component == child.component:
                continue
            edge = (parent.component, child.component)
            calls[edge] = calls.get(edge, 0) + 1
        return calls

    def spans_per_request(self, api: str) -> dict[str, int]:
        spans: dict[str, int] = {}
        for node in iter_nodes(self.apis[api]):
            spans[node.component] = spans.get(node.component, 0) + 1
        return spans


def iter_nodes(root: CallNode) -> Iterable[CallNode]:
    yield root
    for child in root.children:
        yield from iter_nodes(child)


def iter_edges(root: CallNode) -> Iterable[tuple[CallNode, CallNode]]:
    for child in root.children:
        yield root, child
        yield from iter_edges(child)


@dataclass(frozen=True)
class WorkloadSpec:
    """Per-API expected request counts per telemetry window."""

    window_len_s: float
    num_windows: int
    rates: dict[str, tuple[float, ...]]  # api -> expected requests per window

    @staticmethod
    def two_peak_daily(
        apis: dict[str, float],
        num_windows: int,
        window_len_s: float = 5.0,
        user_multiplier: float = 1.0,
        peak_amplitude: float = 0.8,
    ) -> "WorkloadSpec":
        """Day-shaped load: two peaks at 35% and 80% of the horizon."""
        rates = {}
        phase = {api: i for i, api in enumerate(sorted(apis))}
        for api, base in sorted(apis.items()):
            xs = np.arange(num_windows) / max(num_windows - 1, 1)
            # phase offsets decorrelate the per-api count vectors
            p1 = 0.35 + 0.05 * (phase[api] % 3)
            p2 = 0.80 - 0.04 * (phase[api] % 3)
            shape = (
                1.0
                + peak_amplitude * np.exp(-(((xs - p1) / 0.08) ** 2))
                + peak_amplitude * np.exp(-(((xs - p2) / 0.06) ** 2))
            )
            rates[api] = tuple(float(v) for v in base * user_multiplier * shape)
        return WorkloadSpec(window_len_s, num_windows, rates)


@dataclass
class GroundTruth:
    """Generator bookkeeping for oracle-style checks."""

    footprint: NetworkFootprint
    request_counts: dict[str, tuple[int, ...]]  # api -> realized requests per window
    invocation_counts: dict  # api -> edge -> window -> count (by child start)

    def save(self, path: str | Path) -> None:
        data = {
            "request_counts": {a: list(v) for a, v in self.request_counts.items()},
            "invocations": [
                {"api": api, "src": e[0], "dst": e[1], "windows": {str(w): n for w, n in per_w.items()}}
                for api, per_edge in self.invocation_counts.items()
                for e, per_w in per_edge.items()
            ],
        }
        Path(path).write_text(json.dumps(data, sort_keys=True))


def _duration_multiplier(rng: Optional[np.random.Generator], sigma: float) -> float:
    if rng is None or sigma <= 0:
        return 1.0
    # mean-preserving log-normal jitter
    return float(np.exp(rng.normal(-0.5 * sigma * sigma, sigma)))


def simulate_request(
    topology: AppTopology,
    api: str,
    start_us: float,
    plan: MigrationPlan,
    links: LinkParams,
    rng: Optional[np.random.Generator] = None,
    sigma: float = 0.0,
    payload_scale: float = 1.0,
) -> list[dict]:
    """Event-driven replay of one request; returns raw span records."""
    records: list[dict] = []
    counter = [0]

    def execute(node: CallNode, start: float, parent_idx: Optional[int]) -> tuple[int, float, float]:
        idx = counter[0]
        counter[0] += 1
        rec = {
            "idx": idx,
            "parent_idx": parent_idx,
            "component": node.component,
            "operation": node.operation,
            "start": start,
            "end": 0.0,
            "req_bytes": node.req_bytes * payload_scale,
            "resp_bytes": node.resp_bytes * payload_scale,
        }
        records.append(rec)
        if not node.children:
            end = start + node.service_us * _duration_multiplier(rng, sigma)
            rec["end"] = end
            return idx, start, end
        fg_ends: list[float] = []
        events: list[float] = []
        group_anchor = start
        for child in node.children:
            if child.relation == PARALLEL:
                anchor = group_anchor
            else:
                anchor = max(fg_ends) if fg_ends else start
                group_anchor = anchor
            delay = 0.0
            if child.component != node.component and plan.split(node.component, child.component):
                rtt = (child.req_bytes + child.resp_bytes) * payload_scale
                delay = compute_delay(rtt, links) * 1e6
            dispatch = max(anchor + child.pre_gap_us, start)
            child_start = max(dispatch + delay, start)
            _, c_start, c_end = execute(child, child_start, idx)
            if child.relation == BACKGROUND:
                # the parent responds after firing the call, not after the
                # remote child actually starts
                events.append(dispatch)
            else:
                fg_ends.append(c_end)
                events.append(c_end)
        end = max(events) + node.service_us
        rec["end"] = end
        return idx, start, end

    execute(topology.apis[api], start_us, None)
    return records


def oracle_latency(
    topology: AppTopology,
    plan: MigrationPlan,
    links: LinkParams,
    api: str,
    n_samples: int = 100,
    rng: Optional[np.random.Generator] = None,
    sigma: float = 0.0,
) -> float:
    """Mean end-to-end latency (us) of one API under a plan, by replay."""
    total = 0.0
    for _ in range(max(n_samples, 1)):
        records = simulate_request(topology, api, 0.0, plan, links, rng, sigma)
        root = records[0]
        total += root["end"] - root["start"]
    return total / max(n_samples, 1)


@dataclass
class Corpus:
    """In-memory telemetry corpus plus its generation ground truth."""

    traces: list[Trace]
    traffic_records: list[PairwiseTrafficWindow]
    metric_records: list[dict]
    catalog: ComponentCatalog
    truth: GroundTruth


def generate_corpus(
    topology: AppTopology,
    workload: WorkloadSpec,
    links: LinkParams,
    plan: Optional[MigrationPlan] = None,
    rng: Optional[np.random.Generator] = None,
    sigma: float = 0.0,
    traffic_noise: float = 0.0,
    deterministic_counts: bool = False,
    payload_scale_from_window: Optional[dict[int, float]] = None,
) -> Corpus:
    """Emit traces, traffic windows, and metrics consistent with the topology.

    ``payload_scale_from_window`` scales true payload sizes starting at given
    windows (used to emulate footprint drift and traffic anomalies).
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    if plan is None:
        plan = MigrationPlan({c: ONPREM for c in topology.components})
    window_us = int(round(workload.window_len_s * 1_000_000))

    traces: list[Trace] = []
    # (src, dst) -> window -> [req_bytes, resp_bytes]
    traffic: dict[tuple[str, str], dict[int, list[float]]] = {}
    # component -> window -> span count
    activity: dict[str, dict[int, int]] = {}
    request_counts: dict[str, list[int]] = {}
    invocation_counts: dict[str, dict[tuple[str, str], dict[int, int]]] = {}

    def payload_scale_at(window: int) -> float:
        if not payload_scale_from_window:
            return 1.0
        scale = 1.0
        for start_w in sorted(payload_scale_from_window):
            if window >= start_w:
                scale = payload_scale_from_window[start_w]
        return scale

    for api in sorted(workload.rates):
        rates = workload.rates[api]
        per_api_counts = []
        for w, rate in enumerate(rates):
            if deterministic_counts:
                n = int(round(rate))
            else:
                n = int(rng.poisson(rate))
            per_api_counts.append(n)
            scale = payload_scale_at(w)
            for i in range(n):
                offset = float(rng.uniform(0, window_us * 0.9))
                start = w * window_us + offset
                records = simulate_request(
                    topology, api, start, plan, links, rng, sigma, payload_scale=scale
                )
                trace_id = f"{api.strip('/')}-{w:05d}-{i:04d}"
                spans = []
                for rec in records:
                    spans.append(
                        Span(
                            trace_id=trace_id,
                            span_id=f"s{rec['idx']:03d}",
                            parent_span_id=(
                                f"s{rec['parent_idx']:03d}"
                                if rec["parent_idx"] is not None
                                else None
                            ),
                            component=rec["component"],
                            operation=rec["operation"],
                            start_us=int(round(rec["start"])),
                            duration_us=max(int(round(rec["end"] - rec["start"])), 0),
                        )
                    )
                traces.append(Trace(trace_id, api, tuple(spans)))
                by_idx = {rec["idx"]: rec for rec in records}
                for rec in records:
                    comp_w = int(rec["start"] // window_us)
                    per_comp = activity.setdefault(rec["component"], {})
                    per_comp[comp_w] = per_comp.get(comp_w, 0) + 1
                    if rec["parent_idx"] is None:
                        continue
                    parent = by_idx[rec["parent_idx"]]
                    if parent["component"] == rec["component"]:
                        continue
                    edge = (parent["component"], rec["component"])
                    child_w = int(rec["start"] // window_us)
                    cell = traffic.setdefault(edge, {}).setdefault(child_w, [0.0, 0.0])
                    cell[0] += rec["req_bytes"]
                    cell[1] += rec["resp_bytes"]
                    per_edge = invocation_counts.setdefault(api, {}).setdefault(edge, {})
                    per_edge[child_w] = per_edge.get(child_w, 0) + 1
        request_counts[api] = per_api_counts

    traffic_records = []
    for (src, dst), per_window in sorted(traffic.items()):
        for w, (req_b, resp_b) in sorted(per_window.items()):
            if traffic_noise > 0:
                req_b *= max(float(rng.normal(1.0, traffic_noise)), 0.0)
                resp_b *= max(float(rng.normal(1.0, traffic_noise)), 0.0)
            traffic_records.append(
                PairwiseTrafficWindow(
                    src=src,
                    dst=dst,
                    window_start=w * window_us,
                    window_len_s=workload.window_len_s,
                    req_bytes=req_b,
                    resp_bytes=resp_b,
                )
            )

    metric_records = []
    for name in sorted(topology.components):
        spec = topology.components[name]
        windows = sorted(activity.get(name, {}))
        for w in windows:
            n = activity[name][w]
            metric_records.append(
                {
                    "component": name,
                    "resource": "cpu",
                    "window_start": w * window_us,
                    "value": spec.base_cpu + spec.cpu_per_req * n,
                }
            )
            metric_records.append(
                {
                    "component": name,
                    "resource": "memory",
                    "window_start": w * window_us,
                    "value": spec.base_mem + spec.mem_per_req * n,
                }
            )
        if spec.storage_gb > 0:
            for w in windows or [0]:
                metric_records.append(
                    {
                        "component": name,
                        "resource": "storage",
                        "window_start": w * window_us,
                        "value": spec.storage_gb,
                    }
                )

    truth = GroundTruth(
        footprint=topology.true_footprint(),
        request_counts={a: tuple(v) for a, v in request_counts.items()},
        invocation_counts=invocation_counts,
    )
    return Corpus(
        traces=traces,
        traffic_records=traffic_records,
        metric_records=metric_records,
        catalog=topology.catalog(plan),
        truth=truth,
    )


def write_corpus(corpus: Corpus, directory: str | Path) -> None:
    """Write a corpus as the four line-delimited telemetry files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "traces.jsonl", "w") as fh:
        for trace in corpus.traces:
            fh.write(
                json.dumps(
                    {
                        "trace_id": trace.trace_id,
                        "api": trace.api,
                        "spans": [
                            {
                                "span_id": s.span_id,
                                "parent_span_id": s.parent_span_id,
                                "component": s.component,
                                "operation": s.operation,
                                "start_us": s.start_us,
                                "duration_us": s.duration_us,
                            }
                            for s in trace.spans
                        ],
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    with open(directory / "traffic.jsonl", "w") as fh:
        for w in corpus.traffic_records:
            fh.write(
                json.dumps(
                    {
                        "src": w.src,
                        "dst": w.dst,
                        "window_start": w.window_start,
                        "window_len_s": w.window_len_s,
                        "req_bytes": w.req_bytes,
                        "resp_bytes": w.resp_bytes,
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    with open(directory / "metrics.jsonl", "w") as fh:
        for rec in corpus.metric_records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    with open(directory / "catalog.jsonl", "w") as fh:
        for name in corpus.catalog:
            info = corpus.catalog.info(name)
            fh.write(
                json.dumps(
                    {
                        "name": info.name,
                        "stateful": info.stateful,
                        "original_location": info.original_location,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def expected_usage(
    topology: AppTopology,
    workload: WorkloadSpec,
    cost_window_s: float = 600.0,
) -> ExpectedUsage:
    """Expected resource/traffic demand on the cost grid implied by the workload."""
    ratio = cost_window_s / workload.window_len_s
    if abs(ratio - round(ratio)) > 1e-9:
        raise ValueError("cost window must be a multiple of the telemetry window")
    per_cost = int(round(ratio))
    num_cost_windows = math.ceil(workload.num_windows / per_cost)

    spans_per_req = {api: topology.spans_per_request(api) for api in workload.rates}
    calls_per_req = {api: topology.edge_calls_per_request(api) for api in workload.rates}
    footprint = topology.true_footprint()

    usage: dict[tuple[str, str], list[float]] = {}
    traffic: dict[tuple[str, str], list[float]] = {}
    for name, spec in sorted(topology.components.items()):
        cpu = [spec.base_cpu] * num_cost_windows
        mem = [spec.base_mem] * num_cost_windows
        for api, rates in workload.rates.items():
            n_spans = spans_per_req[api].get(name, 0)
            if not n_spans:
                continue
            for w, rate in enumerate(rates):
                cw = w // per_cost
                # mean concurrent demand within the cost window
                cpu[cw] += spec.cpu_per_req * rate * n_spans / per_cost
                mem[cw] += spec.mem_per_req * rate * n_spans / per_cost
        usage[(name, "cpu")] = cpu
        usage[(name, "memory")] = mem
        if spec.storage_gb > 0:
            usage[(name, "storage")] = [spec.storage_gb] * num_cost_windows

    for api, rates in workload.rates.items():
        for edge, calls in calls_per_req[api].items():
            entry = footprint.get(api, *edge)
            d_req = entry.d_req if entry else 0.0
            d_resp = entry.d_resp if entry else 0.0
            fwd = traffic.setdefault(edge, [0.0] * num_cost_windows)
            rev = traffic.setdefault((edge[1], edge[0]), [0.0] * num_cost_windows)
            for w, rate in enumerate(rates):
                cw = w // per_cost
                fwd[cw] += rate * calls * d_req
                rev[cw] += rate * calls * d_resp

    return ExpectedUsage(
        window_len_s=cost_window_s,
        num_windows=num_cost_windows,
        usage={k: tuple(v) for k, v in usage.items()},
        traffic={k: tuple(v) for k, v in traffic.items()},
    )
