"""End-to-end assembly: telemetry files in, evaluation context out."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .footprint import LinkParams, NetworkFootprint, learn_full_footprint
from .plans import Preferences
from .quality import EvaluationContext, ExpectedUsage, PricingCatalog
from .telemetry import (
    ComponentCatalog,
    LoadReport,
    PairwiseTrafficWindow,
    Trace,
    count_invocations,
    group_traces_by_api,
    load_catalog,
    load_traces,
    load_traffic_windows,
)
from .workflow import components_of_api

DEFAULT_WINDOW_LEN_S = 5.0

TRACES_FILE = "traces.jsonl"
TRAFFIC_FILE = "traffic.jsonl"
CATALOG_FILE = "catalog.jsonl"
USAGE_FILE = "usage.json"
LINKS_FILE = "links.json"

# measured one-way latency / bandwidth of a typical local link and a typical
# on-prem to cloud link
DEFAULT_LINKS = LinkParams.from_network(0.168, 941.0, 23.015, 921.0)


def save_links(links: LinkParams, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(
            {
                "gamma_before": links.gamma_before,
                "gamma_after": links.gamma_after,
                "nu_before": links.nu_before,
                "nu_after": links.nu_after,
            },
            sort_keys=True,
        )
    )


def load_links(path: str | Path) -> LinkParams:
    data = json.loads(Path(path).read_text())
    return LinkParams(
        gamma_before=float(data["gamma_before"]),
        gamma_after=float(data["gamma_after"]),
        nu_before=float(data["nu_before"]),
        nu_after=float(data["nu_after"]),
    )


def links_for_dir(directory: str | Path) -> LinkParams:
    path = Path(directory) / LINKS_FILE
    return load_links(path) if path.exists() else DEFAULT_LINKS


@dataclass
class TelemetryBundle:
    """Everything loaded from one telemetry directory."""

    traces: list[Trace]
    traffic: list[PairwiseTrafficWindow]
    catalog: ComponentCatalog
    usage: Optional[ExpectedUsage]
    report: LoadReport


def load_telemetry_dir(directory: str | Path) -> TelemetryBundle:
    directory = Path(directory)
    report = LoadReport()
    traces = load_traces(directory / TRACES_FILE, report)
    traffic = load_traffic_windows(directory / TRAFFIC_FILE, report)
    catalog = load_catalog(directory / CATALOG_FILE)
    usage_path = directory / USAGE_FILE
    usage = ExpectedUsage.load(usage_path) if usage_path.exists() else None
    return TelemetryBundle(traces, traffic, catalog, usage, report)


def learn_model(
    traces: Sequence[Trace],
    traffic: Sequence[PairwiseTrafficWindow],
    window_len_s: float = DEFAULT_WINDOW_LEN_S,
) -> NetworkFootprint:
    """Fit per-edge request/response sizes from traces and traffic counters."""
    counts = count_invocations(traces, window_len_s)
    return learn_full_footprint(traffic, counts, window_len_s)


def build_context(
    catalog: ComponentCatalog,
    traces: Sequence[Trace],
    footprint: NetworkFootprint,
    links: LinkParams,
    usage: ExpectedUsage,
    pricing: PricingCatalog,
    prefs: Optional[Preferences] = None,
    sample_budget: int = 100,
    overlap_threshold: float = 0.5,
) -> EvaluationContext:
    by_api = group_traces_by_api(traces)
    stateful_by_api: dict[str, set[str]] = {}
    for api, api_traces in by_api.items():
        _, stateful = components_of_api(api_traces, catalog)
        stateful_by_api[api] = stateful
    return EvaluationContext(
        catalog=catalog,
        traces_by_api=by_api,
        stateful_by_api=stateful_by_api,
        footprint=footprint,
        links=links,
        usage=usage,
        pricing=pricing,
        prefs=prefs if prefs is not None else Preferences(),
        sample_budget=sample_budget,
        overlap_threshold=overlap_threshold,
    )


def context_from_dir(
    directory: str | Path,
    links: LinkParams,
    pricing: PricingCatalog,
    prefs: Optional[Preferences] = None,
    window_len_s: float = DEFAULT_WINDOW_LEN_S,
    sample_budget: int = 100,
    overlap_threshold: float = 0.5,
) -> tuple[EvaluationContext, TelemetryBundle]:
    """Load a telemetry directory, learn the footprint, and build a context."""
    bundle = load_telemetry_dir(directory)
    if bundle.usage is None:
        raise FileNotFoundError(f"{USAGE_FILE} missing in {directory}")
    footprint = learn_model(bundle.traces, bundle.traffic, window_len_s)
    context = build_context(
        bundle.catalog,
        bundle.traces,
        footprint,
        links,
        bundle.usage,
        pricing,
        prefs,
        sample_budget,
        overlap_threshold,
    )
    return context, bundle
