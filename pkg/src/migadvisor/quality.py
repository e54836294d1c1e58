"""Plan quality scoring: availability, cloud hosting cost, and feasibility.

Cost covers compute nodes (autoscaled with headroom), autoscaled storage,
and cloud egress traffic.  Currency arithmetic uses exact decimals with four
fractional digits so billing sums are reproducible bit-for-bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .footprint import LinkParams, NetworkFootprint
from .latency import LatencyEstimate, compile_trace, estimate_api_latency, q_perf
from .plans import MigrationPlan, Preferences
from .telemetry import CLOUD, ONPREM, ComponentCatalog, Trace

CENT4 = Decimal("0.0001")
SECONDS_PER_HOUR = Decimal(3600)
BYTES_PER_GB = Decimal(10) ** 9


def _money(value: Decimal) -> Decimal:
    return value.quantize(CENT4)


@dataclass(frozen=True)
class ExpectedUsage:
    """Expected per-component resource demand and pairwise traffic over the horizon."""

    window_len_s: float
    num_windows: int
    usage: Mapping[tuple[str, str], tuple[float, ...]]  # (component, resource) -> values
    traffic: Mapping[tuple[str, str], tuple[float, ...]]  # (src, dst) -> bytes per window

    def series(self, component: str, resource: str) -> tuple[float, ...]:
        return self.usage.get((component, resource), (0.0,) * self.num_windows)

    def to_dict(self) -> dict:
        return {
            "window_len_s": self.window_len_s,
            "num_windows": self.num_windows,
            "usage": [
                {"component": c, "resource": r, "values": list(v)}
                for (c, r), v in sorted(self.usage.items())
            ],
            "traffic": [
                {"src": s, "dst": d, "values": list(v)}
                for (s, d), v in sorted(self.traffic.items())
            ],
        }

    @staticmethod
    def from_dict(data: Mapping) -> "ExpectedUsage":
        return ExpectedUsage(
            window_len_s=float(data["window_len_s"]),
            num_windows=int(data["num_windows"]),
            usage={
                (rec["component"], rec["resource"]): tuple(float(x) for x in rec["values"])
                for rec in data.get("usage", ())
            },
            traffic={
                (rec["src"], rec["dst"]): tuple(float(x) for x in rec["values"])
                for rec in data.get("traffic", ())
            },
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True))

    @staticmethod
    def load(path: str | Path) -> "ExpectedUsage":
        return ExpectedUsage.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class PricingCatalog:
    """Cloud node sizing and prices (hourly compute/storage, per-GB egress)."""

    omega_cpu: float  # cores per node
    omega_mem: float  # GB per node
    theta_compute_hourly: Decimal  # currency per node-hour
    theta_storage_gb_hourly: Decimal  # currency per GB-hour
    theta_traffic_gb: Decimal  # currency per GB of egress
    delta_cpu: float = 0.2
    delta_mem: float = 0.2
    delta_storage: float = 0.2
    kappa0_factor: float = 2.0  # initial capacity multiple of transferred data

    def __post_init__(self) -> None:
        if self.omega_cpu <= 0 or self.omega_mem <= 0:
            raise ValueError("node capacities must be positive")
        for d in (self.delta_cpu, self.delta_mem, self.delta_storage):
            if not 0 < d < 1:
                raise ValueError("headroom fractions must lie in (0, 1)")

    @staticmethod
    def from_dict(data: Mapping) -> "PricingCatalog":
        return PricingCatalog(
            omega_cpu=float(data["omega_cpu"]),
            omega_mem=float(data["omega_mem"]),
            theta_compute_hourly=Decimal(str(data["theta_compute_hourly"])),
            theta_storage_gb_hourly=Decimal(str(data["theta_storage_gb_hourly"])),
            theta_traffic_gb=Decimal(str(data["theta_traffic_gb"])),
            delta_cpu=float(data.get("delta_cpu", 0.2)),
            delta_mem=float(data.get("delta_mem", 0.2)),
            delta_storage=float(data.get("delta_storage", 0.2)),
            kappa0_factor=float(data.get("kappa0_factor", 2.0)),
        )

    @staticmethod
    def load(path: str | Path) -> "PricingCatalog":
        return PricingCatalog.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class QualityVector:
    """The three plan objectives, all minimized."""

    q_perf: float
    q_avai: float
    q_cost: Decimal

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.q_perf, self.q_avai, float(self.q_cost))

    def to_dict(self) -> dict:
        return {"q_perf": self.q_perf, "q_avai": self.q_avai, "q_cost": str(self.q_cost)}


def q_avai(
    plan: MigrationPlan,
    stateful_by_api: Mapping[str, set[str]],
    catalog: ComponentCatalog,
    prefs: Preferences,
    require_all_moved: bool = False,
) -> float:
    """Weighted count of APIs disrupted by stateful component relocation.

    By default an API is disrupted when any of its stateful components moves
    away from its original location; ``require_all_moved`` switches to the
    stricter all-moved reading.
    """
    score = 0.0
    for api in sorted(stateful_by_api):
        stateful = stateful_by_api[api]
        if not stateful:
            continue
        moved = [plan.location(c) != catalog.original_location(c) for c in stateful]
        disrupted = all(moved) if require_all_moved else any(moved)
        if disrupted:
            score += prefs.api_weight(api)
    return score


def nodes_required(plan: MigrationPlan, usage: ExpectedUsage, pricing: PricingCatalog) -> list[int]:
    """Cloud nodes needed per window, sized by the binding resource."""
    nodes = []
    for t in range(usage.num_windows):
        cpu = sum(
            usage.series(c, "cpu")[t] for c in plan.placement if plan.in_cloud(c)
        )
        mem = sum(
            usage.series(c, "memory")[t] for c in plan.placement if plan.in_cloud(c)
        )
        n_cpu = math.ceil((1 + pricing.delta_cpu) * cpu / pricing.omega_cpu - 1e-12)
        n_mem = math.ceil((1 + pricing.delta_mem) * mem / pricing.omega_mem - 1e-12)
        nodes.append(max(n_cpu, n_mem, 0))
    return nodes


def q_cost_compute(plan: MigrationPlan, usage: ExpectedUsage, pricing: PricingCatalog) -> Decimal:
    theta_window = (
        pricing.theta_compute_hourly * Decimal(str(usage.window_len_s)) / SECONDS_PER_HOUR
    )
    total = sum((Decimal(n) * theta_window for n in nodes_required(plan, usage, pricing)), Decimal(0))
    return _money(total)


def initial_storage_gb(
    plan: MigrationPlan, usage: ExpectedUsage, catalog: ComponentCatalog, pricing: PricingCatalog
) -> float:
    """Initial cloud storage capacity: a multiple of the data to transfer."""
    transferred = 0.0
    for c in plan.placement:
        if (
            plan.in_cloud(c)
            and c in catalog
            and catalog.is_stateful(c)
            and catalog.original_location(c) == ONPREM
        ):
            series = usage.series(c, "storage")
            transferred += series[0] if series else 0.0
    return pricing.kappa0_factor * transferred


def storage_capacity_series(
    kappa0: float, cloud_storage_usage: Sequence[float], delta_storage: float
) -> list[float]:
    """Autoscaling recurrence: grow capacity whenever free space falls below delta."""
    capacities = []
    kappa = kappa0
    for used in cloud_storage_usage:
        if kappa > 0 and 1 - used / kappa <= delta_storage:
            kappa = math.ceil((1 + delta_storage) * kappa)
        capacities.append(kappa)
    return capacities


def q_cost_storage(
    plan: MigrationPlan,
    usage: ExpectedUsage,
    catalog: ComponentCatalog,
    pricing: PricingCatalog,
    kappa0: Optional[float] = None,
) -> Decimal:
    if kappa0 is None:
        kappa0 = initial_storage_gb(plan, usage, catalog, pricing)
    if kappa0 <= 0:
        return Decimal("0.0000")
    cloud_usage = [
        sum(usage.series(c, "storage")[t] for c in plan.placement if plan.in_cloud(c))
        for t in range(usage.num_windows)
    ]
    theta_window = (
        pricing.theta_storage_gb_hourly * Decimal(str(usage.window_len_s)) / SECONDS_PER_HOUR
    )
    capacities = storage_capacity_series(kappa0, cloud_usage, pricing.delta_storage)
    total = sum((Decimal(str(k)) * theta_window for k in capacities), Decimal(0))
    return _money(total)


def q_cost_traffic(plan: MigrationPlan, usage: ExpectedUsage, pricing: PricingCatalog) -> Decimal:
    """Egress pricing: only cloud->onprem bytes are charged."""
    total = Decimal(0)
    for (src, dst), values in sorted(usage.traffic.items()):
        if src not in plan.placement or dst not in plan.placement:
            continue
        if plan.location(src) == CLOUD and plan.location(dst) == ONPREM:
            total_bytes = Decimal(str(math.fsum(values)))
            total += pricing.theta_traffic_gb * total_bytes / BYTES_PER_GB
    return _money(total)


def q_cost(
    plan: MigrationPlan,
    usage: ExpectedUsage,
    catalog: ComponentCatalog,
    pricing: PricingCatalog,
) -> Decimal:
    return _money(
        q_cost_compute(plan, usage, pricing)
        + q_cost_storage(plan, usage, catalog, pricing)
        + q_cost_traffic(plan, usage, pricing)
    )


@dataclass(frozen=True)
class FeasibilityResult:
    feasible: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.feasible


def is_feasible(
    plan: MigrationPlan,
    prefs: Preferences,
    usage: ExpectedUsage,
    catalog: ComponentCatalog,
    pricing: PricingCatalog,
) -> FeasibilityResult:
    """Check pins, on-prem resource limits, and the budget constraint."""
    violations = []
    for component, location in sorted(prefs.placement_pins.items()):
        if plan.location(component) != location:
            violations.append(f"pin violated: {component} must stay {location}")
    for resource, limit in sorted(prefs.onprem_limits.items()):
        peak = max(
            (
                sum(
                    usage.series(c, resource)[t]
                    for c in plan.placement
                    if not plan.in_cloud(c)
                )
                for t in range(usage.num_windows)
            ),
            default=0.0,
        )
        if peak > limit + 1e-9:
            violations.append(
                f"onprem {resource} peak {peak:.4f} exceeds limit {limit:.4f}"
            )
    if prefs.budget is not None:
        cost = q_cost(plan, usage, catalog, pricing)
        if cost > Decimal(str(prefs.budget)):
            violations.append(f"cost {cost} exceeds budget {prefs.budget}")
    return FeasibilityResult(not violations, tuple(violations))


@dataclass
class EvaluationContext:
    """Everything needed to score a plan, immutable after construction."""

    catalog: ComponentCatalog
    traces_by_api: Mapping[str, Sequence[Trace]]
    stateful_by_api: Mapping[str, set[str]]
    footprint: NetworkFootprint
    links: LinkParams
    usage: ExpectedUsage
    pricing: PricingCatalog
    prefs: Preferences
    sample_budget: int = 100
    overlap_threshold: float = 0.5
    require_all_moved: bool = False
    _cache: dict = field(default_factory=dict, repr=False)
    _compiled: dict = field(default_factory=dict, repr=False)

    def _compiled_traces(self, api: str) -> list:
        if api not in self._compiled:
            self._compiled[api] = [
                compile_trace(t, self.overlap_threshold) for t in self.traces_by_api[api]
            ]
        return self._compiled[api]

    def latency_estimates(self, plan: MigrationPlan) -> dict[str, LatencyEstimate]:
        return {
            api: estimate_api_latency(
                self._compiled_traces(api),
                plan,
                self.footprint,
                self.links,
                self.sample_budget,
                self.overlap_threshold,
            )
            for api in sorted(self.traces_by_api)
        }

    def evaluate(self, plan: MigrationPlan) -> tuple[QualityVector, FeasibilityResult]:
        key = plan.key()
        if key in self._cache:
            return self._cache[key]
        estimates = self.latency_estimates(plan)
        quality = QualityVector(
            q_perf=q_perf(estimates, self.prefs),
            q_avai=q_avai(
                plan, self.stateful_by_api, self.catalog, self.prefs, self.require_all_moved
            ),
            q_cost=q_cost(plan, self.usage, self.catalog, self.pricing),
        )
        feasibility = is_feasible(plan, self.prefs, self.usage, self.catalog, self.pricing)
        self._cache[key] = (quality, feasibility)
        return self._cache[key]

    @property
    def component_order(self) -> list[str]:
        return self.catalog.names()

    def identity_plan(self) -> MigrationPlan:
        return MigrationPlan.identity(self.catalog)
