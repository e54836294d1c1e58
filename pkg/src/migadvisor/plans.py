"""Migration plans and owner preferences."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .telemetry import CLOUD, LOCATIONS, ONPREM, ComponentCatalog

CRITICAL_WEIGHT = 2.0


@dataclass(frozen=True)
class MigrationPlan:
    """Assignment of every component to onprem or cloud."""

    placement: Mapping[str, str]

    def __post_init__(self) -> None:
        for component, location in self.placement.items():
            if location not in LOCATIONS:
                raise ValueError(f"{component}: unknown location {location!r}")

    def location(self, component: str) -> str:
        return self.placement[component]

    def in_cloud(self, component: str) -> bool:
        return self.placement[component] == CLOUD

    def moved_components(self, catalog: ComponentCatalog) -> list[str]:
        return sorted(
            c for c in self.placement if self.placement[c] != catalog.original_location(c)
        )

    def split(self, src: str, dst: str) -> bool:
        return self.placement[src] != self.placement[dst]

    def key(self) -> tuple[tuple[str, str], ...]:
        return tuple(sorted(self.placement.items()))

    def as_bits(self, order: Iterable[str]) -> tuple[int, ...]:
        return tuple(1 if self.placement[c] == CLOUD else 0 for c in order)

    @staticmethod
    def from_bits(order: Iterable[str], bits: Iterable[int]) -> "MigrationPlan":
        return MigrationPlan(
            {c: (CLOUD if b else ONPREM) for c, b in zip(order, bits)}
        )

    @staticmethod
    def identity(catalog: ComponentCatalog) -> "MigrationPlan":
        return MigrationPlan({c: catalog.original_location(c) for c in catalog})


@dataclass(frozen=True)
class Preferences:
    """Owner constraints: critical APIs, pinned placements, limits, budget."""

    critical_apis: frozenset[str] = frozenset()
    placement_pins: Mapping[str, str] = field(default_factory=dict)
    onprem_limits: Mapping[str, float] = field(default_factory=dict)  # resource -> max
    budget: Optional[float] = None  # currency over the horizon; None = unlimited

    def api_weight(self, api: str) -> float:
        return CRITICAL_WEIGHT if api in self.critical_apis else 1.0

    def validate(self, catalog: ComponentCatalog, known_apis: Iterable[str]) -> list[str]:
        """Return a list of problems (empty when valid)."""
        problems = []
        known = set(known_apis)
        for api in sorted(self.critical_apis):
            if api not in known:
                problems.append(f"unknown api {api!r}")
        for component, location in sorted(self.placement_pins.items()):
            if component not in catalog:
                problems.append(f"unknown component {component!r}")
            if location not in LOCATIONS:
                problems.append(f"unknown location {location!r} for pin {component!r}")
        for resource, limit in sorted(self.onprem_limits.items()):
            if limit < 0:
                problems.append(f"negative limit for resource {resource!r}")
        if self.budget is not None and self.budget < 0:
            problems.append("negative budget")
        return problems

    def to_dict(self) -> dict:
        return {
            "critical_apis": sorted(self.critical_apis),
            "placement_pins": dict(sorted(self.placement_pins.items())),
            "onprem_limits": dict(sorted(self.onprem_limits.items())),
            "budget": self.budget,
        }

    @staticmethod
    def from_dict(data: Mapping) -> "Preferences":
        return Preferences(
            critical_apis=frozenset(data.get("critical_apis", ())),
            placement_pins=dict(data.get("placement_pins", {})),
            onprem_limits={k: float(v) for k, v in data.get("onprem_limits", {}).items()},
            budget=(float(data["budget"]) if data.get("budget") is not None else None),
        )
