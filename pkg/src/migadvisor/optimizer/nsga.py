"""NSGA-II selection machinery: constrained non-dominated sorting, crowding
distance, binary tournament, and an exact hypervolume for 2-3 objectives."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..plans import MigrationPlan
from ..quality import FeasibilityResult, QualityVector


@dataclass(frozen=True)
class ScoredPlan:
    plan: MigrationPlan
    quality: QualityVector
    feasibility: FeasibilityResult

    @property
    def feasible(self) -> bool:
        return self.feasibility.feasible

    @property
    def objectives(self) -> tuple[float, float, float]:
        return self.quality.as_tuple()


def dominates(a: ScoredPlan, b: ScoredPlan) -> bool:
    """Constrained dominance: feasible always beats infeasible."""
    if a.feasible and not b.feasible:
        return True
    if not a.feasible and b.feasible:
        return False
    ao, bo = a.objectives, b.objectives
    return all(x <= y for x, y in zip(ao, bo)) and any(x < y for x, y in zip(ao, bo))


def non_dominated_sort(plans: Sequence[ScoredPlan]) -> list[list[int]]:
    """Indices grouped into fronts; front 0 is non-dominated."""
    n = len(plans)
    dominated_by: list[list[int]] = [[] for _ in range(n)]
    dom_count = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(plans[i], plans[j]):
                dominated_by[i].append(j)
                dom_count[j] += 1
            elif dominates(plans[j], plans[i]):
                dominated_by[j].append(i)
                dom_count[i] += 1
    fronts: list[list[int]] = []
    current = [i for i in range(n) if dom_count[i] == 0]
    while current:
        fronts.append(current)
        nxt = []
        for i in current:
            for j in dominated_by[i]:
                dom_count[j] -= 1
                if dom_count[j] == 0:
                    nxt.append(j)
        current = nxt
    return fronts


def crowding_distance(plans: Sequence[ScoredPlan], front: Sequence[int]) -> dict[int, float]:
    """Normalized objective-span sum; boundary plans get infinity."""
    distances = {i: 0.0 for i in front}
    if len(front) <= 2:
        return {i: float("inf") for i in front}
    n_obj = len(plans[front[0]].objectives)
    for m in range(n_obj):
        ordered = sorted(front, key=lambda i: plans[i].objectives[m])
        lo = plans[ordered[0]].objectives[m]
        hi = plans[ordered[-1]].objectives[m]
        distances[ordered[0]] = float("inf")
        distances[ordered[-1]] = float("inf")
        span = hi - lo
        if span <= 0:
            continue
        for k in range(1, len(ordered) - 1):
            prev_v = plans[ordered[k - 1]].objectives[m]
            next_v = plans[ordered[k + 1]].objectives[m]
            distances[ordered[k]] += (next_v - prev_v) / span
    return distances


def rank_population(
    plans: Sequence[ScoredPlan],
) -> tuple[list[int], list[float]]:
    """Per-plan front rank and crowding distance."""
    ranks = [0] * len(plans)
    dists = [0.0] * len(plans)
    for rank, front in enumerate(non_dominated_sort(plans)):
        cd = crowding_distance(plans, front)
        for i in front:
            ranks[i] = rank
            dists[i] = cd[i]
    return ranks, dists


def binary_tournament(
    rng: np.random.Generator, ranks: Sequence[int], dists: Sequence[float]
) -> int:
    """Pick the better of two random individuals: lower rank, then larger distance."""
    i, j = rng.integers(0, len(ranks), size=2)
    i, j = int(i), int(j)
    if ranks[i] != ranks[j]:
        return i if ranks[i] < ranks[j] else j
    if dists[i] != dists[j]:
        return i if dists[i] > dists[j] else j
    return i


def environmental_selection(plans: list[ScoredPlan], size: int) -> list[ScoredPlan]:
    """Standard NSGA-II truncation by (rank, crowding)."""
    selected: list[ScoredPlan] = []
    for front in non_dominated_sort(plans):
        if len(selected) + len(front) <= size:
            selected.extend(plans[i] for i in front)
        else:
            cd = crowding_distance(plans, front)
            remaining = sorted(front, key=lambda i: -cd[i])
            selected.extend(plans[i] for i in remaining[: size - len(selected)])
            break
    return selected


def pareto_front(plans: Sequence[ScoredPlan]) -> list[ScoredPlan]:
    """Non-dominated subset, deduplicated by placement."""
    unique: dict = {}
    for sp in plans:
        unique.setdefault(sp.plan.key(), sp)
    plans = list(unique.values())
    if not plans:
        return []
    front = non_dominated_sort(plans)[0]
    return sorted(
        (plans[i] for i in front), key=lambda sp: sp.plan.key()
    )


def _staircase_area(points: list[tuple[float, float]], ref: tuple[float, float]) -> float:
    """Area of the union of [x, rx] x [y, ry] boxes (minimization)."""
    # keep the non-dominated staircase sorted by x
    pts = sorted(points)
    stairs: list[tuple[float, float]] = []
    best_y = float("inf")
    for x, y in pts:
        if y < best_y:
            stairs.append((x, y))
            best_y = y
    area = 0.0
    for k, (x, y) in enumerate(stairs):
        next_x = stairs[k + 1][0] if k + 1 < len(stairs) else ref[0]
        area += (next_x - x) * (ref[1] - y)
    return area


def hypervolume(points: Sequence[Sequence[float]], ref: Sequence[float]) -> float:
    """Exact hypervolume of minimization points against a reference point."""
    pts = [tuple(p) for p in points if all(pi < ri for pi, ri in zip(p, ref))]
    if not pts:
        return 0.0
    if len(ref) == 2:
        return _staircase_area([(p[0], p[1]) for p in pts], (ref[0], ref[1]))
    if len(ref) != 3:
        raise ValueError("hypervolume supports 2 or 3 objectives")
    pts.sort(key=lambda p: p[2])
    volume = 0.0
    active: list[tuple[float, float]] = []
    for k, p in enumerate(pts):
        active.append((p[0], p[1]))
        z_next = pts[k + 1][2] if k + 1 < len(pts) else ref[2]
        dz = z_next - p[2]
        if dz > 0:
            volume += _staircase_area(active, (ref[0], ref[1])) * dz
    return volume


def reference_point(point_sets: Sequence[Sequence[Sequence[float]]], margin: float = 1.1) -> tuple[float, ...]:
    """A shared reference point strictly dominated by every given point."""
    dims = len(next(iter(next(iter(point_sets)))))
    worst = [-float("inf")] * dims
    for points in point_sets:
        for p in points:
            for m in range(dims):
                worst[m] = max(worst[m], p[m])
    return tuple(w * margin if w > 0 else w + 1.0 for w in worst)
