"""Hierarchical organization of the recommended plan set.

The Pareto front is clustered bottom-up on min-max normalized objectives so
an operator can drill from two coarse clusters down to individual plans.
Each node carries a representative plan (the cluster medoid) and a label
naming the objective the cluster is strongest on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import pdist

from .optimizer.nsga import ScoredPlan

OBJECTIVE_NAMES = ("performance", "availability", "cost")


@dataclass(frozen=True)
class DendrogramNode:
    """One cluster: a leaf holds a single plan, internal nodes hold merges."""

    node_id: int
    members: tuple[int, ...]  # indices into the front, sorted
    representative: int  # index of the medoid plan
    label: str
    height: float
    left: Optional[int]  # child node ids; None for leaves
    right: Optional[int]


@dataclass(frozen=True)
class Dendrogram:
    plans: tuple[ScoredPlan, ...]
    nodes: tuple[DendrogramNode, ...]
    root_id: int

    def node(self, node_id: int) -> DendrogramNode:
        if not 0 <= node_id < len(self.nodes):
            raise KeyError(f"no dendrogram node {node_id}")
        return self.nodes[node_id]

    def is_leaf(self, node_id: int) -> bool:
        return self.node(node_id).left is None

    def to_dict(self) -> dict:
        return {
            "root": self.root_id,
            "nodes": [
                {
                    "id": n.node_id,
                    "members": list(n.members),
                    "representative": n.representative,
                    "label": n.label,
                    "height": n.height,
                    "children": ([] if n.left is None else [n.left, n.right]),
                }
                for n in self.nodes
            ],
        }


def _normalize(objectives: np.ndarray) -> np.ndarray:
    """Per-objective min-max to [0, 1]; constant objectives map to 0."""
    lo = objectives.min(axis=0)
    hi = objectives.max(axis=0)
    span = hi - lo
    out = np.zeros_like(objectives)
    for m in range(objectives.shape[1]):
        if span[m] > 0:
            out[:, m] = (objectives[:, m] - lo[m]) / span[m]
    return out


def _medoid(member_rows: np.ndarray, members: Sequence[int]) -> int:
    """Member index minimizing total distance to the rest; ties to lower id."""
    diffs = member_rows[:, None, :] - member_rows[None, :, :]
    totals = np.sqrt((diffs**2).sum(axis=2)).sum(axis=1)
    return members[int(np.argmin(totals))]


def _label(member_rows: np.ndarray) -> str:
    # low normalized value = strong on that objective
    strengths = 1.0 - member_rows.mean(axis=0)
    return OBJECTIVE_NAMES[int(np.argmax(strengths))]


def build_dendrogram(front: Sequence[ScoredPlan]) -> Dendrogram:
    """Ward-linkage merge tree over the front's normalized quality vectors."""
    if not front:
        raise ValueError("need at least one plan")
    plans = tuple(sorted(front, key=lambda sp: sp.plan.key()))
    objectives = np.array([sp.objectives for sp in plans], dtype=float)
    normalized = _normalize(objectives)
    n = len(plans)

    nodes: list[DendrogramNode] = []
    for i in range(n):
        nodes.append(
            DendrogramNode(
                node_id=i,
                members=(i,),
                representative=i,
                label=_label(normalized[[i]]),
                height=0.0,
                left=None,
                right=None,
            )
        )
    if n == 1:
        return Dendrogram(plans, tuple(nodes), root_id=0)

    merges = linkage(pdist(normalized), method="ward")
    for k, (a, b, height, _count) in enumerate(merges):
        left, right = nodes[int(a)], nodes[int(b)]
        members = tuple(sorted(left.members + right.members))
        rows = normalized[list(members)]
        nodes.append(
            DendrogramNode(
                node_id=n + k,
                members=members,
                representative=_medoid(rows, members),
                label=_label(rows),
                height=float(height),
                left=left.node_id,
                right=right.node_id,
            )
        )
    return Dendrogram(plans, tuple(nodes), root_id=len(nodes) - 1)


@dataclass(frozen=True)
class DrillResult:
    """What the operator sees after expanding one node."""

    node: DendrogramNode
    children: tuple[DendrogramNode, ...]  # empty at a leaf
    plan: Optional[ScoredPlan]  # full detail when the node is a leaf


def drill(dendrogram: Dendrogram, node_id: int) -> DrillResult:
    node = dendrogram.node(node_id)
    if node.left is None:
        return DrillResult(node, (), dendrogram.plans[node.members[0]])
    children = (dendrogram.node(node.left), dendrogram.node(node.right))
    return DrillResult(node, children, None)
