"""Recommendation sessions and their flat-file store.

A session snapshots one recommendation run: preferences, search settings,
the resulting front with per-plan latency previews, and the dendrogram.
Manifests are canonical JSON (sorted keys, no timestamps) and the session
id is a content hash, so identical inputs produce bitwise-identical
artifacts.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .optimizer import GAConfig, GAResult, run_ga
from .plans import Preferences
from .postprocess import Dendrogram, build_dendrogram
from .quality import EvaluationContext

MANIFEST_FILE = "manifest.json"


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def content_id(data) -> str:
    return hashlib.sha256(canonical_json(data).encode()).hexdigest()[:16]


def _plan_record(index: int, scored, catalog, previews: dict) -> dict:
    return {
        "id": f"p{index:03d}",
        "placement": dict(sorted(scored.plan.placement.items())),
        "moved": scored.plan.moved_components(catalog),
        "objectives": scored.quality.to_dict(),
        "feasible": scored.feasible,
        "previews": previews,
    }


@dataclass(frozen=True)
class RecommendationSession:
    """Completed run: immutable manifest plus convenience accessors."""

    manifest: dict

    @property
    def session_id(self) -> str:
        return self.manifest["session_id"]

    @property
    def front(self) -> list[dict]:
        return self.manifest["front"]

    def plan(self, plan_id: str) -> dict:
        for record in self.front:
            if record["id"] == plan_id:
                return record
        raise KeyError(f"no plan {plan_id!r} in session {self.session_id}")

    @property
    def preferences(self) -> Preferences:
        return Preferences.from_dict(self.manifest["preferences"])

    def to_json(self) -> str:
        return canonical_json(self.manifest)


def session_id_for(
    prefs: Preferences, config: GAConfig, seed: int, telemetry_digest: str = ""
) -> str:
    """Deterministic id from the run inputs; known before the run starts."""
    return content_id(
        {
            "telemetry_digest": telemetry_digest,
            "seed": seed,
            "config": config.to_dict(),
            "preferences": prefs.to_dict(),
        }
    )


def run_session(
    context: EvaluationContext,
    config: GAConfig,
    seed: int,
    telemetry_digest: str = "",
) -> tuple[RecommendationSession, GAResult, Optional[Dendrogram]]:
    """Execute one recommendation run and build its manifest."""
    rng = np.random.default_rng(seed)
    result = run_ga(context, config, rng)

    plan_records = []
    for index, scored in enumerate(result.front):
        estimates = context.latency_estimates(scored.plan)
        previews = {
            api: {
                "before_ms": est.original_mean_us / 1000.0,
                "after_ms": est.mean_us / 1000.0,
                "ratio": est.ratio,
            }
            for api, est in sorted(estimates.items())
        }
        plan_records.append(_plan_record(index, scored, context.catalog, previews))

    dendrogram = build_dendrogram(list(result.front)) if result.front else None
    manifest = {
        "session_id": session_id_for(context.prefs, config, seed, telemetry_digest),
        "telemetry_digest": telemetry_digest,
        "seed": seed,
        "config": config.to_dict(),
        "preferences": context.prefs.to_dict(),
        "front": plan_records,
        "dendrogram": dendrogram.to_dict() if dendrogram else None,
        "evaluations": result.evaluations,
        "generations": result.generations,
        "reward_curve": [round(v, 6) for v in result.reward_curve],
    }
    return RecommendationSession(manifest), result, dendrogram


@dataclass
class SessionStore:
    """One directory per session, holding its canonical manifest."""

    root: Path

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def save(self, session: RecommendationSession) -> Path:
        directory = self.root / session.session_id
        directory.mkdir(exist_ok=True)
        path = directory / MANIFEST_FILE
        path.write_text(session.to_json())
        return path

    def load(self, session_id: str) -> RecommendationSession:
        path = self.root / session_id / MANIFEST_FILE
        if not path.exists():
            raise KeyError(f"no session {session_id!r} under {self.root}")
        return RecommendationSession(json.loads(path.read_text()))

    def list_ids(self) -> list[str]:
        return sorted(
            p.parent.name for p in self.root.glob(f"*/{MANIFEST_FILE}")
        )
