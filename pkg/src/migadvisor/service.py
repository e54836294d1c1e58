"""HTTP surface for the dashboard: sessions, fronts, dendrogram, monitor.

Sessions are append-only: editing preferences spawns a new session so
what-if comparisons stay side by side.  At most one recommendation run is
active at a time; completed sessions are immutable flat-file manifests.
"""

from __future__ import annotations

import dataclasses
import threading
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .monitor import DEFAULT_RATIO_THRESHOLD, split_half_table
from .optimizer import GAConfig
from .plans import Preferences
from .quality import EvaluationContext
from .sessions import RecommendationSession, SessionStore, run_session, session_id_for
from .telemetry import group_traces_by_api, load_traces


class SessionRequest(BaseModel):
    preferences: Optional[dict] = None
    seed: int = 0
    eval_budget: Optional[int] = None
    population: Optional[int] = None
    crossover: Optional[str] = None
    penalize_infeasible: Optional[bool] = None


class PreferencesUpdate(BaseModel):
    preferences: dict
    seed: Optional[int] = None


def _derive_context(base: EvaluationContext, prefs: Preferences) -> EvaluationContext:
    # cached qualities depend on preferences, compiled traces do not
    return dataclasses.replace(base, prefs=prefs, _cache={}, _compiled=base._compiled)


def create_app(
    context: EvaluationContext,
    store: SessionStore,
    default_config: Optional[GAConfig] = None,
    telemetry_digest: str = "",
    monitor_dir: Optional[str | Path] = None,
    drift_threshold: float = DEFAULT_RATIO_THRESHOLD,
    sync: bool = False,
) -> FastAPI:
    """Build the service around one learned evaluation context.

    ``sync`` makes POST /sessions block until the run finishes (used in
    tests); otherwise runs execute on a worker thread and clients poll.
    """
    app = FastAPI(title="migration-advisor")
    base_config = default_config if default_config is not None else GAConfig()
    state = {"active": None}  # session id of the in-flight run
    lock = threading.Lock()
    known_apis = sorted(context.traces_by_api)

    def config_for(req: SessionRequest) -> GAConfig:
        overrides = {}
        if req.eval_budget is not None:
            overrides["eval_budget"] = req.eval_budget
        if req.population is not None:
            overrides["population"] = req.population
        if req.crossover is not None:
            overrides["crossover"] = req.crossover
        if req.penalize_infeasible is not None:
            overrides["penalize_infeasible"] = req.penalize_infeasible
        return dataclasses.replace(base_config, **overrides) if overrides else base_config

    def parse_prefs(data: Optional[dict]) -> Preferences:
        prefs = Preferences.from_dict(data) if data else context.prefs
        problems = prefs.validate(context.catalog, known_apis)
        if problems:
            raise HTTPException(status_code=422, detail=problems)
        return prefs

    def execute(prefs: Preferences, config: GAConfig, seed: int, sid: str) -> None:
        try:
            session, _, _ = run_session(
                _derive_context(context, prefs), config, seed, telemetry_digest
            )
            store.save(session)
        finally:
            with lock:
                state["active"] = None

    def launch(prefs: Preferences, config: GAConfig, seed: int) -> dict:
        sid = session_id_for(prefs, config, seed, telemetry_digest)
        try:
            store.load(sid)
            return {"session_id": sid, "status": "complete"}
        except KeyError:
            pass
        with lock:
            if state["active"] is not None:
                raise HTTPException(
                    status_code=409,
                    detail=f"run {state['active']} already in progress",
                )
            state["active"] = sid
        if sync:
            execute(prefs, config, seed, sid)
        else:
            threading.Thread(
                target=execute, args=(prefs, config, seed, sid), daemon=True
            ).start()
        return {"session_id": sid, "status": "complete" if sync else "running"}

    def get_session(session_id: str) -> RecommendationSession:
        try:
            return store.load(session_id)
        except KeyError:
            if state["active"] == session_id:
                raise HTTPException(status_code=409, detail="run in progress")
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    @app.post("/sessions")
    def create_session(req: SessionRequest):
        return launch(parse_prefs(req.preferences), config_for(req), req.seed)

    @app.get("/sessions/{session_id}")
    def session_detail(session_id: str):
        return get_session(session_id).manifest

    @app.get("/sessions/{session_id}/front")
    def session_front(session_id: str):
        return {"front": get_session(session_id).front}

    @app.get("/sessions/{session_id}/plans/{plan_id}")
    def plan_detail(session_id: str, plan_id: str):
        try:
            return get_session(session_id).plan(plan_id)
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown plan {plan_id}")

    @app.get("/sessions/{session_id}/dendrogram/{node_id}")
    def dendrogram_node(session_id: str, node_id: int):
        manifest = get_session(session_id).manifest
        tree = manifest.get("dendrogram")
        if tree is None:
            raise HTTPException(status_code=404, detail="empty front, no dendrogram")
        nodes = {n["id"]: n for n in tree["nodes"]}
        if node_id not in nodes:
            raise HTTPException(status_code=404, detail=f"unknown node {node_id}")
        node = nodes[node_id]
        children = [nodes[c] for c in node["children"]]
        plan = None
        if not children:
            plan = manifest["front"][node["members"][0]]
        return {"node": node, "children": children, "plan": plan, "root": tree["root"]}

    @app.put("/sessions/{session_id}/preferences")
    def update_preferences(session_id: str, req: PreferencesUpdate):
        previous = get_session(session_id)
        prefs = parse_prefs(req.preferences)
        seed = req.seed if req.seed is not None else previous.manifest["seed"]
        config = GAConfig(**previous.manifest["config"])
        return launch(prefs, config, seed)

    @app.get("/monitor/status")
    def monitor_status():
        recent_by_api: dict[str, list[float]] = {}
        if monitor_dir is not None and Path(monitor_dir).exists():
            for api, traces in group_traces_by_api(
                load_traces(Path(monitor_dir) / "traces.jsonl")
            ).items():
                recent_by_api[api] = [t.root.duration_us for t in traces]
        samples_by_api = {
            api: [
                t.root.duration_us
                for t in sorted(context.traces_by_api[api], key=lambda t: t.trace_id)
            ]
            for api in known_apis
        }
        table = {
            api: {
                "ratio": status.ratio,
                "triggered": status.triggered,
                "inconclusive": status.inconclusive,
                "recent_samples": status.recent_samples,
            }
            for api, status in split_half_table(
                samples_by_api, recent_by_api, drift_threshold
            ).items()
        }
        return {
            "apis": table,
            "re_recommend": any(v.get("triggered") for v in table.values()),
        }

    @app.get("/sessions")
    def list_sessions():
        return {"sessions": store.list_ids(), "active": state["active"]}

    return app
