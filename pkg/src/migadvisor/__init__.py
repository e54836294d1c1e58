"""Hybrid-cloud migration advisor for API-driven microservices.

Learns per-edge network footprints and call workflows from telemetry,
predicts post-migration API latency by delay injection on recorded traces,
searches the plan space with a learned-crossover genetic algorithm, and
serves interactive recommendation sessions over HTTP.
"""

from .footprint import LinkParams, NetworkFootprint, compute_delay, learn_footprint
from .latency import LatencyEstimate, estimate_api_latency, inject_delays
from .monitor import DriftStatus, check_all, drift_check, split_half_table
from .optimizer import GAConfig, GAResult, ScoredPlan, run_ga
from .pipeline import TelemetryBundle, build_context, context_from_dir, learn_model, load_telemetry_dir
from .plans import MigrationPlan, Preferences
from .postprocess import Dendrogram, build_dendrogram, drill
from .quality import EvaluationContext, ExpectedUsage, PricingCatalog, QualityVector
from .sessions import RecommendationSession, SessionStore, run_session
from .telemetry import ComponentCatalog, Span, Trace, load_traces

__all__ = [
    "ComponentCatalog",
    "Dendrogram",
    "DriftStatus",
    "EvaluationContext",
    "ExpectedUsage",
    "GAConfig",
    "GAResult",
    "LatencyEstimate",
    "LinkParams",
    "MigrationPlan",
    "NetworkFootprint",
    "Preferences",
    "PricingCatalog",
    "QualityVector",
    "RecommendationSession",
    "ScoredPlan",
    "SessionStore",
    "Span",
    "TelemetryBundle",
    "Trace",
    "build_context",
    "build_dendrogram",
    "check_all",
    "compute_delay",
    "context_from_dir",
    "drift_check",
    "drill",
    "estimate_api_latency",
    "inject_delays",
    "learn_footprint",
    "learn_model",
    "load_telemetry_dir",
    "load_traces",
    "run_ga",
    "run_session",
    "split_half_table",
]
