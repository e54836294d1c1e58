"""Command-line surface: learn, recommend, preview, monitor, generate,
oracle, and serve.

Option values resolve as flag > environment variable (MIGADVISOR_<NAME>) >
built-in default.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from decimal import Decimal
from pathlib import Path

import click
import numpy as np

from .footprint import LinkParams
from .monitor import DEFAULT_RATIO_THRESHOLD, split_half_table
from .optimizer import AGENT, GAConfig
from .pipeline import (
    LINKS_FILE,
    TRACES_FILE,
    USAGE_FILE,
    context_from_dir,
    links_for_dir,
    load_telemetry_dir,
    learn_model,
    save_links,
)
from .plans import MigrationPlan, Preferences
from .quality import PricingCatalog
from .scenario import expected_usage, generate_corpus, oracle_latency, write_corpus
from .sessions import SessionStore, run_session
from .telemetry import group_traces_by_api
from . import topologies

ENV_PREFIX = "MIGADVISOR_"

DEFAULT_PRICING = PricingCatalog(
    omega_cpu=4.0,
    omega_mem=16.0,
    theta_compute_hourly=Decimal("0.096"),
    theta_storage_gb_hourly=Decimal("0.0001"),
    theta_traffic_gb=Decimal("0.09"),
)

SCENARIOS = {
    "mini": (topologies.mini_topology, topologies.mini_workload),
    "full": (topologies.full_topology, topologies.full_workload),
}


def _env_default(name: str, fallback, cast=str):
    raw = os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"))
    return cast(raw) if raw is not None else fallback


def _load_pricing(path: str | None) -> PricingCatalog:
    if path is None:
        return DEFAULT_PRICING
    return PricingCatalog.load(path)


def _load_prefs(path: str | None) -> Preferences:
    if path is None:
        return Preferences()
    return Preferences.from_dict(json.loads(Path(path).read_text()))


def _telemetry_digest(directory: Path) -> str:
    digest = hashlib.sha256()
    for name in sorted(p.name for p in directory.glob("*.json*")):
        digest.update(name.encode())
        digest.update((directory / name).read_bytes())
    return digest.hexdigest()[:16]


def _require(path: Path, hint: str) -> Path:
    if not path.exists():
        raise click.ClickException(f"missing {path}: {hint}")
    return path


def _build_context(telemetry_dir, pricing_path, prefs_path, overlap_threshold):
    directory = Path(telemetry_dir)
    _require(directory / TRACES_FILE, "run `migadvisor generate` or point --telemetry-dir at exported telemetry")
    _require(directory / USAGE_FILE, "expected-usage grid is required for cost scoring")
    context, bundle = context_from_dir(
        directory,
        links_for_dir(directory),
        _load_pricing(pricing_path),
        _load_prefs(prefs_path),
        overlap_threshold=overlap_threshold,
    )
    return context, bundle, _telemetry_digest(directory)


def _seed_option(f):
    return click.option(
        "--seed", type=int, default=_env_default("seed", 0, int), show_default=True
    )(f)


@click.group()
def main() -> None:
    """Hybrid-cloud migration advisor."""


@main.command()
@click.option("--telemetry-dir", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None, help="Footprint output file.")
def learn(telemetry_dir: str, out: str | None) -> None:
    """Learn per-edge network footprints from a telemetry directory."""
    directory = Path(telemetry_dir)
    _require(directory / TRACES_FILE, "telemetry export must contain traces.jsonl")
    bundle = load_telemetry_dir(directory)
    footprint = learn_model(bundle.traces, bundle.traffic)
    target = Path(out) if out else directory / "footprint.jsonl"
    footprint.save(target)
    degenerate = sum(1 for fit in footprint.edge_fits.values() if fit.degenerate)
    click.echo(
        f"learned {len(footprint.entries)} footprint entries over "
        f"{len(footprint.edge_fits)} edges ({degenerate} degenerate) -> {target}"
    )
    if bundle.report.rejected:
        click.echo(f"skipped {len(bundle.report.rejected)} bad records", err=True)


@main.command()
@click.option("--telemetry-dir", required=True, type=click.Path(exists=True))
@click.option("--pricing", type=click.Path(exists=True), default=None)
@click.option("--prefs", type=click.Path(exists=True), default=None)
@_seed_option
@click.option("--budget-evals", type=int, default=_env_default("budget_evals", 10000, int), show_default=True)
@click.option("--population", type=int, default=_env_default("population", 100, int), show_default=True)
@click.option("--crossover", type=click.Choice(["agent", "uniform"]), default=AGENT, show_default=True)
@click.option("--penalize-infeasible", is_flag=True, help="Score infeasible no-improvement children -1 instead of 0.")
@click.option("--overlap-threshold", type=float, default=_env_default("overlap_threshold", 0.5, float), show_default=True)
@click.option("--sessions-dir", type=click.Path(), default=_env_default("sessions_dir", "sessions"), show_default=True)
def recommend(
    telemetry_dir, pricing, prefs, seed, budget_evals, population, crossover,
    penalize_infeasible, overlap_threshold, sessions_dir,
) -> None:
    """Search for Pareto-optimal migration plans and store the session."""
    context, _, digest = _build_context(telemetry_dir, pricing, prefs, overlap_threshold)
    config = GAConfig(
        population=population,
        eval_budget=budget_evals,
        crossover=crossover,
        penalize_infeasible=penalize_infeasible,
    )
    session, result, _ = run_session(context, config, seed, digest)
    path = SessionStore(sessions_dir).save(session)
    click.echo(f"session {session.session_id}: {len(session.front)} plans "
               f"({result.evaluations} evaluations) -> {path}")
    for record in session.front:
        objectives = record["objectives"]
        click.echo(
            f"  {record['id']}: perf {float(objectives['q_perf']):.3f} "
            f"avai {float(objectives['q_avai']):.1f} cost {objectives['q_cost']} "
            f"moved {len(record['moved'])}"
        )


@main.command()
@click.option("--sessions-dir", type=click.Path(exists=True), default="sessions", show_default=True)
@click.option("--session", "session_id", required=True)
@click.option("--plan", "plan_id", required=True,
              help="Plan id, or `perf-optimal` / `cost-optimal`.")
def preview(sessions_dir: str, session_id: str, plan_id: str) -> None:
    """Per-API before/after latency table for one recommended plan."""
    try:
        session = SessionStore(sessions_dir).load(session_id)
    except KeyError as exc:
        raise click.ClickException(str(exc))
    if plan_id in ("perf-optimal", "cost-optimal"):
        key = "q_perf" if plan_id == "perf-optimal" else "q_cost"
        record = min(session.front, key=lambda r: float(r["objectives"][key]))
    else:
        try:
            record = session.plan(plan_id)
        except KeyError as exc:
            raise click.ClickException(str(exc))
    click.echo(f"plan {record['id']} (moved: {', '.join(record['moved']) or 'none'})")
    click.echo(f"{'api':<16}{'before ms':>12}{'after ms':>12}{'ratio':>8}")
    for api, row in sorted(record["previews"].items()):
        click.echo(
            f"{api:<16}{row['before_ms']:>12.2f}{row['after_ms']:>12.2f}{row['ratio']:>8.3f}"
        )


@main.command()
@click.option("--telemetry-dir", required=True, type=click.Path(exists=True))
@click.option("--recent-dir", required=True, type=click.Path(exists=True))
@click.option("--drift-threshold", type=float,
              default=_env_default("drift_threshold", DEFAULT_RATIO_THRESHOLD, float), show_default=True)
def monitor(telemetry_dir: str, recent_dir: str, drift_threshold: float) -> None:
    """Compare recent latency distributions against the baseline."""
    baseline = load_telemetry_dir(telemetry_dir)
    recent = load_telemetry_dir(recent_dir)
    samples = {
        api: [t.root.duration_us for t in sorted(traces, key=lambda t: t.trace_id)]
        for api, traces in group_traces_by_api(baseline.traces).items()
    }
    recent_samples = {
        api: [t.root.duration_us for t in traces]
        for api, traces in group_traces_by_api(recent.traces).items()
    }
    table = split_half_table(samples, recent_samples, drift_threshold)
    any_triggered = False
    click.echo(f"{'api':<16}{'ratio':>10}  verdict")
    for api, status in table.items():
        verdict = (
            "inconclusive" if status.inconclusive
            else "DRIFT" if status.triggered
            else "ok"
        )
        any_triggered = any_triggered or status.triggered
        click.echo(f"{api:<16}{status.ratio:>10.2f}  {verdict}")
    if any_triggered:
        click.echo("drift detected: run `migadvisor recommend` for a fresh round")


@main.command()
@click.option("--scenario", type=click.Choice(sorted(SCENARIOS)), default="mini", show_default=True)
@click.option("--out", required=True, type=click.Path())
@_seed_option
@click.option("--sigma", type=float, default=0.05, show_default=True,
              help="Log-normal service-time jitter.")
@click.option("--windows", type=int, default=120, show_default=True)
@click.option("--payload-scale", type=float, default=None,
              help="Scale true payload sizes from --payload-scale-window onward.")
@click.option("--payload-scale-window", type=int, default=0, show_default=True)
@click.option("--inter-dc-mbps", type=float, default=921.0, show_default=True)
def generate(scenario, out, seed, sigma, windows, payload_scale, payload_scale_window, inter_dc_mbps) -> None:
    """Generate a synthetic telemetry corpus with known ground truth."""
    topology_fn, workload_fn = SCENARIOS[scenario]
    topology, workload = topology_fn(), workload_fn(windows)
    links = LinkParams.from_network(0.168, 941.0, 23.015, inter_dc_mbps)
    scales = {payload_scale_window: payload_scale} if payload_scale else None
    corpus = generate_corpus(
        topology,
        workload,
        links,
        rng=np.random.default_rng(seed),
        sigma=sigma,
        payload_scale_from_window=scales,
    )
    directory = Path(out)
    directory.mkdir(parents=True, exist_ok=True)
    write_corpus(corpus, directory)
    expected_usage(topology, workload).save(directory / USAGE_FILE)
    save_links(links, directory / LINKS_FILE)
    click.echo(f"wrote {len(corpus.traces)} traces for {len(workload.rates)} apis -> {directory}")


@main.command()
@click.option("--scenario", type=click.Choice(sorted(SCENARIOS)), default="mini", show_default=True)
@click.option("--api", required=True)
@click.option("--cloud", "cloud_components", default="",
              help="Comma-separated components placed in the cloud.")
@click.option("--samples", type=int, default=100, show_default=True)
@_seed_option
@click.option("--sigma", type=float, default=0.0, show_default=True)
@click.option("--inter-dc-mbps", type=float, default=921.0, show_default=True)
def oracle(scenario, api, cloud_components, samples, seed, sigma, inter_dc_mbps) -> None:
    """Replay one API through the ground-truth simulator under a plan."""
    topology_fn, _ = SCENARIOS[scenario]
    topology = topology_fn()
    if api not in topology.apis:
        raise click.ClickException(f"unknown api {api!r}; choose from {sorted(topology.apis)}")
    cloud = {c.strip() for c in cloud_components.split(",") if c.strip()}
    unknown = cloud - set(topology.components)
    if unknown:
        raise click.ClickException(f"unknown components: {sorted(unknown)}")
    plan = MigrationPlan(
        {c: ("cloud" if c in cloud else "onprem") for c in topology.components}
    )
    links = LinkParams.from_network(0.168, 941.0, 23.015, inter_dc_mbps)
    mean_us = oracle_latency(
        topology, plan, links, api, samples, np.random.default_rng(seed), sigma
    )
    click.echo(f"{api}: mean latency {mean_us / 1000.0:.3f} ms over {samples} samples")


@main.command()
@click.option("--telemetry-dir", required=True, type=click.Path(exists=True))
@click.option("--pricing", type=click.Path(exists=True), default=None)
@click.option("--prefs", type=click.Path(exists=True), default=None)
@click.option("--sessions-dir", type=click.Path(), default="sessions", show_default=True)
@click.option("--monitor-dir", type=click.Path(exists=True), default=None)
@click.option("--overlap-threshold", type=float, default=_env_default("overlap_threshold", 0.5, float), show_default=True)
@click.option("--drift-threshold", type=float,
              default=_env_default("drift_threshold", DEFAULT_RATIO_THRESHOLD, float), show_default=True)
@click.option("--port", type=int, default=_env_default("port", 8000, int), show_default=True)
def serve(telemetry_dir, pricing, prefs, sessions_dir, monitor_dir, overlap_threshold, drift_threshold, port) -> None:
    """Run the HTTP service for the dashboard."""
    import uvicorn

    from .service import create_app

    context, _, digest = _build_context(telemetry_dir, pricing, prefs, overlap_threshold)
    app = create_app(
        context,
        SessionStore(sessions_dir),
        telemetry_digest=digest,
        monitor_dir=monitor_dir,
        drift_threshold=drift_threshold,
    )
    uvicorn.run(app, host="127.0.0.1", port=port)


if __name__ == "__main__":
    sys.exit(main())
