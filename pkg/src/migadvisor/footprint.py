"""Per-API network footprint learning and migration delay computation.

For each directed component pair we regress the observed per-window byte
totals against per-API invocation counts to recover the average request and
response sizes of each API on that edge.  Those sizes drive the delay added
to an invocation once its endpoints land in different datacenters, and also
let us reconstruct the traffic a given API mix should produce.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Optional

import numpy as np

from .telemetry import InvocationCounts, PairwiseTrafficWindow, window_index

Direction = Literal["req", "resp"]

RIDGE = 1e-9
MIN_WINDOWS_PER_PARAM = 10


@dataclass(frozen=True)
class LinkParams:
    """One-way latency (s) and per-byte transfer time (s/byte) of the two links."""

    gamma_before: float
    gamma_after: float
    nu_before: float
    nu_after: float

    @staticmethod
    def from_network(
        latency_before_ms: float,
        bandwidth_before_mbps: float,
        latency_after_ms: float,
        bandwidth_after_mbps: float,
    ) -> "LinkParams":
        # nu is inverse bandwidth: seconds per byte = 8 bits / (bits per second)
        return LinkParams(
            gamma_before=latency_before_ms / 1e3,
            gamma_after=latency_after_ms / 1e3,
            nu_before=8.0 / (bandwidth_before_mbps * 1e6),
            nu_after=8.0 / (bandwidth_after_mbps * 1e6),
        )

    def swapped(self) -> "LinkParams":
        return LinkParams(self.gamma_after, self.gamma_before, self.nu_after, self.nu_before)


@dataclass(frozen=True)
class FootprintEntry:
    """Learned average request/response bytes of one API on one edge."""

    api: str
    src: str
    dst: str
    d_req: float
    d_resp: float


@dataclass
class EdgeFit:
    """Diagnostics of one per-edge regression (shared across its APIs)."""

    residual_rms_req: float = 0.0
    residual_rms_resp: float = 0.0
    degenerate: bool = False

    def residual(self, direction: Direction) -> float:
        return self.residual_rms_req if direction == "req" else self.residual_rms_resp


@dataclass
class NetworkFootprint:
    """Footprint entries keyed by (api, src, dst) plus per-edge fit diagnostics."""

    entries: dict[tuple[str, str, str], FootprintEntry] = field(default_factory=dict)
    edge_fits: dict[tuple[str, str], EdgeFit] = field(default_factory=dict)

    def get(self, api: str, src: str, dst: str) -> Optional[FootprintEntry]:
        return self.entries.get((api, src, dst))

    def add(self, entry: FootprintEntry) -> None:
        self.entries[(entry.api, entry.src, entry.dst)] = entry

    def round_trip_bytes(self, api: str, src: str, dst: str) -> float:
        entry = self.get(api, src, dst)
        if entry is None:
            return 0.0
        return entry.d_req + entry.d_resp

    def apis(self) -> set[str]:
        return {api for api, _, _ in self.entries}

    def edges_of_api(self, api: str) -> list[tuple[str, str]]:
        return sorted((s, d) for a, s, d in self.entries if a == api)

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            for key in sorted(self.entries):
                e = self.entries[key]
                fit = self.edge_fits.get((e.src, e.dst), EdgeFit())
                fh.write(
                    json.dumps(
                        {
                            "api": e.api,
                            "src": e.src,
                            "dst": e.dst,
                            "d_req": e.d_req,
                            "d_resp": e.d_resp,
                            "residual_req": float(fit.residual_rms_req),
                            "residual_resp": float(fit.residual_rms_resp),
                            "degenerate": bool(fit.degenerate),
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )

    @staticmethod
    def load(path: str | Path) -> "NetworkFootprint":
        fp = NetworkFootprint()
        for line in Path(path).read_text().splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            fp.add(
                FootprintEntry(rec["api"], rec["src"], rec["dst"], rec["d_req"], rec["d_resp"])
            )
            fp.edge_fits[(rec["src"], rec["dst"])] = EdgeFit(
                residual_rms_req=rec.get("residual_req", 0.0),
                residual_rms_resp=rec.get("residual_resp", 0.0),
                degenerate=rec.get("degenerate", False),
            )
        return fp


def _solve_nonneg(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, bool]:
    """Ridge-stabilized normal equations, clamped to d >= 0 with one re-solve.

    Returns (solution, degenerate_flag).  Rank-deficient systems fall back to
    the pseudo-inverse solution and are flagged.
    """
    n_params = X.shape[1]
    degenerate = np.linalg.matrix_rank(X) < n_params

    def solve(cols: np.ndarray) -> np.ndarray:
        A = X[:, cols]
        gram = A.T @ A + RIDGE * np.eye(len(cols))
        try:
            return np.linalg.solve(gram, A.T @ y)
        except np.linalg.LinAlgError:
            return np.linalg.pinv(A) @ y

    active = np.arange(n_params)
    d = solve(active)
    if np.any(d < 0):
        keep = active[d > 0]
        d = np.zeros(n_params)
        if keep.size:
            d[keep] = np.maximum(solve(keep), 0.0)
    return d, degenerate


def learn_footprint(
    traffic: Iterable[PairwiseTrafficWindow],
    counts: InvocationCounts,
    direction: Direction,
    window_len_s: float = 5.0,
    footprint: Optional[NetworkFootprint] = None,
) -> NetworkFootprint:
    """Learn per-API byte sizes for one direction on every observed edge.

    For each directed edge the observed byte totals per window are modeled
    as a non-negative linear combination of the per-API invocation counts in
    that window; the coefficients are the learned sizes.
    """
    fp = footprint if footprint is not None else NetworkFootprint()

    observed: dict[tuple[str, str], dict[int, float]] = {}
    for w in traffic:
        per_edge = observed.setdefault((w.src, w.dst), {})
        widx = window_index(w.window_start, window_len_s)
        value = w.req_bytes if direction == "req" else w.resp_bytes
        per_edge[widx] = per_edge.get(widx, 0.0) + value

    # apis with at least one trace invocation on the edge
    edge_apis: dict[tuple[str, str], list[str]] = {}
    for api, per_edge_counts in counts.items():
        for edge in per_edge_counts:
            edge_apis.setdefault(edge, []).append(api)

    for edge, apis in sorted(edge_apis.items()):
        apis = sorted(apis)
        traffic_by_window = observed.get(edge, {})
        windows = sorted(
            set(traffic_by_window)
            | {w for api in apis for w in counts[api][edge]}
        )
        if not windows:
            continue
        if len(windows) < MIN_WINDOWS_PER_PARAM * len(apis):
            warnings.warn(
                f"edge {edge[0]}->{edge[1]}: {len(windows)} windows for "
                f"{len(apis)} parameters (want >= {MIN_WINDOWS_PER_PARAM} per parameter)",
                stacklevel=2,
            )
        X = np.zeros((len(windows), len(apis)))
        y = np.array([traffic_by_window.get(w, 0.0) for w in windows])
        for j, api in enumerate(apis):
            per_window = counts[api][edge]
            for i, w in enumerate(windows):
                X[i, j] = per_window.get(w, 0)
        d, degenerate = _solve_nonneg(X, y)
        residual_rms = float(np.sqrt(np.mean((y - X @ d) ** 2)))
        fit = fp.edge_fits.setdefault(edge, EdgeFit())
        if direction == "req":
            fit.residual_rms_req = residual_rms
        else:
            fit.residual_rms_resp = residual_rms
        fit.degenerate = fit.degenerate or degenerate
        if degenerate:
            warnings.warn(
                f"edge {edge[0]}->{edge[1]}: collinear api count vectors, "
                "pseudo-inverse solution",
                stacklevel=2,
            )
        for j, api in enumerate(apis):
            existing = fp.get(api, *edge)
            d_req = existing.d_req if existing else 0.0
            d_resp = existing.d_resp if existing else 0.0
            if direction == "req":
                d_req = float(d[j])
            else:
                d_resp = float(d[j])
            fp.add(FootprintEntry(api, edge[0], edge[1], d_req, d_resp))
    return fp


def learn_full_footprint(
    traffic: Iterable[PairwiseTrafficWindow],
    counts: InvocationCounts,
    window_len_s: float = 5.0,
) -> NetworkFootprint:
    """Learn both request and response sizes for every edge."""
    traffic = list(traffic)
    fp = learn_footprint(traffic, counts, "req", window_len_s)
    return learn_footprint(traffic, counts, "resp", window_len_s, footprint=fp)


def compute_delay(round_trip_bytes: float, links: LinkParams) -> float:
    """Extra seconds per invocation after relocating one endpoint.

    Negative when the change co-locates a previously split edge.
    """
    return (links.gamma_after - links.gamma_before) + (
        links.nu_after - links.nu_before
    ) * round_trip_bytes


@dataclass(frozen=True)
class ApiTrafficSeries:
    """Per-api request counts over time windows."""

    counts: dict[str, dict[int, float]]  # api -> window index -> requests


def reconstruct_expected_traffic(
    footprint: NetworkFootprint,
    api_traffic: ApiTrafficSeries,
    direction: Direction = "req",
) -> dict[tuple[str, str], dict[int, float]]:
    """Expected per-edge bytes per window implied by the footprint and API mix."""
    expected: dict[tuple[str, str], dict[int, float]] = {}
    for (api, src, dst), entry in footprint.entries.items():
        series = api_traffic.counts.get(api)
        if not series:
            continue
        size = entry.d_req if direction == "req" else entry.d_resp
        per_edge = expected.setdefault((src, dst), {})
        for widx, n in series.items():
            per_edge[widx] = per_edge.get(widx, 0.0) + n * size
    return expected


def reconstruct_from_counts(
    footprint: NetworkFootprint,
    counts: InvocationCounts,
    direction: Direction = "req",
) -> dict[tuple[str, str], dict[int, float]]:
    """Expected traffic from exact invocation counts (training-time check)."""
    expected: dict[tuple[str, str], dict[int, float]] = {}
    for api, per_edge_counts in counts.items():
        for edge, per_window in per_edge_counts.items():
            entry = footprint.get(api, *edge)
            if entry is None:
                continue
            size = entry.d_req if direction == "req" else entry.d_resp
            out = expected.setdefault(edge, {})
            for widx, n in per_window.items():
                out[widx] = out.get(widx, 0.0) + n * size
    return expected


DEFAULT_ANOMALY_THRESHOLD = 4.0


@dataclass(frozen=True)
class AnomalyFlag:
    window: int
    score: float
    flagged: bool


def traffic_anomaly_score(
    observed: dict[int, float],
    expected: dict[int, float],
    sigma_residual: float,
    threshold: float = DEFAULT_ANOMALY_THRESHOLD,
) -> list[AnomalyFlag]:
    """Score per-window deviations of observed traffic from the expectation.

    score = (observed - expected) / sigma_residual; a zero residual flags any
    nonzero deviation.
    """
    flags = []
    for widx in sorted(set(observed) | set(expected)):
        deviation = observed.get(widx, 0.0) - expected.get(widx, 0.0)
        if sigma_residual > 0:
            score = deviation / sigma_residual
            flagged = score > threshold
        else:
            score = float("inf") if deviation > 0 else 0.0
            flagged = deviation > 0
        flags.append(AnomalyFlag(widx, score, flagged))
    return flags
