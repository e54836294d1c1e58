"""Bundled example topologies for demos and validation.

The mini social app has 10 components (1024 possible plans, exhaustively
checkable); the full one mirrors a realistic 29-component deployment.
"""

from __future__ import annotations

from .scenario import (
    BACKGROUND,
    PARALLEL,
    SEQUENTIAL,
    AppTopology,
    CallNode,
    ComponentSpec,
    WorkloadSpec,
)


def mini_topology() -> AppTopology:
    """10-component social app with 3 APIs sharing the frontend->auth edge."""
    components = {
        "frontend": ComponentSpec("frontend", cpu_per_req=0.004, mem_per_req=0.008, base_cpu=0.1),
        "auth": ComponentSpec("auth", cpu_per_req=0.006, mem_per_req=0.01),
        "user_db": ComponentSpec("user_db", stateful=True, cpu_per_req=0.003, storage_gb=4.0),
        "post": ComponentSpec("post", cpu_per_req=0.01, mem_per_req=0.02),
        "post_db": ComponentSpec("post_db", stateful=True, cpu_per_req=0.005, storage_gb=6.0),
        "media": ComponentSpec("media", cpu_per_req=0.02, mem_per_req=0.05),
        "timeline": ComponentSpec("timeline", cpu_per_req=0.012, mem_per_req=0.02),
        "cache": ComponentSpec("cache", cpu_per_req=0.002, mem_per_req=0.06),
        "search": ComponentSpec("search", cpu_per_req=0.015, mem_per_req=0.03),
        "notify": ComponentSpec("notify", cpu_per_req=0.008, mem_per_req=0.01),
    }
    login = CallNode(
        "frontend",
        operation="/login",
        service_us=1000,
        children=(
            CallNode(
                "auth",
                relation=SEQUENTIAL,
                pre_gap_us=300,
                service_us=2000,
                req_bytes=300,
                resp_bytes=150,
                children=(
                    CallNode(
                        "user_db",
                        relation=SEQUENTIAL,
                        pre_gap_us=400,
                        service_us=5000,
                        req_bytes=561,
                        resp_bytes=144,
                    ),
                ),
            ),
        ),
    )
    compose = CallNode(
        "frontend",
        operation="/compose",
        service_us=1200,
        children=(
            CallNode(
                "auth",
                relation=SEQUENTIAL,
                pre_gap_us=300,
                service_us=8000,
                req_bytes=300,
                resp_bytes=150,
            ),
            CallNode(
                "post",
                relation=SEQUENTIAL,
                pre_gap_us=500,
                service_us=1500,
                req_bytes=1200,
                resp_bytes=250,
                children=(
                    CallNode(
                        "post_db",
                        relation=SEQUENTIAL,
                        pre_gap_us=400,
                        service_us=6000,
                        req_bytes=800,
                        resp_bytes=200,
                    ),
                ),
            ),
            CallNode(
                "media",
                relation=PARALLEL,
                pre_gap_us=200,
                service_us=9000,
                req_bytes=400_000,  # image upload; payload-dominated edge
                resp_bytes=300,
            ),
            CallNode(
                "notify",
                relation=BACKGROUND,
                pre_gap_us=300,
                service_us=40000,
                req_bytes=400,
                resp_bytes=100,
            ),
        ),
    )
    timeline = CallNode(
        "frontend",
        operation="/timeline",
        service_us=1000,
        children=(
            CallNode(
                "auth",
                relation=SEQUENTIAL,
                pre_gap_us=300,
                service_us=8000,
                req_bytes=300,
                resp_bytes=150,
            ),
            CallNode(
                "timeline",
                relation=SEQUENTIAL,
                pre_gap_us=400,
                service_us=2000,
                req_bytes=600,
                resp_bytes=4000,
                children=(
                    CallNode(
                        "cache",
                        relation=SEQUENTIAL,
                        pre_gap_us=300,
                        service_us=4000,
                        req_bytes=250,
                        resp_bytes=1800,
                    ),
                    CallNode(
                        "search",
                        relation=PARALLEL,
                        pre_gap_us=500,
                        service_us=4500,
                        req_bytes=350,
                        resp_bytes=900,
                    ),
                    CallNode(
                        "post_db",
                        relation=SEQUENTIAL,
                        pre_gap_us=300,
                        service_us=6000,
                        req_bytes=700,
                        resp_bytes=2500,
                    ),
                ),
            ),
        ),
    )
    return AppTopology(
        components=components,
        apis={"/login": login, "/compose": compose, "/timeline": timeline},
    )


def mini_workload(
    num_windows: int = 120, user_multiplier: float = 1.0, window_len_s: float = 5.0
) -> WorkloadSpec:
    return WorkloadSpec.two_peak_daily(
        {"/login": 2.0, "/compose": 3.0, "/timeline": 4.0},
        num_windows=num_windows,
        window_len_s=window_len_s,
        user_multiplier=user_multiplier,
    )


def full_topology() -> AppTopology:
    """29-component app with fan-out/chain/background patterns across 6 APIs."""
    names = ["gateway"]
    names += [f"svc{i:02d}" for i in range(20)]
    names += [f"db{i}" for i in range(6)]
    names += ["cache0", "cache1"]
    components = {}
    for i, name in enumerate(names):
        stateful = name.startswith("db")
        components[name] = ComponentSpec(
            name,
            stateful=stateful,
            cpu_per_req=0.003 + 0.001 * (i % 5),
            mem_per_req=0.005 + 0.002 * (i % 4),
            storage_gb=float(2 + i % 4) if stateful else 0.0,
        )

    def chain(parts: list[tuple[str, int]], req: float, resp: float) -> tuple[CallNode, ...]:
        if not parts:
            return ()
        (comp, svc), rest = parts[0], parts[1:]
        return (
            CallNode(
                comp,
                relation=SEQUENTIAL,
                pre_gap_us=300,
                service_us=svc if not rest else 1500,
                req_bytes=req,
                resp_bytes=resp,
                children=chain(rest, req * 0.8, resp * 0.8),
            ),
        )

    apis = {}
    for a in range(6):
        kids = list(
            chain([(f"svc{(2 * a) % 20:02d}", 6000), (f"db{a}", 5000)], 700 + 90 * a, 220 + 40 * a)
        )
        kids.append(
            CallNode(
                f"svc{(2 * a + 1) % 20:02d}",
                relation=PARALLEL,
                pre_gap_us=200,
                service_us=7000,
                req_bytes=1500,
                resp_bytes=400,
            )
        )
        kids.extend(
            chain([(f"cache{a % 2}", 3000)], 260, 1500)
        )
        kids.append(
            CallNode(
                f"svc{(3 * a + 7) % 20:02d}",
                relation=BACKGROUND,
                pre_gap_us=300,
                service_us=30000,
                req_bytes=450,
                resp_bytes=120,
            )
        )
        apis[f"/api{a}"] = CallNode("gateway", operation=f"/api{a}", service_us=1200, children=tuple(kids))
    return AppTopology(components=components, apis=apis)


def full_workload(num_windows: int = 120, user_multiplier: float = 1.0) -> WorkloadSpec:
    return WorkloadSpec.two_peak_daily(
        {f"/api{a}": 1.5 + 0.5 * a for a in range(6)},
        num_windows=num_windows,
        user_multiplier=user_multiplier,
    )
