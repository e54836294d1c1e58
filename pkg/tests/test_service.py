"""HTTP service endpoints, exercised synchronously via the test client."""

import numpy as np
import pytest
from fastapi.testclient import TestClient

from migadvisor.optimizer import GAConfig, UNIFORM
from migadvisor.plans import MigrationPlan
from migadvisor.scenario import generate_corpus, write_corpus
from migadvisor.service import create_app
from migadvisor.sessions import SessionStore
from migadvisor.topologies import mini_topology, mini_workload
from tests.conftest import JITTER_SIGMA, LINKS

FAST_CONFIG = GAConfig(population=16, eval_budget=80, crossover=UNIFORM)


@pytest.fixture()
def client(mini_context, tmp_path):
    store = SessionStore(tmp_path / "sessions")
    app = create_app(
        mini_context, store, FAST_CONFIG, telemetry_digest="t0", sync=True
    )
    return TestClient(app)


def run(client, body=None):
    response = client.post("/sessions", json=body or {"seed": 0})
    assert response.status_code == 200, response.text
    return response.json()


class TestSessionLifecycle:
    def test_post_completes_and_is_retrievable(self, client):
        created = run(client)
        assert created["status"] == "complete"
        manifest = client.get(f"/sessions/{created['session_id']}").json()
        assert manifest["session_id"] == created["session_id"]
        assert manifest["front"]

    def test_repeat_post_reuses_stored_session(self, client):
        first = run(client)
        second = run(client)
        assert second == {"session_id": first["session_id"], "status": "complete"}

    def test_list_sessions(self, client):
        created = run(client)
        listing = client.get("/sessions").json()
        assert listing["sessions"] == [created["session_id"]]
        assert listing["active"] is None

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/feedfacedeadbeef").status_code == 404

    def test_invalid_preferences_422(self, client):
        body = {"preferences": {"critical_apis": ["/nope"]}, "seed": 0}
        response = client.post("/sessions", json=body)
        assert response.status_code == 422
        assert "/nope" in str(response.json()["detail"])

    def test_config_overrides_change_session_id(self, client):
        base = run(client)
        other = run(client, {"seed": 0, "population": 18})
        assert other["session_id"] != base["session_id"]


class TestFrontAndPlans:
    def test_front_endpoint(self, client):
        sid = run(client)["session_id"]
        front = client.get(f"/sessions/{sid}/front").json()["front"]
        assert front and all("objectives" in record for record in front)

    def test_plan_detail(self, client):
        sid = run(client)["session_id"]
        front = client.get(f"/sessions/{sid}/front").json()["front"]
        plan = client.get(f"/sessions/{sid}/plans/{front[0]['id']}").json()
        assert plan == front[0]
        assert set(plan["previews"]) == {"/login", "/compose", "/timeline"}

    def test_unknown_plan_404(self, client):
        sid = run(client)["session_id"]
        assert client.get(f"/sessions/{sid}/plans/p999").status_code == 404


class TestDendrogram:
    def test_root_drill(self, client):
        sid = run(client)["session_id"]
        manifest = client.get(f"/sessions/{sid}").json()
        root_id = manifest["dendrogram"]["root"]
        result = client.get(f"/sessions/{sid}/dendrogram/{root_id}").json()
        assert result["root"] == root_id
        assert result["node"]["id"] == root_id
        if result["children"]:
            assert len(result["children"]) == 2
            assert result["plan"] is None
        else:
            assert result["plan"] is not None

    def test_leaf_returns_plan(self, client):
        sid = run(client)["session_id"]
        manifest = client.get(f"/sessions/{sid}").json()
        leaves = [
            n["id"] for n in manifest["dendrogram"]["nodes"] if not n["children"]
        ]
        result = client.get(f"/sessions/{sid}/dendrogram/{leaves[0]}").json()
        assert result["children"] == []
        assert result["plan"]["id"].startswith("p")

    def test_unknown_node_404(self, client):
        sid = run(client)["session_id"]
        assert client.get(f"/sessions/{sid}/dendrogram/999").status_code == 404


class TestPreferencesUpdate:
    def test_put_spawns_new_session(self, client):
        first = run(client)
        update = {"preferences": {"critical_apis": ["/login"]}}
        response = client.put(
            f"/sessions/{first['session_id']}/preferences", json=update
        )
        assert response.status_code == 200
        second = response.json()
        assert second["status"] == "complete"
        assert second["session_id"] != first["session_id"]
        # both sessions remain retrievable side by side
        listing = client.get("/sessions").json()["sessions"]
        assert set(listing) == {first["session_id"], second["session_id"]}
        manifest = client.get(f"/sessions/{second['session_id']}").json()
        assert manifest["preferences"]["critical_apis"] == ["/login"]
        assert manifest["seed"] == 0  # inherited from the first session

    def test_put_invalid_prefs_422(self, client):
        first = run(client)
        response = client.put(
            f"/sessions/{first['session_id']}/preferences",
            json={"preferences": {"placement_pins": {"ghost": "cloud"}}},
        )
        assert response.status_code == 422


class TestMonitorStatus:
    def test_no_recent_data_inconclusive(self, client):
        status = client.get("/monitor/status").json()
        assert set(status["apis"]) == {"/login", "/compose", "/timeline"}
        assert all(v["inconclusive"] for v in status["apis"].values())
        assert status["re_recommend"] is False

    def test_matching_recent_not_triggered(self, jittered_context, tmp_path):
        topology = mini_topology()
        recent = generate_corpus(
            topology,
            mini_workload(40),
            LINKS,
            rng=np.random.default_rng(99),
            sigma=JITTER_SIGMA,
        )
        write_corpus(recent, tmp_path / "recent")
        app = create_app(
            jittered_context,
            SessionStore(tmp_path / "sessions"),
            FAST_CONFIG,
            monitor_dir=tmp_path / "recent",
            sync=True,
        )
        status = TestClient(app).get("/monitor/status").json()
        assert not status["re_recommend"]
        for verdict in status["apis"].values():
            assert not verdict["triggered"] and not verdict["inconclusive"]

    def test_shifted_recent_triggers(self, jittered_context, tmp_path):
        # latencies moved because the databases now live across the WAN
        topology = mini_topology()
        split = MigrationPlan(
            {
                c: ("cloud" if c in {"user_db", "post_db"} else "onprem")
                for c in topology.components
            }
        )
        shifted = generate_corpus(
            topology,
            mini_workload(40),
            LINKS,
            plan=split,
            rng=np.random.default_rng(5),
            sigma=JITTER_SIGMA,
        )
        write_corpus(shifted, tmp_path / "recent")
        app = create_app(
            jittered_context,
            SessionStore(tmp_path / "sessions"),
            FAST_CONFIG,
            monitor_dir=tmp_path / "recent",
            sync=True,
        )
        status = TestClient(app).get("/monitor/status").json()
        assert status["re_recommend"]
        assert status["apis"]["/compose"]["triggered"]
