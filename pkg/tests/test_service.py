import yaml
import pytest
from fastapi.testclient import TestClient

from msrpa.service.app import create_app


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


@pytest.fixture(scope="module")
def sim1_spec(sim1_path):
    return yaml.safe_load(sim1_path.read_text())


@pytest.fixture(scope="module")
def sim2_spec(sim2_path):
    return yaml.safe_load(sim2_path.read_text())


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok" and body["version"]


def test_validate_endpoint(client, sim1_spec):
    resp = client.post("/scenario/validate", json={"scenario": sim1_spec})
    assert resp.status_code == 200
    body = resp.json()
    assert body["passed"] is True
    assert {c["name"] for c in body["checks"]} == {
        "strong_robustness",
        "f_local_adversaries",
        "comm_rate_exceeds_followers",
    }


def test_validate_with_override_flags_failure(client, sim1_spec):
    resp = client.post(
        "/scenario/validate",
        json={"scenario": sim1_spec, "overrides": {"eta": 9}},
    )
    assert resp.json()["failed"] == ["comm_rate_exceeds_followers"]


def test_run_endpoint_full_payload(client, sim2_spec):
    resp = client.post(
        "/simulation/run",
        json={"scenario": sim2_spec, "check_theorems": True},
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["name"] == "sim2"
    assert body["validation"]["passed"] is True
    assert body["metrics"]["monotonic"] is True
    assert body["metrics"]["theorem2_T"] == 7
    th = body["theorems"]
    assert th["theorem"] == "bounded_finite_time"
    assert th["passed"] is True
    assert th["observed_convergence"] <= th["guaranteed_from"]
    arts = body["artifacts"]
    assert arts["trace_csv"].splitlines()[0] == "t,agent_id,role,behavior,x,u,in_c,accepted_value"
    assert arts["messages_csv"].splitlines()[0] == "t,sender,receiver,value"
    assert arts["metrics_csv"].splitlines()[0] == "t,e,tau,V"


def test_run_endpoint_unbounded_theorem(client, sim1_spec):
    resp = client.post(
        "/simulation/run",
        json={"scenario": sim1_spec, "check_theorems": True, "include_artifacts": False},
    )
    body = resp.json()
    assert body["artifacts"] is None
    th = body["theorems"]
    assert th["theorem"] == "unbounded_exact_tracking"
    assert th["passed"] is True and th["guaranteed_from"] == 10


def test_run_artifacts_are_deterministic(client, sim1_spec):
    payload = {"scenario": sim1_spec}
    first = client.post("/simulation/run", json=payload).json()["artifacts"]
    second = client.post("/simulation/run", json=payload).json()["artifacts"]
    assert first == second


def test_replay_endpoint(client, sim1_spec):
    resp = client.post("/simulation/replay-check", json={"scenario": sim1_spec})
    assert resp.json() == {"identical": True}


def test_robustness_endpoint_reference_instance(client):
    graph = {"circulant": {"n": 14, "k": 5, "undirected": True}}
    ok = client.post(
        "/graph/robustness",
        json={"graph": graph, "s": [1, 2, 3, 4, 5], "r": 5, "index_base": 1,
              "bruteforce": True},
    ).json()
    assert ok["holds"] is True and ok["bruteforce"] is True
    assert ok["peel_order"][0] == {"round": 1, "agents": [5, 13]}
    fail = client.post(
        "/graph/robustness",
        json={"graph": graph, "s": [1, 2, 3, 4, 5], "r": 6, "index_base": 1},
    ).json()
    assert fail["holds"] is False
    assert fail["witness"] == list(range(5, 14))


def test_robustness_capacity_guard(client):
    graph = {"circulant": {"n": 40, "k": 2, "undirected": True}}
    resp = client.post(
        "/graph/robustness",
        json={"graph": graph, "s": [0], "r": 1, "bruteforce": True},
    )
    assert resp.status_code == 413


def test_malformed_scenario_is_422(client, sim1_spec):
    bad = dict(sim1_spec)
    bad["leaders"] = [1, 2, 3, 4, 6]  # agent 6 is also a follower
    resp = client.post("/scenario/validate", json={"scenario": bad})
    assert resp.status_code == 422
    assert "partition" in resp.json()["detail"]


def test_unknown_scenario_keys_are_422(client, sim1_spec):
    bad = dict(sim1_spec)
    bad["bogus"] = True
    resp = client.post("/scenario/validate", json={"scenario": bad})
    assert resp.status_code == 422


def test_edge_list_paths_rejected(client, sim1_spec):
    bad = dict(sim1_spec)
    bad["graph"] = {"edge_list": "/etc/passwd", "n": 14}
    resp = client.post("/scenario/validate", json={"scenario": bad})
    assert resp.status_code == 422
    assert "self-contained" in resp.json()["detail"]
