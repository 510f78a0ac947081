import json
import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from armsynth.server.app import create_app

TINY_WS = """
bbox 0 0 3 3
start 1.6 1.6
region target
 -1 0 -1
 1 0 2
 0 -1 -1
 0 1 2
end
"""

CORRIDOR_WS = """
bbox 0 0 6 6
start 2.25 0.75
region target
 -1 0 -2
 1 0 2.5
 0 -1 -2
 0 1 2.5
end
"""

OPTS = {"grid": 0.5, "gp_budget": 30, "max_links": 3, "kmax": 40, "seed": 0}


@pytest.fixture(scope="module")
def client():
    with TestClient(create_app()) as c:
        yield c


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok" and body["version"]


def test_plan_endpoint(client):
    resp = client.post("/plan", json={"workspace": TINY_WS, "options": OPTS})
    body = resp.json()
    assert resp.status_code == 200 and body["feasible"]
    assert len(body["path"]) == 1  # start cell is already a target cell
    assert len(body["centers"]) == len(body["path"])


def test_plan_with_blocked_paths(client):
    payload = {"workspace": CORRIDOR_WS, "options": {"grid": 0.5, "kmax": 40}}
    first = client.post("/plan", json=payload).json()
    assert first["feasible"]
    payload["blocked"] = [first["path"]]
    second = client.post("/plan", json=payload).json()
    assert second["feasible"] and second["path"] != first["path"]


def test_plan_infeasible(client):
    ws = """
bbox 0 0 3 3
start 0.5 0.5
region obstacle
 -1 0 -1
 1 0 2
 0 -1 0
 0 1 3
end
region target
 -1 0 -2
 1 0 3
 0 -1 -1
 0 1 2
end
"""
    body = client.post("/plan", json={"workspace": ws,
                                      "options": {"grid": 1.0, "kmax": 15}}).json()
    assert not body["feasible"] and body["path"] == []


def test_robustness_endpoint(client):
    body = client.post("/robustness", json={
        "workspace": CORRIDOR_WS,
        "word": "B ε JO ε L ε JO ε L ε EN",
        "lengths": [1.6, 1.8],
        "options": OPTS,
    }).json()
    assert body["status"] == "optimal"
    assert body["rho"] is not None and abs(body["rho"]) <= 1e-6
    assert len(body["path"]) >= 2


def test_robustness_unreachable_sentinel(client):
    body = client.post("/robustness", json={
        "workspace": CORRIDOR_WS,
        "word": "B ε JO ε L ε EN",
        "lengths": [1.0],
        "options": OPTS,
    }).json()
    assert body["rho"] is None and body["rho_text"] == "-inf"
    assert body["status"] == "infeasible-LP"


def test_synthesize_and_check_round_trip(client):
    resp = client.post("/synthesize", json={"workspace": CORRIDOR_WS,
                                            "options": OPTS})
    body = resp.json()
    assert body["status"] == "success"
    design = body["design"]
    assert design["word"].endswith("EN")
    arts = body["artifacts"]
    for key in ("report", "design", "trajectory_csv", "history_csv", "svg",
                "log_jsonl"):
        assert arts[key]
    doc = json.loads(arts["design"])
    assert doc["format"] == "armsynth-design/1"
    assert doc["word"] == design["word"]

    check = client.post("/check", json={"design": design,
                                        "workspace": CORRIDOR_WS}).json()
    assert check["ok"] and check["rho"] is not None

    # tamper with the path: verification must reject it
    tampered = dict(design)
    tampered["path"] = list(design["path"])
    tampered["path"][-1] = 0
    check = client.post("/check", json={"design": tampered,
                                        "workspace": CORRIDOR_WS}).json()
    assert not check["ok"]


def test_robustness_with_explicit_path(client):
    plan_body = client.post("/plan", json={"workspace": CORRIDOR_WS,
                                           "options": OPTS}).json()
    body = client.post("/robustness", json={
        "workspace": CORRIDOR_WS,
        "word": "B ε JO ε L ε JO ε L ε EN",
        "lengths": [1.6, 1.8],
        "path": plan_body["path"],
        "options": OPTS,
    }).json()
    assert body["status"] == "optimal" and body["path"] == plan_body["path"]


def test_check_rejects_over_budget_witness(client):
    resp = client.post("/synthesize", json={"workspace": CORRIDOR_WS,
                                            "options": OPTS}).json()
    design = dict(resp["design"])
    # a witness claiming more torque than the declared budget is no
    # certificate, even if the simulated trajectory stays in bounds
    ubound = design["options"]["ubound"]
    k = len(design["path"]) - 1
    m = len(design["lengths"])
    design["control"] = [[0.0] * m for _ in range(k)]
    design["control"][0][0] = ubound + 0.5
    body = client.post("/check", json={"design": design,
                                       "workspace": CORRIDOR_WS}).json()
    assert not body["ok"]


def test_synthesize_unsynthesizable(client):
    ws = """
bbox 0 0 30 30
start 1.5 1.5
region target
 -1 0 -27
 1 0 29
 0 -1 -27
 0 1 29
end
"""
    body = client.post("/synthesize", json={
        "workspace": ws,
        "options": {"grid": 1.0, "gp_budget": 6, "max_links": 2, "kmax": 80,
                    "paths_per_structure": 2, "grid_per_dim": 6},
    }).json()
    assert body["status"] == "unsynthesizable"
    assert body["artifacts"]["report"].startswith("armsynth")
    assert body["artifacts"]["log_jsonl"]


def test_workspace_error_maps_to_422(client):
    resp = client.post("/synthesize", json={"workspace": "not a workspace",
                                            "options": OPTS})
    assert resp.status_code == 422
    body = resp.json()
    assert body["code"] == "workspace-error"


def test_catalog_error_maps_to_422(client):
    resp = client.post("/synthesize", json={"workspace": TINY_WS,
                                            "catalog": "node B nonsense",
                                            "options": OPTS})
    assert resp.status_code == 422
    assert resp.json()["code"] == "catalog-error"
