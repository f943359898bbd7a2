import numpy as np
import pytest
from fastapi.testclient import TestClient

from wptopt.service.app import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def miso_system(seed=3):
    return {"n_t": 2,
            "nodes": [{"n_e": 1, "distance_m": 10.0, "weight": 1.0}],
            "rician_factor": 1.0, "seed": seed}


def test_health(client):
    body = client.get("/health").json()
    assert body["status"] == "ok"
    assert body["service"] == "wptopt"


def test_sweep_endpoint_rows(client):
    payload = {"geometry": "miso", "system": miso_system(),
               "budgets_w": [5.0, 20.0], "realizations": 2}
    response = client.post("/api/sweep", json=payload)
    assert response.status_code == 200
    rows = response.json()["rows"]
    assert len(rows) == 4
    for row in rows:
        assert row["error"] is None
        assert row["objective_w"] == pytest.approx(
            float(np.dot(row["weights"], row["node_powers_w"])), rel=1e-9)


def test_sweep_endpoint_rejects_bad_geometry_config(client):
    payload = {"geometry": "miso",
               "system": {"n_t": 2,
                          "nodes": [{"n_e": 2, "distance_m": 10.0, "weight": 1.0}]},
               "budgets_w": [5.0]}
    assert client.post("/api/sweep", json=payload).status_code == 422


def test_solve_endpoint_mimo_beam_norms(client):
    payload = {"geometry": "mimo",
               "system": {"n_t": 2,
                          "nodes": [{"n_e": 2, "distance_m": 10.0, "weight": 1.0}],
                          "seed": 5},
               "budget_w": 100.0, "strategy_grid_points": 60}
    response = client.post("/api/solve", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert sum(body["masses"]) == pytest.approx(1.0, abs=1e-12)
    for beam, level in zip(body["beams"], body["power_levels_w"]):
        norm_sq = sum(c["re"] ** 2 + c["im"] ** 2 for c in beam)
        assert norm_sq == pytest.approx(level, rel=1e-6, abs=1e-30)
    assert body["objective_w"] == pytest.approx(
        float(np.dot([1.0], body["node_powers_w"])), rel=1e-9)


def test_solve_endpoint_miso_matches_sweep(client):
    solve = client.post("/api/solve", json={
        "geometry": "miso", "system": miso_system(), "budget_w": 5.0}).json()
    sweep = client.post("/api/sweep", json={
        "geometry": "miso", "system": miso_system(), "budgets_w": [5.0],
        "realizations": 1}).json()["rows"][0]
    assert solve["objective_w"] == pytest.approx(sweep["objective_w"], rel=1e-12)


def test_curve_endpoint_monotone(client):
    payload = {"geometry": "mimo",
               "system": {"n_t": 2,
                          "nodes": [{"n_e": 2, "distance_m": 10.0, "weight": 1.0}],
                          "seed": 5},
               "budgets_w": [10.0], "strategy_grid_points": 40}
    body = client.post("/api/curve", json=payload).json()
    phi = np.array(body["phi_w"])
    assert phi[0] == 0.0
    assert np.all(np.diff(phi) >= 0.0)
    assert len(body["nu_w"]) == len(body["phi_w"]) == 41


def test_selftest_endpoint(client):
    body = client.post("/api/selftest").json()
    assert body["passed"] is True
    assert all(check["passed"] for check in body["checks"])
