import pytest
from fastapi.testclient import TestClient

from cfnoma import __version__
from cfnoma.main import app
from cfnoma.schemas.performance import McReport, SinrBreakdown

SCENARIO = {"M": 4, "N": 4, "K": 4, "L": 2, "P_total_dbm": 30, "num_topologies": 1, "master_seed": 3}


@pytest.fixture
def client():
    return TestClient(app)


def test_root(client):
    resp = client.get("/")
    assert resp.status_code == 200
    assert resp.json() == {"service": "cfnoma", "version": __version__}


def test_evaluate_one_topology(client):
    resp = client.post("/api/v1/evaluate", json={"config": SCENARIO, "topology": 2})
    assert resp.status_code == 200
    data = resp.json()
    assert data["topology"] == 2
    assert len(data["rows"]) == 1
    assert data["rows"][0]["status"] == "ok"
    assert data["rows"][0]["seed"] == 2
    assert len(data["user_se"]) == 4


def test_evaluate_matches_the_sweep(client):
    from cfnoma.schemas.scenario import ScenarioConfig
    from cfnoma.services.experiment_service import ExperimentService

    resp = client.post("/api/v1/evaluate", json={"config": SCENARIO})
    expected = ExperimentService().run_sweep(ScenarioConfig(**SCENARIO)).results
    assert resp.json()["rows"][0]["sse_bits_per_hz"] == pytest.approx(expected.loc[0, "sse_bits_per_hz"])


def test_domain_errors_map_to_422(client):
    resp = client.post("/api/v1/evaluate", json={"config": SCENARIO, "layout": 5})
    assert resp.status_code == 422
    assert "layout 5" in resp.json()["detail"]


def test_invalid_scenario_is_rejected(client):
    resp = client.post("/api/v1/evaluate", json={"config": {"M": 4, "K": 4, "L": 2, "P_total_dbm": 30}})
    assert resp.status_code == 422


def test_verify_mocked(client, monkeypatch):
    import cfnoma.api.v1.routes as routes

    breakdown = SinrBreakdown.from_terms(0.5, 0.5, 0.0, 0.0, 0.0)

    def mock_verify_topology(config, topology):
        return McReport(
            num_realizations=config.mc_realizations, tolerance=config.mc_tolerance,
            closed_form=[breakdown], empirical=[breakdown], term_errors={"ds": 0.0}, se_errors=[0.0],
            passed=True,
        )

    monkeypatch.setattr(routes.experiment_service, "verify_topology", mock_verify_topology)

    resp = client.post("/api/v1/verify", json={"config": SCENARIO})
    assert resp.status_code == 200
    data = resp.json()
    assert data["passed"] is True
    assert data["num_realizations"] == 10000
    assert data["closed_form"][0]["sinr"] == pytest.approx(1.0 / 3.0)
