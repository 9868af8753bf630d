import json

import pytest
from fastapi.testclient import TestClient

from avor.config import AppConfig, load_config
from avor.service import create_app

from conftest import synthetic_doc, write_doc


def doc_with_furniture():
    doc = synthetic_doc(others=True)
    doc["road"]["static_objects"] = [
        {"class": "building",
         "polygon": [[30.0, 9.0], [40.0, 9.0], [40.0, 11.0], [30.0, 11.0]]},
    ]
    return doc


@pytest.fixture()
def client(tmp_path, monkeypatch):
    scenarios = tmp_path / "scenarios"
    scenarios.mkdir()
    write_doc(scenarios, doc_with_furniture(), "synthetic.json")
    monkeypatch.setenv("AVOR_GRID_RES", "0.5")
    app = create_app(scenarios, tmp_path / "ratings", load_config())
    return TestClient(app)


def open_session(client, pop="O", rater="alice"):
    resp = client.post("/api/sessions", json={
        "rater_id": rater, "scenario_id": "synthetic", "population": pop})
    assert resp.status_code == 201
    return resp.json()["session_id"]


class TestScenarioEndpoints:
    def test_list(self, client):
        [item] = client.get("/api/scenarios").json()
        assert item["id"] == "synthetic"
        assert item["n_frames"] == 80
        assert item["dt"] == pytest.approx(0.1)
        assert item["populations"] == ["O", "A", "A+R"]

    def test_frames_population_filtering(self, client):
        by_pop = {
            pop: client.get("/api/scenarios/synthetic/frames",
                            params={"population": pop}).json()
            for pop in ("O", "A", "A+R")
        }
        # population O: ego + cut-in only; A adds the lead; furniture only at A+R
        assert [v["id"] for v in by_pop["O"]["frames"][0]["vehicles"]] == [
            "ego", "cutin"]
        assert [v["id"] for v in by_pop["A"]["frames"][0]["vehicles"]] == [
            "ego", "cutin", "lead"]
        assert by_pop["O"]["furniture"] == []
        assert by_pop["A"]["furniture"] == []
        assert [f["class"] for f in by_pop["A+R"]["furniture"]] == ["building"]
        assert by_pop["A+R"]["road"]["lane_count"] == 2

    def test_frames_bad_population(self, client):
        resp = client.get("/api/scenarios/synthetic/frames",
                          params={"population": "X"})
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad_population"

    def test_unknown_scenario_404(self, client):
        resp = client.get("/api/scenarios/nope/frames")
        assert resp.status_code == 404
        body = resp.json()
        assert body["code"] == "scenario_not_found"
        assert "message" in body

    def test_risk_endpoint(self, client):
        resp = client.get("/api/scenarios/synthetic/risk",
                          params={"model": "avor", "population": "O"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["model"] == "AVOR"
        assert len(body["t"]) == len(body["raw"]) == 80
        assert all(v >= 0.0 for v in body["raw"])
        assert min(body["normalized"]) >= 0.0
        assert max(body["normalized"]) <= 10.0

    def test_risk_is_cached(self, client):
        a = client.get("/api/scenarios/synthetic/risk",
                       params={"model": "drf", "population": "A"}).json()
        b = client.get("/api/scenarios/synthetic/risk",
                       params={"model": "drf", "population": "A"}).json()
        assert a == b

    def test_risk_bad_model(self, client):
        resp = client.get("/api/scenarios/synthetic/risk",
                          params={"model": "gbm"})
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad_model"


class TestSessions:
    def test_create_requires_fields(self, client):
        resp = client.post("/api/sessions", json={"rater_id": "a"})
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad_request"

    def test_create_checks_scenario(self, client):
        resp = client.post("/api/sessions", json={
            "rater_id": "a", "scenario_id": "nope", "population": "O"})
        assert resp.status_code == 404

    def test_rating_round_trip_with_downsampling(self, client, tmp_path):
        session = open_session(client, pop="A+R")
        # 20 Hz client samples: the stored trace must be the 10 Hz
        # previous-value-hold of this series
        samples = [{"t": round(0.05 * k, 6), "srr": min(10.0, 0.1 * k)}
                   for k in range(41)]  # t in [0, 2]
        resp = client.post(f"/api/sessions/{session}/ratings",
                           json={"samples": samples})
        assert resp.status_code == 201
        assert resp.json()["stored_samples"] == 21  # 0.0 .. 2.0 at 10 Hz

        [stored] = client.get("/api/ratings",
                              params={"scenario": "synthetic"}).json()
        assert stored["rater_id"] == "alice"
        assert stored["population"] == "A+R"
        assert stored["session_id"] == session
        ts = [s["t"] for s in stored["samples"]]
        assert ts == [round(0.1 * k, 6) for k in range(21)]
        # hold semantics: the 10 Hz sample at t carries the 20 Hz value at t
        for s in stored["samples"]:
            assert s["srr"] == pytest.approx(2.0 * s["t"], abs=1e-9)
        # and the file on disk matches the API view
        path = tmp_path / "ratings" / f"{session}.json"
        assert json.loads(path.read_text())["scenario_id"] == "synthetic"

    def test_double_submit_conflicts(self, client):
        session = open_session(client)
        samples = [{"t": 0.0, "srr": 5.0}, {"t": 1.0, "srr": 6.0}]
        assert client.post(f"/api/sessions/{session}/ratings",
                           json={"samples": samples}).status_code == 201
        resp = client.post(f"/api/sessions/{session}/ratings",
                           json={"samples": samples})
        assert resp.status_code == 409
        assert resp.json()["code"] == "already_submitted"

    def test_unknown_session_404(self, client):
        resp = client.post("/api/sessions/deadbeef/ratings",
                           json={"samples": [{"t": 0.0, "srr": 1.0}]})
        assert resp.status_code == 404

    @pytest.mark.parametrize("samples", [
        [],
        [{"t": 0.0}],
        [{"t": 0.0, "srr": "high"}],
        [{"t": 1.0, "srr": 1.0}, {"t": 1.0, "srr": 2.0}],
        [{"t": 0.0, "srr": 11.0}],
    ])
    def test_bad_samples_rejected(self, client, samples):
        session = open_session(client)
        resp = client.post(f"/api/sessions/{session}/ratings",
                           json={"samples": samples})
        assert resp.status_code == 400
        assert resp.json()["code"] == "bad_samples"

    def test_ratings_filter_by_scenario(self, client):
        session = open_session(client)
        samples = [{"t": 0.0, "srr": 5.0}, {"t": 1.0, "srr": 6.0}]
        client.post(f"/api/sessions/{session}/ratings",
                    json={"samples": samples})
        assert client.get("/api/ratings",
                          params={"scenario": "other"}).json() == []
        assert len(client.get("/api/ratings").json()) == 1
