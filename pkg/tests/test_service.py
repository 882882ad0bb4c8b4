import json

import pytest
from fastapi.testclient import TestClient

from gasrotor.config import Config
from gasrotor.service import create_app
from gasrotor.surrogate.modelio import save_model

from test_surrogate import TestModelIO
from conftest import REFERENCE_GEOMETRY, REFERENCE_OPERATING


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(Config()))


def compute_body(example_rotor_text, evaluator="oracle", sweep=None, accuracy=None):
    body = {
        "rotor": json.loads(example_rotor_text),
        "hgjb": dict(REFERENCE_GEOMETRY),
        "operating": dict(REFERENCE_OPERATING),
        "evaluator": evaluator,
    }
    if sweep is not None:
        body["sweep"] = sweep
    if accuracy is not None:
        body["accuracy"] = accuracy
    return body


class TestValidateEndpoint:
    def test_valid_rotor(self, client):
        doc = {"format_version": 1, "elements": [
            {"L_m": 0.05, "layers": [{"d_m": 0.0, "D_m": 0.02, "rho_kg_m3": 8000}]},
            {"L_m": 0.05, "layers": [{"d_m": 0.0, "D_m": 0.02, "rho_kg_m3": 8000}]}],
            "journal_a": 0, "journal_b": 1}
        r = client.post("/api/v1/rotor/validate", json=doc)
        assert r.status_code == 200
        # the two halves together weigh the closed-form solid cylinder mass
        assert r.json()["mass_kg"] == pytest.approx(0.2513, abs=5e-5)

    def test_semantic_error_names_element(self, client):
        doc = {"format_version": 1, "elements": [
            {"L_m": 0.05, "layers": [{"d_m": 0.03, "D_m": 0.02, "rho_kg_m3": 8000}]},
            {"L_m": 0.05, "layers": [{"d_m": 0.0, "D_m": 0.02, "rho_kg_m3": 8000}]}],
            "journal_a": 0, "journal_b": 1}
        r = client.post("/api/v1/rotor/validate", json=doc)
        assert r.status_code == 422
        body = r.json()
        assert body["code"] == "invariant_violation"
        assert "elements[0]" in body["message"]

    def test_empty_body_is_400(self, client):
        r = client.post("/api/v1/rotor/validate", content=b"")
        assert r.status_code == 400
        assert r.json()["code"] == "syntax_error"

    def test_malformed_json_is_400(self, client):
        r = client.post("/api/v1/rotor/validate", content=b"{not json")
        assert r.status_code == 400


class TestComputeEndpoint:
    def test_oracle_compute(self, client, example_rotor_text):
        r = client.post("/api/v1/compute", json=compute_body(example_rotor_text))
        assert r.status_code == 200
        body = r.json()
        assert body["evaluator"] == "oracle"
        assert len(body["modes"]) == 4
        assert body["modes"][0]["excited"] is True
        assert body["power_loss_w"] > 0
        assert body["load_capacity_n"] > 0
        assert body["timing_ms"]["total"] >= body["timing_ms"]["evaluate"] >= 0

    def test_idempotent_modulo_timing(self, client, example_rotor_text):
        body = compute_body(example_rotor_text)
        a = client.post("/api/v1/compute", json=body).json()
        b = client.post("/api/v1/compute", json=body).json()
        a.pop("timing_ms"), b.pop("timing_ms")
        assert a == b

    def test_surrogate_without_model_is_404(self, client, example_rotor_text):
        r = client.post("/api/v1/compute",
                        json=compute_body(example_rotor_text, evaluator="surrogate"))
        assert r.status_code == 404
        assert r.json()["code"] == "model_not_loaded"

    def test_zero_speed_is_422(self, client, example_rotor_text):
        body = compute_body(example_rotor_text)
        body["operating"]["N"] = 0.0
        r = client.post("/api/v1/compute", json=body)
        assert r.status_code == 422

    def test_unknown_fluid_is_422(self, client, example_rotor_text):
        body = compute_body(example_rotor_text)
        body["operating"]["fluid"] = "unobtainium"
        r = client.post("/api/v1/compute", json=body)
        assert r.status_code == 422
        assert r.json()["code"] == "unknown_fluid"

    def test_missing_section_is_400(self, client, example_rotor_text):
        body = compute_body(example_rotor_text)
        del body["hgjb"]
        assert client.post("/api/v1/compute", json=body).status_code == 400

    def test_accuracy_selector(self, client, example_rotor_text):
        r = client.post("/api/v1/compute", json=compute_body(example_rotor_text,
                                                             accuracy=1))
        assert r.status_code == 200
        bad = client.post("/api/v1/compute",
                          json=compute_body(example_rotor_text, accuracy=9))
        assert bad.status_code == 400


class TestSweepEndpoint:
    def _collect(self, client, body):
        events = []
        with client.stream("POST", "/api/v1/sweep", json=body) as response:
            assert response.status_code == 200
            for line in response.iter_lines():
                if line:
                    events.append(json.loads(line))
        return events

    def test_streamed_progress_and_result(self, client, example_rotor_text):
        sweep = {"delta_h_r": 1e-6, "delta_h_g": 1e-6, "grid_n": 3,
                 "speeds_rpm": [40000.0]}
        events = self._collect(client, compute_body(example_rotor_text, sweep=sweep))
        progress = [e for e in events if e["event"] == "progress"]
        assert [p["done"] for p in progress] == list(range(1, 10))
        assert progress[0]["total"] == 9
        result = events[-1]
        assert result["event"] == "result"
        doc = result["document"]
        assert len(doc["axes"]["delta_h_r_um"]) == 3
        assert doc["metadata"]["evaluator"] == "oracle"
        assert doc["metadata"]["design_digest"]

    def test_degenerate_single_cell_matches_compute(self, client, example_rotor_text):
        sweep = {"delta_h_r": 0.0, "delta_h_g": 0.0, "grid_n": 1,
                 "speeds_rpm": [40000.0]}
        events = self._collect(client, compute_body(example_rotor_text, sweep=sweep))
        doc = events[-1]["document"]
        assert len(doc["axes"]["delta_h_r_um"]) == 1
        compute = client.post("/api/v1/compute",
                              json=compute_body(example_rotor_text)).json()
        worst = min(m["log_dec"] for m in compute["modes"] if m["excited"])
        assert doc["metrics"]["worst_log_dec"][0][0] == pytest.approx(worst, rel=1e-12)

    def test_sweep_requires_sweep_section(self, client, example_rotor_text):
        r = client.post("/api/v1/sweep", json=compute_body(example_rotor_text))
        assert r.status_code == 400


class TestModelsEndpoint:
    def test_health_without_model(self, client):
        r = client.get("/healthz")
        assert r.status_code == 200
        body = r.json()
        assert body["status"] == "ok" and body["model_loaded"] is False

    def test_empty_model_dir(self, tmp_path):
        app = create_app(Config(model_dir=str(tmp_path)))
        with TestClient(app) as client:
            r = client.get("/api/v1/models")
            assert r.status_code == 200 and r.json()["models"] == []

    def test_corrupted_model_listed_invalid_never_loaded(self, tmp_path):
        model = TestModelIO()._random_model()
        good = tmp_path / "good.grsm"
        bad = tmp_path / "bad.grsm"
        save_model(model, str(good))
        blob = bytearray(good.read_bytes())
        blob[-1] ^= 0xFF
        bad.write_bytes(bytes(blob))
        app = create_app(Config(model_dir=str(tmp_path), model_path=str(bad)))
        with TestClient(app) as client:
            health = client.get("/healthz").json()
            assert health["model_loaded"] is False
            entries = {e["name"]: e for e in client.get("/api/v1/models").json()["models"]}
            assert entries["bad.grsm"]["status"] == "invalid"
            assert entries["good.grsm"]["status"] == "available"

    def test_loaded_model_reported(self, tmp_path, example_rotor_text):
        model = TestModelIO()._random_model()
        path = tmp_path / "m.grsm"
        save_model(model, str(path))
        app = create_app(Config(model_path=str(path)))
        with TestClient(app) as client:
            health = client.get("/healthz").json()
            assert health["model_loaded"] is True and health["model_digest"]
            r = client.post("/api/v1/compute",
                            json=compute_body(example_rotor_text, evaluator="surrogate"))
            assert r.status_code == 200
            assert r.json()["evaluator"] == "surrogate"
