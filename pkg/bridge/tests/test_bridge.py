from __future__ import annotations

import json
import math
import urllib.error
import urllib.request
from pathlib import Path

import pytest

from cal_bridge.models import BridgeConfigError, BridgeRequestError, StubModel, load_model

DATA = Path(__file__).parent / "data"


def call(url, method="GET", body=None):
    payload = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(url, data=payload, method=method,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=10) as resp:
            return resp.status, json.loads(resp.read().decode())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read().decode())


def probe_body(mask_length):
    return {"prefix": "def f():\n", "suffix": "\nreturn x", "mask_length": mask_length}


class TestStubModel:
    def test_curve_file_loads(self):
        model = load_model(f"stub:{DATA / 'golden_curve.jsonl'}")
        assert isinstance(model, StubModel)
        assert sorted(model.curve) == list(range(1, 22))

    def test_probe_mean_matches_recorded_phi(self):
        model = load_model(f"stub:{DATA / 'golden_curve.jsonl'}")
        values = model.probe("p", "s", 10)
        assert len(values) == 10
        assert math.fsum(values) / 10 == pytest.approx(0.997, abs=1e-12)

    def test_unknown_length_is_request_error(self):
        model = load_model(f"stub:{DATA / 'golden_curve.jsonl'}")
        with pytest.raises(BridgeRequestError):
            model.probe("p", "s", 99)

    def test_non_stub_spec_rejected(self):
        with pytest.raises(BridgeConfigError, match="stub:"):
            load_model("some-8b-checkpoint")

    def test_multi_task_curve_rejected(self, tmp_path):
        path = tmp_path / "two.jsonl"
        path.write_text(
            json.dumps({"task_id": "a", "length": 1, "confidences": [], "phi": 0.5,
                        "backend_id": "", "curve_only": True}) + "\n" +
            json.dumps({"task_id": "b", "length": 2, "confidences": [], "phi": 0.5,
                        "backend_id": "", "curve_only": True}) + "\n")
        with pytest.raises(BridgeConfigError, match="one"):
            load_model(f"stub:{path}")

    def test_full_confidence_vectors_served_verbatim(self, tmp_path):
        path = tmp_path / "full.jsonl"
        path.write_text(json.dumps({"task_id": "a", "length": 2, "confidences": [0.25, 0.75],
                                    "phi": 0.5, "backend_id": "", "curve_only": False}) + "\n")
        model = load_model(f"stub:{path}")
        assert model.probe("p", "s", 2) == [0.25, 0.75]


class TestWireProtocol:
    def test_capabilities_truthful(self, stub_url):
        status, caps = call(f"{stub_url}/v1/capabilities")
        assert status == 200
        assert caps == {"model_id": "stub", "max_length": 128, "supports_decode": True,
                        "supports_tokenize": True, "max_concurrency": 1}

    def test_probe_round_trip(self, stub_url):
        status, obj = call(f"{stub_url}/v1/probe", "POST", probe_body(10))
        assert status == 200
        assert len(obj["confidences"]) == 10
        assert math.fsum(obj["confidences"]) / 10 == pytest.approx(0.997, abs=1e-12)
        assert all(0.0 < v <= 1.0 for v in obj["confidences"])

    def test_zero_mask_length_is_400(self, stub_url):
        status, obj = call(f"{stub_url}/v1/probe", "POST", probe_body(0))
        assert status == 400 and "error" in obj

    def test_over_max_length_is_400(self, stub_url):
        status, obj = call(f"{stub_url}/v1/probe", "POST", probe_body(129))
        assert status == 400 and "error" in obj

    def test_unrecorded_length_is_400(self, stub_url):
        status, obj = call(f"{stub_url}/v1/probe", "POST", probe_body(64))
        assert status == 400 and "not in the stub curve" in obj["error"]

    def test_missing_field_is_400(self, stub_url):
        status, obj = call(f"{stub_url}/v1/probe", "POST", {"prefix": "p", "mask_length": 3})
        assert status == 400 and "suffix" in obj["error"]

    def test_non_integer_mask_length_is_400(self, stub_url):
        body = probe_body(3)
        body["mask_length"] = "3"
        status, obj = call(f"{stub_url}/v1/probe", "POST", body)
        assert status == 400

    def test_unknown_path_is_404(self, stub_url):
        status, obj = call(f"{stub_url}/v1/nope", "POST", {})
        assert status == 404 and "error" in obj

    def test_invalid_json_is_400(self, stub_url):
        req = urllib.request.Request(f"{stub_url}/v1/probe", data=b"{nope",
                                     method="POST", headers={"Content-Type": "application/json"})
        try:
            with urllib.request.urlopen(req, timeout=10):
                raise AssertionError("expected HTTP error")
        except urllib.error.HTTPError as exc:
            assert exc.code == 400

    def test_identical_requests_identical_responses(self, stub_url):
        first = call(f"{stub_url}/v1/probe", "POST", probe_body(8))
        second = call(f"{stub_url}/v1/probe", "POST", probe_body(8))
        assert first == second

    def test_decode_constant(self, stub_url):
        status, obj = call(f"{stub_url}/v1/decode", "POST", probe_body(10))
        assert status == 200 and obj == {"middle": "stub middle"}

    def test_tokenize_whitespace_count(self, stub_url):
        status, obj = call(f"{stub_url}/v1/tokenize", "POST", {"text": "three token text"})
        assert status == 200 and obj == {"length": 3}
        status, obj = call(f"{stub_url}/v1/tokenize", "POST", {"text": ""})
        assert status == 200 and obj == {"length": 0}
