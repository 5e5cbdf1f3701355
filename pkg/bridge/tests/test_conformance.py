"""Bridge acceptance: the stub passes the core library's protocol validator,
and adaptive discovery over loopback reproduces the golden traces.

The core package (cal-infill) is driven strictly through its external
interfaces here: the conformance validator, the remote wire protocol, and
the `python -m cal_infill` command line.
"""

from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from cal_infill.backends import validate_endpoint

DATA = Path(__file__).parent / "data"

UNDER_PROBE_SET = set(range(1, 15))
OVER_PROBE_SET = set(range(6, 22))


def run_discover(stub_url, tmp_path, l_init):
    out = tmp_path / f"results_{l_init}.jsonl"
    cmd = [
        sys.executable, "-m", "cal_infill", "discover",
        "--tasks", str(DATA / "tasks.jsonl"),
        "--backend", f"remote:{stub_url}",
        "--bias", str(DATA / "bias.json"),
        "--l-init", str(l_init),
        "--step", "1", "--tolerance", "4", "--l-max", "64",
        "--out", str(out),
    ]
    proc = subprocess.run(cmd, capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    (line,) = out.read_text().splitlines()
    return json.loads(line)


class TestBridgeConformance:
    def test_stub_passes_protocol_validator(self, stub_url):
        issues = validate_endpoint(stub_url, probe_lengths=(1, 2, 5), timeout=10.0)
        assert issues == [], issues
        print("ACCEPTANCE CRITERION 8a (stub passes the protocol validator): PASS")

    def test_discover_over_loopback_reproduces_golden_traces(self, stub_url, tmp_path):
        under = run_discover(stub_url, tmp_path, l_init=4)
        assert under["l_used"] == 10
        assert under["search"]["probe_count"] == 14
        assert {p["length"] for p in under["search"]["trace"]} == UNDER_PROBE_SET
        assert under["search"]["phi_c_hat"] == pytest.approx(1.821, abs=5e-3)

        over = run_discover(stub_url, tmp_path, l_init=16)
        assert over["l_used"] == 10
        assert over["search"]["probe_count"] == 16
        assert {p["length"] for p in over["search"]["trace"]} == OVER_PROBE_SET
        print("ACCEPTANCE CRITERION 8b (golden traces over loopback): PASS")
