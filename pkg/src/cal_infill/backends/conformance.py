"""Protocol validator for bridge endpoints.

Runs a battery of checks against a live endpoint and returns the list of
violations (empty list = conformant): capabilities schema, probe length and
value-range contract, probe determinism, and error codes for invalid
requests. Uses raw HTTP so status codes can be asserted directly.
"""

from __future__ import annotations

import json
import math
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Sequence

_PROBE_PREFIX = "def f(x):\n    return"
_PROBE_SUFFIX = "\nprint(f(2))"

_CAPABILITY_FIELDS = {
    "model_id": str,
    "max_length": int,
    "supports_decode": bool,
    "supports_tokenize": bool,
    "max_concurrency": int,
}


@dataclass(frozen=True)
class ConformanceIssue:
    check: str
    detail: str


def _call(base_url: str, method: str, path: str, body: dict | None,
          timeout: float) -> tuple[int, object]:
    payload = None if body is None else json.dumps(body).encode("utf-8")
    req = urllib.request.Request(base_url.rstrip("/") + path, data=payload, method=method,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            return resp.status, json.loads(resp.read().decode("utf-8"))
    except urllib.error.HTTPError as exc:
        raw = exc.read()
        try:
            return exc.code, json.loads(raw.decode("utf-8"))
        except Exception:
            return exc.code, raw[:200]


def validate_endpoint(base_url: str, probe_lengths: Sequence[int] = (1, 2, 5),
                      timeout: float = 30.0) -> list[ConformanceIssue]:
    issues: list[ConformanceIssue] = []

    def fail(check: str, detail: str) -> None:
        issues.append(ConformanceIssue(check=check, detail=detail))

    status, caps = _call(base_url, "GET", "/v1/capabilities", None, timeout)
    if status != 200 or not isinstance(caps, dict):
        fail("capabilities", f"GET /v1/capabilities -> {status}: {caps!r}")
        return issues
    for name, kind in _CAPABILITY_FIELDS.items():
        if name not in caps:
            fail("capabilities", f"missing field {name!r}")
        elif not isinstance(caps[name], kind):
            fail("capabilities", f"field {name!r} should be {kind.__name__}, got {caps[name]!r}")
    if issues:
        return issues
    max_length = caps["max_length"]

    for length in probe_lengths:
        body = {"prefix": _PROBE_PREFIX, "suffix": _PROBE_SUFFIX, "mask_length": length}
        status, first = _call(base_url, "POST", "/v1/probe", body, timeout)
        if status != 200 or not isinstance(first, dict) or "confidences" not in first:
            fail("probe", f"L={length}: POST /v1/probe -> {status}: {first!r}")
            continue
        values = first["confidences"]
        if not isinstance(values, list) or len(values) != length:
            fail("probe-length", f"L={length}: got {len(values) if isinstance(values, list) else values!r} values")
            continue
        for v in values:
            if not isinstance(v, (int, float)) or not math.isfinite(v) or not (0.0 < v <= 1.0):
                fail("probe-range", f"L={length}: confidence {v!r} outside (0, 1]")
                break
        status2, second = _call(base_url, "POST", "/v1/probe", body, timeout)
        if status2 != 200 or second != first:
            fail("probe-determinism", f"L={length}: identical requests differed")

    for bad_length, label in ((0, "zero"), (max_length + 1, "over-max")):
        body = {"prefix": _PROBE_PREFIX, "suffix": _PROBE_SUFFIX, "mask_length": bad_length}
        status, obj = _call(base_url, "POST", "/v1/probe", body, timeout)
        if not (400 <= status < 500):
            fail("error-code", f"mask_length={bad_length} ({label}) -> HTTP {status}, expected 4xx")
        elif not (isinstance(obj, dict) and isinstance(obj.get("error"), str)):
            fail("error-body", f"mask_length={bad_length} ({label}): body lacks an 'error' string: {obj!r}")

    if caps["supports_decode"]:
        body = {"prefix": _PROBE_PREFIX, "suffix": _PROBE_SUFFIX, "mask_length": probe_lengths[0]}
        status, obj = _call(base_url, "POST", "/v1/decode", body, timeout)
        if status != 200 or not isinstance(obj, dict) or not isinstance(obj.get("middle"), str):
            fail("decode", f"POST /v1/decode -> {status}: {obj!r}")

    if caps["supports_tokenize"]:
        status, obj = _call(base_url, "POST", "/v1/tokenize", {"text": "two words"}, timeout)
        if status != 200 or not isinstance(obj, dict) or not isinstance(obj.get("length"), int):
            fail("tokenize", f"POST /v1/tokenize -> {status}: {obj!r}")
        elif obj["length"] < 0:
            fail("tokenize", f"negative token count {obj['length']}")

    return issues
