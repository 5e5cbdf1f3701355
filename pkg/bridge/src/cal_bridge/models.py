"""Model adapters behind the bridge server.

An adapter supplies three operations over a fixed [prefix][mask*L][suffix]
framing:

* ``probe``: one forward pass on the fully masked span; returns the
  per-mask-position max softmax probability (length L, each in (0, 1]).
* ``decode``: full iterative denoising at the fixed length with prefix and
  suffix clamped, greedy selection; returns the infilled middle text.
* ``tokenize``: token count of a text under the model's tokenizer.

The stub adapter replays a recorded confidence curve so the wire protocol
and its clients can be tested with no model in the loop. Loading a real
checkpoint is intentionally out of scope for this build; ``load_model``
rejects anything that is not ``stub:<curve-file>`` with a clear message.
"""

from __future__ import annotations

import json
from pathlib import Path


class BridgeError(Exception):
    """Base error; carries the HTTP status the server should answer with."""

    status = 500


class BridgeRequestError(BridgeError):
    """Client-resolvable problem (unknown length, bad field): HTTP 400."""

    status = 400


class BridgeConfigError(Exception):
    """Bad --model spec or unreadable curve file; raised before serving."""


class StubModel:
    """Serves a recorded phi curve; decode and tokenize are canned.

    Probe answers are ``[phi(L)] * L`` for curve-only records, or the
    recorded per-position confidences verbatim when the log carries them.
    Deterministic by construction: identical requests get identical answers.
    """

    def __init__(self, curve: dict[int, list[float] | float], model_id: str = "stub",
                 max_length: int = 128, decode_text: str = "stub middle"):
        if not curve:
            raise BridgeConfigError("stub curve is empty")
        self.curve = curve
        self.model_id = model_id
        self.max_length = max_length
        self.decode_text = decode_text
        self.supports_decode = True
        self.supports_tokenize = True

    def probe(self, prefix: str, suffix: str, mask_length: int) -> list[float]:
        if mask_length not in self.curve:
            raise BridgeRequestError(
                f"length {mask_length} is not in the stub curve "
                f"(recorded: {sorted(self.curve)})")
        entry = self.curve[mask_length]
        if isinstance(entry, list):
            return list(entry)
        return [entry] * mask_length

    def decode(self, prefix: str, suffix: str, mask_length: int) -> str:
        return self.decode_text

    def tokenize(self, text: str) -> int:
        return len(text.split())


def _load_curve_file(path: str | Path) -> dict[int, list[float] | float]:
    """Read a probe log (JSON lines) into a single-task curve."""
    curve: dict[int, list[float] | float] = {}
    task_ids: set[str] = set()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BridgeConfigError(f"cannot read curve file {path}: {exc}") from exc
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            length = int(obj["length"])
            phi = float(obj["phi"])
        except (ValueError, KeyError, TypeError) as exc:
            raise BridgeConfigError(f"{path}: line {i}: malformed probe record: {exc!r}") from exc
        if not (length >= 1 and 0.0 < phi <= 1.0):
            raise BridgeConfigError(f"{path}: line {i}: length/phi out of range")
        task_ids.add(str(obj.get("task_id", "")))
        confidences = obj.get("confidences") or []
        if confidences:
            curve[length] = [float(v) for v in confidences]
        else:
            curve[length] = phi
    if len(task_ids) > 1:
        raise BridgeConfigError(
            f"stub curve file covers {len(task_ids)} tasks; a stub serves exactly one")
    if not curve:
        raise BridgeConfigError(f"{path}: no probe records found")
    return curve


def load_model(spec: str, seed: int = 0):
    """Build an adapter from a --model spec.

    ``stub:<curve-file>`` is fully supported. Real model identifiers would
    need a serving environment with the checkpoint and its tokenizer; this
    build rejects them explicitly rather than half-loading anything. The
    seed is accepted for interface stability (a real adapter would use it
    to pin its sampler).
    """
    if spec.startswith("stub:"):
        return StubModel(_load_curve_file(spec.split(":", 1)[1]))
    raise BridgeConfigError(
        f"model spec {spec!r} is not loadable here; only stub:<curve-file> is "
        "supported in this environment")
