"""Synthetic confidence-landscape simulator: a desk-scale stand-in for a DLM.

The simulated mean confidence at mask length L is a decaying bias curve times
a Gaussian bump centered on the oracle length, plus optional additive noise:

    mu(L) = clip( B(L) * (1 + A * exp(-(L - L*)^2 / (2 sigma^2))) + eta_L )

with eta_L ~ Normal(0, noise_sigma). All randomness comes from a counter-based
(Philox) generator keyed by (seed, task, L), so probes are deterministic and
independent of call order and threading. Per-position values are a symmetric
spread around mu(L), mean-corrected so the probe's mean equals mu(L) (up to
float rounding of the final sum), because the search consumes only the mean.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..errors import ParseError, ValidationError
from ..types import BiasModel, ConfidenceCurve, InfillTask
from ..confidence import evaluate_bias
from .base import BackendCapabilities, ProbeBackend, check_probe_length

CLIP_FLOOR = 1e-6
_MAX_SPREAD = 0.05


@dataclass(frozen=True)
class SyntheticLandscapeSpec:
    """Parameters of one simulated landscape (one task's confidence curve)."""

    bias: BiasModel
    oracle_length: int
    peak_amplitude: float
    peak_width: float
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (isinstance(self.oracle_length, int) and self.oracle_length >= 1):
            raise ValidationError(f"oracle_length must be >= 1, got {self.oracle_length!r}")
        if self.peak_amplitude < 0.0:
            raise ValidationError("peak_amplitude must be >= 0")
        if self.peak_width <= 0.0:
            raise ValidationError("peak_width must be > 0")
        if self.noise_sigma < 0.0:
            raise ValidationError("noise_sigma must be >= 0")


def _stream(seed: int, task_key: str, length: int) -> np.random.Generator:
    digest = hashlib.blake2b(
        f"{seed}|{task_key}|{length}".encode("utf-8"), digest_size=16).digest()
    key = np.frombuffer(digest, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class SyntheticBackend(ProbeBackend):
    """Single-landscape backend; prefix/suffix are ignored, the landscape
    parameters and task_key identify the task."""

    def __init__(self, spec: SyntheticLandscapeSpec, task_key: str = ""):
        self.spec = spec
        self.task_key = task_key
        self.backend_id = f"synthetic:{spec.seed}"
        self.capabilities = BackendCapabilities(
            model_id="synthetic-landscape", max_length=4096,
            supports_decode=False, supports_tokenize=False, max_concurrency=64)
        self._clip_lock = threading.Lock()
        self.clipped_probes = 0  # diagnostic: probes whose mean hit the clip bound

    def target_mean(self, length: int) -> float:
        """The simulated mean confidence mu(length), clipped into (0, 1]."""
        check_probe_length(length)
        spec = self.spec
        gen = _stream(spec.seed, self.task_key, length)
        bump = spec.peak_amplitude * np.exp(
            -((length - spec.oracle_length) ** 2) / (2.0 * spec.peak_width ** 2))
        mu = evaluate_bias(spec.bias, length) * (1.0 + float(bump))
        if spec.noise_sigma > 0.0:
            mu += float(gen.normal(0.0, spec.noise_sigma))
        clipped = mu > 1.0 or mu < CLIP_FLOOR
        if clipped:
            with self._clip_lock:
                self.clipped_probes += 1
        return min(max(mu, CLIP_FLOOR), 1.0)

    def probe(self, prefix: str, suffix: str, length: int) -> list[float]:
        mu = self.target_mean(length)
        if length == 1:
            return [mu]
        gen = _stream(self.spec.seed, self.task_key, length)
        if self.spec.noise_sigma > 0.0:
            gen.normal(0.0, self.spec.noise_sigma)  # consume the eta draw
        raw = gen.uniform(-1.0, 1.0, size=length)
        centered = raw - raw.mean()
        peak = float(np.max(np.abs(centered)))
        allowed = min(mu - CLIP_FLOOR, 1.0 - mu, _MAX_SPREAD)
        scale = allowed / peak if peak > 0.0 else 0.0
        return [float(v) for v in mu + centered * scale]


class SyntheticSuiteBackend(ProbeBackend):
    """Per-task landscapes sharing one template; the oracle length comes from
    each task (falling back to the template's)."""

    def __init__(self, template: SyntheticLandscapeSpec, tasks: Sequence[InfillTask]):
        self.template = template
        self.backend_id = f"synthetic:{template.seed}"
        self.capabilities = BackendCapabilities(
            model_id="synthetic-landscape", max_length=4096,
            supports_decode=False, supports_tokenize=False, max_concurrency=64)
        self._by_context: dict[tuple[str, str], SyntheticBackend] = {}
        for task in tasks:
            oracle = task.oracle_length or template.oracle_length
            spec = SyntheticLandscapeSpec(
                bias=template.bias, oracle_length=oracle,
                peak_amplitude=template.peak_amplitude, peak_width=template.peak_width,
                noise_sigma=template.noise_sigma, seed=template.seed)
            self._by_context[(task.prefix, task.suffix)] = SyntheticBackend(spec, task_key=task.task_id)

    def probe(self, prefix: str, suffix: str, length: int) -> list[float]:
        try:
            backend = self._by_context[(prefix, suffix)]
        except KeyError:
            raise ValidationError("probe context does not match any configured task") from None
        return backend.probe(prefix, suffix, length)

    @property
    def clipped_probes(self) -> int:
        return sum(b.clipped_probes for b in self._by_context.values())


def landscape_curve(spec: SyntheticLandscapeSpec, lengths: Sequence[int], task_key: str = "") -> ConfidenceCurve:
    """The landscape's mean-confidence curve over ``lengths`` (probe-free view)."""
    backend = SyntheticBackend(spec, task_key=task_key)
    return ConfidenceCurve(points={length: backend.target_mean(length) for length in lengths})


def synthetic_spec_from_json(obj: Mapping) -> SyntheticLandscapeSpec:
    try:
        return SyntheticLandscapeSpec(
            bias=BiasModel.from_json_dict(obj["bias"]),
            oracle_length=int(obj["oracle_length"]) if obj.get("oracle_length") else 1,
            peak_amplitude=float(obj["peak_amplitude"]),
            peak_width=float(obj["peak_width"]),
            noise_sigma=float(obj.get("noise_sigma", 0.0)),
            seed=int(obj.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed synthetic landscape spec: {exc!r}") from exc


def load_synthetic_spec(path: str | Path) -> tuple[SyntheticLandscapeSpec, tuple[int, int] | None]:
    """Load a landscape spec file; also returns the optional per-task oracle
    sampling range ``oracle_length_range`` used by the simulator CLI."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid landscape spec JSON in {path}: {exc.msg}") from exc
    spec = synthetic_spec_from_json(obj)
    rng = obj.get("oracle_length_range")
    if rng is not None:
        lo, hi = int(rng[0]), int(rng[1])
        if not (1 <= lo <= hi):
            raise ValidationError(f"oracle_length_range must satisfy 1 <= lo <= hi, got {rng!r}")
        return spec, (lo, hi)
    return spec, None
