"""Shared value types and their line-delimited JSON (de)serialization.

All types are immutable after construction and validate their invariants in
``__post_init__``, so anything that exists is well-formed. File formats:

* probe log: UTF-8 JSON lines with fields exactly
  ``task_id, length, confidences, phi, backend_id, curve_only``
* bias model: one JSON object with fields ``a, b, c, d, e, fit_meta``
* task file: UTF-8 JSON lines with fields
  ``task_id, prefix, suffix, ground_truth_middle, oracle_length, domain_tag``
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ParseError, ValidationError

DOMAIN_TAGS = ("code", "text", "synthetic")

# Stored phi must agree with the recomputed mean of the confidences.
PHI_CONSISTENCY_TOL = 1e-12


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValidationError(message)


def _finite(x: float) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def mean_confidence(values: Sequence[float]) -> float:
    """Canonical mean used everywhere a phi is derived from confidences.

    Compensated summation, then clamped into [min, max]: the exact mean
    always lies there, but the rounded quotient can overshoot by one ulp on
    constant vectors (e.g. ten copies of 0.997), which would break the mean
    bound invariant and bit-exact curve replay.
    """
    mean = math.fsum(values) / len(values)
    return min(max(mean, min(values)), max(values))


@dataclass(frozen=True)
class InfillTask:
    """One infilling instance: fill the span between ``prefix`` and ``suffix``."""

    task_id: str
    prefix: str
    suffix: str
    ground_truth_middle: str | None = None
    oracle_length: int | None = None
    domain_tag: str = "synthetic"

    def __post_init__(self) -> None:
        _require(isinstance(self.task_id, str) and self.task_id != "", "task_id must be a non-empty string")
        _require(isinstance(self.prefix, str) and isinstance(self.suffix, str), "prefix/suffix must be strings")
        if self.oracle_length is not None:
            _require(isinstance(self.oracle_length, int) and self.oracle_length >= 1,
                     f"oracle_length must be >= 1, got {self.oracle_length!r}")
        _require(self.domain_tag in DOMAIN_TAGS, f"domain_tag must be one of {DOMAIN_TAGS}, got {self.domain_tag!r}")


@dataclass(frozen=True)
class ProbeRecord:
    """One probe: per-position first-step confidences for a mask of ``length`` tokens.

    ``phi`` is stored redundantly so curve-level logs (phi only, no per-position
    values) can be replayed; such records carry an empty ``confidences`` tuple
    and ``curve_only=True``.
    """

    task_id: str
    length: int
    confidences: tuple[float, ...]
    phi: float
    backend_id: str = ""
    curve_only: bool = False

    def __post_init__(self) -> None:
        _require(isinstance(self.task_id, str) and self.task_id != "", "task_id must be a non-empty string")
        _require(isinstance(self.length, int) and self.length >= 1, f"length must be >= 1, got {self.length!r}")
        object.__setattr__(self, "confidences", tuple(self.confidences))
        _require(_finite(self.phi) and 0.0 < self.phi <= 1.0, f"phi must be in (0, 1], got {self.phi!r}")
        if self.curve_only:
            _require(len(self.confidences) == 0, "curve_only record must not carry confidences")
            return
        _require(len(self.confidences) == self.length,
                 f"expected {self.length} confidences, got {len(self.confidences)}")
        for c in self.confidences:
            _require(_finite(c) and 0.0 < c <= 1.0, f"confidence must be in (0, 1], got {c!r}")
        mean = mean_confidence(self.confidences)
        _require(abs(self.phi - mean) <= PHI_CONSISTENCY_TOL,
                 f"phi={self.phi!r} inconsistent with mean of confidences {mean!r}")

    @classmethod
    def from_confidences(cls, task_id: str, confidences: Sequence[float], backend_id: str = "") -> "ProbeRecord":
        values = tuple(confidences)
        if not values:
            raise ValidationError("confidences must be non-empty")
        phi = mean_confidence(values)
        return cls(task_id=task_id, length=len(values), confidences=values, phi=phi, backend_id=backend_id)

    @classmethod
    def curve_point(cls, task_id: str, length: int, phi: float, backend_id: str = "") -> "ProbeRecord":
        return cls(task_id=task_id, length=length, confidences=(), phi=phi,
                   backend_id=backend_id, curve_only=True)


@dataclass(frozen=True)
class FitMeta:
    """Provenance and diagnostics of a fitted (or hand-set) bias model."""

    n_points: int
    weighted_sse: float
    excluded_window: int
    source: str

    def __post_init__(self) -> None:
        _require(isinstance(self.n_points, int) and self.n_points >= 0, "n_points must be >= 0")
        _require(_finite(self.weighted_sse) and self.weighted_sse >= 0.0, "weighted_sse must be >= 0")
        _require(isinstance(self.excluded_window, int) and self.excluded_window >= 0, "excluded_window must be >= 0")
        _require(isinstance(self.source, str), "source must be a string")


@dataclass(frozen=True)
class BiasModel:
    """Constants of the length-bias curve B(L) = a*exp(-b*L) + c*exp(-d*L) + e.

    The ordering b > d >= 0 makes the two exponential terms identifiable
    (fast-decay term first); a, c, e are nonnegative so B is positive and
    nonincreasing in L.
    """

    a: float
    b: float
    c: float
    d: float
    e: float
    fit_meta: FitMeta

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "d", "e"):
            _require(_finite(getattr(self, name)), f"{name} must be finite")
        _require(self.a >= 0.0, f"a must be >= 0, got {self.a!r}")
        _require(self.c >= 0.0, f"c must be >= 0, got {self.c!r}")
        _require(self.e >= 0.0, f"e must be >= 0, got {self.e!r}")
        _require(self.d >= 0.0, f"d must be >= 0, got {self.d!r}")
        _require(self.b > self.d, f"need b > d, got b={self.b!r}, d={self.d!r}")
        _require(self.a + self.c + self.e > 0.0, "need a + c + e > 0 so that B(L) > 0")

    def to_json_dict(self) -> dict:
        return {
            "a": self.a, "b": self.b, "c": self.c, "d": self.d, "e": self.e,
            "fit_meta": {
                "n_points": self.fit_meta.n_points,
                "weighted_sse": self.fit_meta.weighted_sse,
                "excluded_window": self.fit_meta.excluded_window,
                "source": self.fit_meta.source,
            },
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "BiasModel":
        try:
            meta = obj["fit_meta"]
            return cls(
                a=float(obj["a"]), b=float(obj["b"]), c=float(obj["c"]),
                d=float(obj["d"]), e=float(obj["e"]),
                fit_meta=FitMeta(
                    n_points=int(meta["n_points"]),
                    weighted_sse=float(meta["weighted_sse"]),
                    excluded_window=int(meta["excluded_window"]),
                    source=str(meta["source"]),
                ),
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed bias model object: {exc!r}") from exc


@dataclass(frozen=True)
class SearchConfig:
    """Hyperparameters of the bidirectional length search."""

    step: int = 1
    tolerance: int = 4
    l_init: int = 8
    l_max: int = 64

    def __post_init__(self) -> None:
        _require(isinstance(self.step, int) and self.step >= 1, f"step must be >= 1, got {self.step!r}")
        _require(isinstance(self.tolerance, int) and self.tolerance >= 1,
                 f"tolerance must be >= 1, got {self.tolerance!r}")
        _require(isinstance(self.l_init, int) and self.l_init >= 1, f"l_init must be >= 1, got {self.l_init!r}")
        _require(isinstance(self.l_max, int) and self.l_init <= self.l_max,
                 f"need 1 <= l_init <= l_max, got l_init={self.l_init!r}, l_max={self.l_max!r}")


@dataclass(frozen=True)
class ProbePoint:
    """One search probe: raw confidence phi and calibrated phi_c at a length."""

    length: int
    phi: float
    phi_c: float

    def __post_init__(self) -> None:
        _require(isinstance(self.length, int) and self.length >= 1, "probe length must be >= 1")
        _require(_finite(self.phi) and 0.0 < self.phi <= 1.0, f"phi must be in (0, 1], got {self.phi!r}")
        _require(_finite(self.phi_c) and self.phi_c > 0.0, f"phi_c must be > 0, got {self.phi_c!r}")


@dataclass(frozen=True)
class SearchResult:
    """Outcome of a length search: chosen length, best score, full probe trace."""

    l_hat: int
    phi_c_hat: float
    trace: tuple[ProbePoint, ...]
    probe_count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "trace", tuple(self.trace))
        _require(len(self.trace) >= 1, "trace must be non-empty")
        _require(self.probe_count == len(self.trace),
                 f"probe_count={self.probe_count} != len(trace)={len(self.trace)}")
        lengths = [p.length for p in self.trace]
        _require(len(set(lengths)) == len(lengths), "trace lengths must be distinct")
        best = max(p.phi_c for p in self.trace)
        _require(self.phi_c_hat == best, f"phi_c_hat={self.phi_c_hat!r} != max trace phi_c {best!r}")
        first = next(p.length for p in self.trace if p.phi_c == best)
        _require(self.l_hat == first, f"l_hat={self.l_hat} is not the earliest probe attaining the maximum ({first})")

    def to_json_dict(self) -> dict:
        return {
            "l_hat": self.l_hat,
            "phi_c_hat": self.phi_c_hat,
            "trace": [{"length": p.length, "phi": p.phi, "phi_c": p.phi_c} for p in self.trace],
            "probe_count": self.probe_count,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "SearchResult":
        return cls(
            l_hat=int(obj["l_hat"]),
            phi_c_hat=float(obj["phi_c_hat"]),
            trace=tuple(ProbePoint(length=int(p["length"]), phi=float(p["phi"]), phi_c=float(p["phi_c"]))
                        for p in obj["trace"]),
            probe_count=int(obj["probe_count"]),
        )


@dataclass(frozen=True)
class ConfidenceCurve:
    """A map length -> phi; the substrate for replay and bias fitting."""

    points: Mapping[int, float]

    def __post_init__(self) -> None:
        pts = dict(self.points)
        for length, phi in pts.items():
            _require(isinstance(length, int) and length >= 1, f"curve length must be >= 1, got {length!r}")
            _require(_finite(phi) and 0.0 < phi <= 1.0, f"curve phi must be in (0, 1], got {phi!r}")
        object.__setattr__(self, "points", pts)

    def __contains__(self, length: int) -> bool:
        return length in self.points

    def phi_at(self, length: int) -> float:
        return self.points[length]

    def lengths(self) -> list[int]:
        return sorted(self.points)

    @classmethod
    def from_records(cls, records: Iterable[ProbeRecord]) -> "ConfidenceCurve":
        pts: dict[int, float] = {}
        for rec in records:
            if rec.length in pts and pts[rec.length] != rec.phi:
                raise ValidationError(f"conflicting phi values for length {rec.length}")
            pts[rec.length] = rec.phi
        return cls(points=pts)


# --------------------------------------------------------------------------
# Probe-log serialization (line-delimited JSON)

_PROBE_FIELDS = ("task_id", "length", "confidences", "phi", "backend_id", "curve_only")


def _record_to_obj(rec: ProbeRecord) -> dict:
    return {
        "task_id": rec.task_id,
        "length": rec.length,
        "confidences": list(rec.confidences),
        "phi": rec.phi,
        "backend_id": rec.backend_id,
        "curve_only": rec.curve_only,
    }


def serialize_probe_log(records: Iterable[ProbeRecord]) -> bytes:
    """Encode records as UTF-8 JSON lines; round-trips losslessly through parse."""
    lines = [json.dumps(_record_to_obj(r), separators=(",", ":")) for r in records]
    return ("".join(line + "\n" for line in lines)).encode("utf-8")


def parse_probe_log(data: bytes | str) -> list[ProbeRecord]:
    """Decode a probe log; malformed lines raise ParseError naming the line.

    Invariant violations inside a well-formed line raise ValidationError.
    """
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    records: list[ProbeRecord] = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {i}: invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict) or not all(k in obj for k in _PROBE_FIELDS):
            raise ParseError(f"line {i}: missing probe-log fields (need {_PROBE_FIELDS})")
        try:
            records.append(ProbeRecord(
                task_id=obj["task_id"],
                length=obj["length"],
                confidences=tuple(float(c) for c in obj["confidences"]),
                phi=float(obj["phi"]),
                backend_id=obj["backend_id"],
                curve_only=bool(obj["curve_only"]),
            ))
        except ValidationError as exc:
            raise ValidationError(f"line {i}: {exc}") from exc
        except (TypeError, ValueError) as exc:
            raise ParseError(f"line {i}: malformed field: {exc}") from exc
    return records


def write_probe_log(path: str | Path, records: Iterable[ProbeRecord]) -> None:
    Path(path).write_bytes(serialize_probe_log(records))


def read_probe_log(path: str | Path) -> list[ProbeRecord]:
    return parse_probe_log(Path(path).read_bytes())


# --------------------------------------------------------------------------
# Task-file serialization (line-delimited JSON)

def _task_to_obj(task: InfillTask) -> dict:
    return {
        "task_id": task.task_id,
        "prefix": task.prefix,
        "suffix": task.suffix,
        "ground_truth_middle": task.ground_truth_middle,
        "oracle_length": task.oracle_length,
        "domain_tag": task.domain_tag,
    }


def serialize_tasks(tasks: Iterable[InfillTask]) -> bytes:
    tasks = list(tasks)
    seen: set[str] = set()
    for t in tasks:
        if t.task_id in seen:
            raise ValidationError(f"duplicate task_id {t.task_id!r} in task file")
        seen.add(t.task_id)
    lines = [json.dumps(_task_to_obj(t), separators=(",", ":")) for t in tasks]
    return ("".join(line + "\n" for line in lines)).encode("utf-8")


def parse_tasks(data: bytes | str) -> list[InfillTask]:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    tasks: list[InfillTask] = []
    seen: set[str] = set()
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {i}: invalid JSON: {exc.msg}") from exc
        try:
            task = InfillTask(
                task_id=obj["task_id"],
                prefix=obj["prefix"],
                suffix=obj["suffix"],
                ground_truth_middle=obj.get("ground_truth_middle"),
                oracle_length=obj.get("oracle_length"),
                domain_tag=obj.get("domain_tag", "synthetic"),
            )
        except KeyError as exc:
            raise ParseError(f"line {i}: missing task field {exc}") from exc
        except ValidationError as exc:
            raise ValidationError(f"line {i}: {exc}") from exc
        if task.task_id in seen:
            raise ValidationError(f"line {i}: duplicate task_id {task.task_id!r}")
        seen.add(task.task_id)
        tasks.append(task)
    return tasks


def write_tasks(path: str | Path, tasks: Iterable[InfillTask]) -> None:
    Path(path).write_bytes(serialize_tasks(tasks))


def read_tasks(path: str | Path) -> list[InfillTask]:
    return parse_tasks(Path(path).read_bytes())


# --------------------------------------------------------------------------
# Bias-model file

def save_bias_model(path: str | Path, model: BiasModel) -> None:
    Path(path).write_text(json.dumps(model.to_json_dict(), indent=2) + "\n", encoding="utf-8")


def load_bias_model(path: str | Path) -> BiasModel:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid bias model JSON in {path}: {exc.msg}") from exc
    return BiasModel.from_json_dict(obj)
