"""Log-replay backend and a recording wrapper.

Replay feeds previously recorded probe curves back into the search, which is
how golden traces are tested: a search against a replayed recording must
reproduce the original result bit for bit. Records with per-position values
are returned verbatim; curve-only records (phi without positions) replay as a
constant vector whose mean is exactly the stored phi.
"""

from __future__ import annotations

import threading
from typing import Iterable, Sequence

from ..errors import ReplayMissError, ValidationError
from ..types import ConfidenceCurve, InfillTask, ProbeRecord
from .base import BackendCapabilities, ProbeBackend, check_probe_length

_SINGLE = "__single__"


class ReplayBackend(ProbeBackend):
    def __init__(self, curves: dict[str, dict[int, tuple[float, ...] | float]],
                 context_index: dict[tuple[str, str], str] | None = None,
                 backend_id: str = "replay"):
        if not curves:
            raise ValidationError("replay backend needs at least one recorded task")
        self._curves = curves
        self._context_index = context_index or {}
        self.backend_id = backend_id
        max_len = max(max(c) for c in curves.values())
        self.capabilities = BackendCapabilities(
            model_id="replay", max_length=max_len,
            supports_decode=False, supports_tokenize=False, max_concurrency=64)

    @classmethod
    def from_curve(cls, curve: ConfidenceCurve, backend_id: str = "replay") -> "ReplayBackend":
        """Single-task replay of a phi curve; prefix/suffix are ignored."""
        return cls({_SINGLE: dict(curve.points)}, backend_id=backend_id)

    @classmethod
    def from_records(cls, records: Iterable[ProbeRecord],
                     tasks: Sequence[InfillTask] | None = None,
                     backend_id: str = "replay") -> "ReplayBackend":
        """Replay a probe log; with several tasks, a task list is required so
        probes can be resolved by their (prefix, suffix) context."""
        curves: dict[str, dict[int, tuple[float, ...] | float]] = {}
        for rec in records:
            entry: tuple[float, ...] | float = rec.phi if rec.curve_only else rec.confidences
            curves.setdefault(rec.task_id, {})[rec.length] = entry
        if not curves:
            raise ValidationError("probe log is empty")
        if tasks is None:
            if len(curves) > 1:
                raise ValidationError(
                    "log covers several tasks; pass the task list so probes can be resolved")
            only = next(iter(curves))
            return cls({_SINGLE: curves[only]}, backend_id=backend_id)
        index: dict[tuple[str, str], str] = {}
        for task in tasks:
            if task.task_id in curves:
                index[(task.prefix, task.suffix)] = task.task_id
        missing = set(curves) - {tid for tid in index.values()}
        if missing:
            raise ValidationError(f"log tasks absent from the task list: {sorted(missing)}")
        return cls(curves, context_index=index, backend_id=backend_id)

    def _resolve(self, prefix: str, suffix: str) -> dict[int, tuple[float, ...] | float]:
        if _SINGLE in self._curves:
            return self._curves[_SINGLE]
        task_id = self._context_index.get((prefix, suffix))
        if task_id is None:
            raise ReplayMissError("probe context does not match any recorded task")
        return self._curves[task_id]

    def probe(self, prefix: str, suffix: str, length: int) -> list[float]:
        check_probe_length(length)
        curve = self._resolve(prefix, suffix)
        if length not in curve:
            raise ReplayMissError(f"length {length} was never recorded; the search left the log")
        entry = curve[length]
        if isinstance(entry, tuple):
            return list(entry)
        return [entry] * length


class RecordingBackend(ProbeBackend):
    """Wraps a backend and logs every probe as a ProbeRecord."""

    def __init__(self, inner: ProbeBackend, task_id_for_context=None):
        self.inner = inner
        self.backend_id = inner.backend_id
        self.capabilities = inner.capabilities
        self._task_id_for_context = task_id_for_context or (lambda prefix, suffix: "recorded")
        self._lock = threading.Lock()
        self._records: list[ProbeRecord] = []

    def probe(self, prefix: str, suffix: str, length: int) -> list[float]:
        values = self.inner.probe(prefix, suffix, length)
        rec = ProbeRecord.from_confidences(
            self._task_id_for_context(prefix, suffix), values, backend_id=self.backend_id)
        with self._lock:
            self._records.append(rec)
        return values

    def decode(self, prefix: str, suffix: str, length: int) -> str:
        return self.inner.decode(prefix, suffix, length)

    def tokenize(self, text: str) -> int:
        return self.inner.tokenize(text)

    @property
    def records(self) -> list[ProbeRecord]:
        with self._lock:
            return list(self._records)
