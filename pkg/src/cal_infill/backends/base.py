"""The probe backend contract shared by synthetic, replay, and remote backends.

A backend answers one question: given a prefix, a suffix, and a mask length L,
what are the L per-position first-step confidences? Only mask-region values
cross this boundary (never logits or vocabulary items), each in (0, 1].
Probing must be deterministic: identical arguments return identical values,
so stochastic models have to be seeded behind the bridge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..errors import CapabilityError, ProtocolError, ValidationError


@dataclass(frozen=True)
class BackendCapabilities:
    model_id: str
    max_length: int
    supports_decode: bool
    supports_tokenize: bool
    max_concurrency: int = 1


class ProbeBackend:
    """Base class; subclasses implement probe() and may add decode/tokenize."""

    backend_id: str = "backend"
    capabilities: BackendCapabilities

    def probe(self, prefix: str, suffix: str, length: int) -> list[float]:
        raise NotImplementedError

    def decode(self, prefix: str, suffix: str, length: int) -> str:
        raise CapabilityError(f"backend {self.backend_id!r} does not support decode")

    def tokenize(self, text: str) -> int:
        raise CapabilityError(f"backend {self.backend_id!r} does not support tokenize")


def check_probe_length(length: int) -> None:
    if not (isinstance(length, int) and length >= 1):
        raise ValidationError(f"probe length must be an integer >= 1, got {length!r}")


def check_probe_values(length: int, values: Sequence[float], origin: str) -> list[float]:
    """Enforce the probe contract: exactly ``length`` values, each in (0, 1]."""
    values = list(values)
    if len(values) != length:
        raise ProtocolError(f"{origin}: expected {length} confidences, got {len(values)}")
    for v in values:
        if not (isinstance(v, (int, float)) and math.isfinite(v) and 0.0 < v <= 1.0):
            raise ProtocolError(f"{origin}: confidence {v!r} outside (0, 1]")
    return values
