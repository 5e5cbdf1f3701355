"""Raw and calibrated first-step confidence, and the bias curve itself.

The raw signal is the mean over mask positions of the max-probability token
prediction from a single forward pass on the fully masked span. Dividing it
by the fitted length bias B(L) yields the calibrated score used for length
comparison.
"""

from __future__ import annotations

import math
from typing import Sequence

from .errors import NumericGuardError, ValidationError
from .types import BiasModel, mean_confidence

# Guard on the calibration division; for sane fitted models B(L) >= e stays
# far above this, but a fit with e ~ 0 could approach it.
EPS_DIV = 1e-9


def mean_first_step_confidence(confidences: Sequence[float]) -> float:
    """Arithmetic mean of per-position confidences (compensated summation).

    Raises ValidationError on empty input or values outside (0, 1].
    """
    if len(confidences) == 0:
        raise ValidationError("cannot average an empty confidence vector (mask length >= 1 required)")
    for c in confidences:
        if not (isinstance(c, (int, float)) and math.isfinite(c) and 0.0 < c <= 1.0):
            raise ValidationError(f"confidence must be in (0, 1], got {c!r}")
    return mean_confidence(confidences)


def evaluate_bias(model: BiasModel, length: int) -> float:
    """B(L) = a*exp(-b*L) + c*exp(-d*L) + e for an integer length >= 1."""
    if not (isinstance(length, int) and length >= 1):
        raise ValidationError(f"length must be an integer >= 1, got {length!r}")
    return model.a * math.exp(-model.b * length) + model.c * math.exp(-model.d * length) + model.e


def calibrate(phi: float, length: int, model: BiasModel) -> float:
    """Calibrated confidence phi / B(length).

    Raises NumericGuardError when the fitted bias is pathologically small.
    """
    if not (isinstance(phi, (int, float)) and math.isfinite(phi) and 0.0 < phi <= 1.0):
        raise ValidationError(f"phi must be in (0, 1], got {phi!r}")
    bias = evaluate_bias(model, length)
    if bias <= EPS_DIV:
        raise NumericGuardError(
            f"bias B({length})={bias!r} is below the {EPS_DIV} division guard; "
            "the fitted model is pathological")
    return phi / bias
