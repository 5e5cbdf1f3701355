"""Bidirectional hill-climbing length discovery and the exhaustive oracle.

The search probes the initial length, then walks outward in the increasing
direction followed by the decreasing one, stepping by ``step`` tokens. The
incumbent best (length, calibrated score) is shared across both directions;
a direction stops after ``tolerance`` consecutive probes that fail to improve
on the incumbent strictly, or at the [1, l_max] boundary. Equal scores count
as failures, so the earliest probe attaining the maximum wins ties.
"""

from __future__ import annotations

from .confidence import calibrate, mean_first_step_confidence
from .errors import ProbeFailure, ValidationError
from .types import BiasModel, InfillTask, ProbePoint, SearchConfig, SearchResult


def discover_length(backend, task: InfillTask, config: SearchConfig, model: BiasModel) -> SearchResult:
    """Run the bidirectional search; returns the full probe trace.

    Backend failures surface as ProbeFailure with the partial trace attached.
    """
    trace: list[ProbePoint] = []

    def probe(length: int) -> float:
        try:
            confidences = backend.probe(task.prefix, task.suffix, length)
            phi = mean_first_step_confidence(confidences)
        except Exception as exc:
            raise ProbeFailure(
                f"probe at length {length} failed for task {task.task_id!r}: {exc}",
                partial_trace=trace) from exc
        phi_c = calibrate(phi, length, model)
        trace.append(ProbePoint(length=length, phi=phi, phi_c=phi_c))
        return phi_c

    l_hat = config.l_init
    phi_c_hat = probe(config.l_init)
    for direction in (1, -1):
        length = config.l_init + direction * config.step
        failures = 0
        while 1 <= length <= config.l_max and failures < config.tolerance:
            phi_c = probe(length)
            if phi_c > phi_c_hat:
                l_hat, phi_c_hat, failures = length, phi_c, 0
            else:
                failures += 1
            length += direction * config.step
    return SearchResult(l_hat=l_hat, phi_c_hat=phi_c_hat, trace=tuple(trace), probe_count=len(trace))


def exhaustive_search(backend, task: InfillTask, lo: int, hi: int, model: BiasModel) -> SearchResult:
    """Probe every length in [lo, hi]; the trace covers the whole range and
    l_hat is the earliest argmax of phi_c."""
    if not (isinstance(lo, int) and isinstance(hi, int) and 1 <= lo <= hi):
        raise ValidationError(f"need 1 <= lo <= hi, got lo={lo!r}, hi={hi!r}")
    trace: list[ProbePoint] = []
    l_hat = lo
    phi_c_hat = float("-inf")
    for length in range(lo, hi + 1):
        phi = mean_first_step_confidence(backend.probe(task.prefix, task.suffix, length))
        phi_c = calibrate(phi, length, model)
        trace.append(ProbePoint(length=length, phi=phi, phi_c=phi_c))
        if phi_c > phi_c_hat:
            l_hat, phi_c_hat = length, phi_c
    return SearchResult(l_hat=l_hat, phi_c_hat=phi_c_hat, trace=tuple(trace), probe_count=len(trace))


def exhaustive_argmax(backend, task: InfillTask, lo: int, hi: int, model: BiasModel) -> tuple[int, float]:
    """Earliest argmax of phi_c over [lo, hi]: the ground truth the hill climb
    is tested against. Probe failures propagate to the caller."""
    result = exhaustive_search(backend, task, lo, hi, model)
    return result.l_hat, result.phi_c_hat
