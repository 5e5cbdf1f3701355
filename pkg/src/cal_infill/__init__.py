"""Training-free infilling-length discovery for masked-diffusion LMs.

Probe a model's first-step denoising confidence across candidate mask
lengths, divide out the systematic length bias with a fitted
double-exponential curve, and hill-climb the calibrated score to the length
that best matches the missing span. Ships with a synthetic landscape
simulator, record/replay backends, a remote-bridge client, text metrics,
and a resumable benchmark harness.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .biasfit import FitDataset, FitPoint, fit_bias, prepare_fit_dataset, weighted_sse
from .confidence import calibrate, evaluate_bias, mean_first_step_confidence
from .errors import (
    CalInfillError,
    CapabilityError,
    DivergenceError,
    InsufficientDataError,
    NumericGuardError,
    ParseError,
    ProbeFailure,
    ProtocolError,
    RemoteError,
    ReplayMissError,
    TransportError,
    ValidationError,
)
from .search import discover_length, exhaustive_argmax, exhaustive_search
from .types import (
    BiasModel,
    ConfidenceCurve,
    FitMeta,
    InfillTask,
    ProbePoint,
    ProbeRecord,
    SearchConfig,
    SearchResult,
    load_bias_model,
    parse_probe_log,
    parse_tasks,
    read_probe_log,
    read_tasks,
    save_bias_model,
    serialize_probe_log,
    serialize_tasks,
    write_probe_log,
    write_tasks,
)

__all__ = [
    "__version__",
    "BiasModel", "ConfidenceCurve", "FitMeta", "InfillTask", "ProbePoint",
    "ProbeRecord", "SearchConfig", "SearchResult",
    "serialize_probe_log", "parse_probe_log", "read_probe_log", "write_probe_log",
    "serialize_tasks", "parse_tasks", "read_tasks", "write_tasks",
    "load_bias_model", "save_bias_model",
    "mean_first_step_confidence", "evaluate_bias", "calibrate",
    "FitPoint", "FitDataset", "prepare_fit_dataset", "fit_bias", "weighted_sse",
    "discover_length", "exhaustive_search", "exhaustive_argmax",
    "CalInfillError", "ValidationError", "ParseError", "InsufficientDataError",
    "DivergenceError", "NumericGuardError", "CapabilityError", "ReplayMissError",
    "TransportError", "ProtocolError", "RemoteError", "ProbeFailure",
]
