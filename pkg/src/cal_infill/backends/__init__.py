"""Probe backends: synthetic landscape simulator, log replay, remote bridge."""

from .base import BackendCapabilities, ProbeBackend, check_probe_length, check_probe_values
from .conformance import ConformanceIssue, validate_endpoint
from .remote import DEFAULT_RETRIES, DEFAULT_TIMEOUT_SECS, RemoteBackend
from .replay import RecordingBackend, ReplayBackend
from .synthetic import (
    CLIP_FLOOR,
    SyntheticBackend,
    SyntheticLandscapeSpec,
    SyntheticSuiteBackend,
    landscape_curve,
    load_synthetic_spec,
    synthetic_spec_from_json,
)

__all__ = [
    "BackendCapabilities",
    "ProbeBackend",
    "check_probe_length",
    "check_probe_values",
    "ConformanceIssue",
    "validate_endpoint",
    "RemoteBackend",
    "DEFAULT_TIMEOUT_SECS",
    "DEFAULT_RETRIES",
    "RecordingBackend",
    "ReplayBackend",
    "SyntheticBackend",
    "SyntheticLandscapeSpec",
    "SyntheticSuiteBackend",
    "CLIP_FLOOR",
    "landscape_curve",
    "load_synthetic_spec",
    "synthetic_spec_from_json",
]
