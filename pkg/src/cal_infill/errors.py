"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CalInfillError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(CalInfillError):
    """A value violates a type invariant or an operation precondition."""


class ParseError(CalInfillError):
    """Input bytes/text could not be decoded into the expected format."""


class InsufficientDataError(CalInfillError):
    """Not enough data points to carry out a fit or an aggregation."""


class DivergenceError(CalInfillError):
    """The fit produced a non-finite residual.

    Carries the last finite iterate (as a BiasModel) in ``last_model``.
    """

    def __init__(self, message: str, last_model=None):
        super().__init__(message)
        self.last_model = last_model


class NumericGuardError(CalInfillError):
    """A numeric guard tripped (e.g. division by a near-zero bias value)."""


class CapabilityError(CalInfillError):
    """A backend was asked for an operation it does not support."""


class ReplayMissError(CalInfillError):
    """A replay backend was probed at a length absent from its recording."""


class TransportError(CalInfillError):
    """A remote request failed at the transport layer after retries."""


class ProtocolError(CalInfillError):
    """A remote response violated the wire protocol."""


class RemoteError(CalInfillError):
    """The remote endpoint declared a failure."""


class ProbeFailure(CalInfillError):
    """A probe failed during a search; carries the partial trace so far."""

    def __init__(self, message: str, partial_trace=()):
        super().__init__(message)
        self.partial_trace = tuple(partial_trace)
