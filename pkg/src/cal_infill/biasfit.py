"""Bias-curve fitting: dataset assembly with oracle exclusion, then damped
weighted nonlinear least squares on the double-exponential decay model.

Probes whose length falls within ``window`` of the task's oracle length are
dropped so the fitted curve captures the background decay, not the semantic
peak. Survivors are pooled per length across all tasks; each pooled point is
weighted by 1/sqrt(N_L).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .confidence import evaluate_bias
from .errors import DivergenceError, InsufficientDataError, ValidationError
from .types import BiasModel, FitMeta, ProbeRecord

DEFAULT_WINDOW = 4
DEFAULT_INIT = (1.0, 1.0, 0.5, 0.05, 0.2)
DEFAULT_MAX_ITERS = 200
DEFAULT_FTOL = 1e-10

_N_PARAMS = 5


@dataclass(frozen=True)
class FitPoint:
    """One pooled sample of the decay curve: (length, mean phi, weight)."""

    length: int
    phi: float
    weight: float

    def __post_init__(self) -> None:
        if not (isinstance(self.length, int) and self.length >= 1):
            raise ValidationError(f"fit point length must be >= 1, got {self.length!r}")
        if not (math.isfinite(self.phi) and 0.0 < self.phi <= 1.0):
            raise ValidationError(f"fit point phi must be in (0, 1], got {self.phi!r}")
        if not (math.isfinite(self.weight) and self.weight > 0.0):
            raise ValidationError(f"fit point weight must be > 0, got {self.weight!r}")


@dataclass(frozen=True)
class FitDataset:
    """Pooled fitting data plus the provenance of its construction."""

    points: tuple[FitPoint, ...]
    exclusion_window: int
    probe_grid: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "probe_grid", tuple(self.probe_grid))
        lengths = [p.length for p in self.points]
        if len(set(lengths)) != len(lengths):
            raise ValidationError("fit dataset points must have distinct lengths")
        if self.exclusion_window < 0:
            raise ValidationError("exclusion_window must be >= 0")
        if list(self.probe_grid) != sorted(self.probe_grid):
            raise ValidationError("probe_grid must be sorted ascending")


def prepare_fit_dataset(records: Sequence[ProbeRecord],
                        oracle_lengths: Mapping[str, int],
                        window: int = DEFAULT_WINDOW) -> FitDataset:
    """Drop near-oracle probes, pool survivors per length, weight by 1/sqrt(N_L)."""
    if window < 0:
        raise ValidationError("window must be >= 0")
    pooled: dict[int, list[float]] = {}
    grid: set[int] = set()
    for rec in records:
        if rec.task_id not in oracle_lengths:
            raise ValidationError(f"no oracle length known for task {rec.task_id!r}")
        grid.add(rec.length)
        if abs(rec.length - oracle_lengths[rec.task_id]) <= window:
            continue
        pooled.setdefault(rec.length, []).append(rec.phi)
    if not pooled:
        raise InsufficientDataError("no probes survive the oracle-exclusion window")
    points = tuple(
        FitPoint(length=length, phi=math.fsum(phis) / len(phis), weight=1.0 / math.sqrt(len(phis)))
        for length, phis in sorted(pooled.items())
    )
    return FitDataset(points=points, exclusion_window=window, probe_grid=tuple(sorted(grid)))


def weighted_sse(model: BiasModel, data: FitDataset) -> float:
    """Sum over points of weight^2 * (phi - B(length))^2."""
    return math.fsum(
        (p.weight * (p.phi - evaluate_bias(model, p.length))) ** 2 for p in data.points
    )


def _curve(theta: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    a, b, c, d = np.exp(theta[:4])
    e = theta[4]
    return a * np.exp(-b * lengths) + c * np.exp(-d * lengths) + e


def _residuals(theta: np.ndarray, lengths: np.ndarray, phis: np.ndarray, weights: np.ndarray) -> np.ndarray:
    return weights * (phis - _curve(theta, lengths))


def _jacobian(theta: np.ndarray, lengths: np.ndarray, weights: np.ndarray) -> np.ndarray:
    # Residual r = w * (phi - B); a, b, c, d live in log space so positivity
    # holds without box constraints. dr/dtheta = -w * dB/dtheta.
    a, b, c, d = np.exp(theta[:4])
    e1 = np.exp(-b * lengths)
    e2 = np.exp(-d * lengths)
    j = np.empty((len(lengths), _N_PARAMS))
    j[:, 0] = a * e1
    j[:, 1] = -a * b * lengths * e1
    j[:, 2] = c * e2
    j[:, 3] = -c * d * lengths * e2
    j[:, 4] = 1.0
    return -weights[:, None] * j


def _canonical_params(theta: np.ndarray) -> tuple[float, float, float, float, float]:
    a, b, c, d = (float(x) for x in np.exp(theta[:4]))
    e = max(float(theta[4]), 0.0)
    if b < d:  # exchangeable exponential pair: relabel so the fast decay comes first
        a, b, c, d = c, d, a, b
    if b == d:
        a, c, d = a + c, 0.0, 0.0
    return a, b, c, d, e


def fit_bias(data: FitDataset,
             init: Sequence[float] = DEFAULT_INIT,
             max_iters: int = DEFAULT_MAX_ITERS,
             ftol: float = DEFAULT_FTOL) -> BiasModel:
    """Fit the decay constants by damped Gauss-Newton with an analytic Jacobian.

    The damping factor starts at 1e-3, multiplies by 10 on a rejected step and
    divides by 10 on an accepted one; iteration stops when the relative SSE
    improvement drops below ``ftol`` or after ``max_iters`` accepted/rejected
    rounds. Deterministic: identical inputs give a bit-identical model.
    """
    if len(data.points) < _N_PARAMS:
        raise InsufficientDataError(
            f"need at least {_N_PARAMS} distinct lengths to fit {_N_PARAMS} parameters, "
            f"got {len(data.points)}")
    a0, b0, c0, d0, e0 = (float(x) for x in init)
    floor = 1e-12
    theta = np.array([
        math.log(max(a0, floor)), math.log(max(b0, floor)),
        math.log(max(c0, floor)), math.log(max(d0, floor)), max(e0, 0.0),
    ])
    lengths = np.array([p.length for p in data.points], dtype=float)
    phis = np.array([p.phi for p in data.points], dtype=float)
    weights = np.array([p.weight for p in data.points], dtype=float)

    def model_from(th: np.ndarray, sse: float) -> BiasModel:
        a, b, c, d, e = _canonical_params(th)
        return BiasModel(a=a, b=b, c=c, d=d, e=e, fit_meta=FitMeta(
            n_points=len(data.points), weighted_sse=float(sse),
            excluded_window=data.exclusion_window, source="damped-gauss-newton"))

    # Overflow/invalid during trial steps shows up as a non-finite SSE and is
    # handled below; keep numpy quiet about the intermediate values.
    with np.errstate(all="ignore"):
        r = _residuals(theta, lengths, phis, weights)
        sse = float(r @ r)
        if not math.isfinite(sse):
            raise DivergenceError("non-finite residual at the initial parameters")
        lam = 1e-3
        for _ in range(max_iters):
            jac = _jacobian(theta, lengths, weights)
            jtj = jac.T @ jac
            jtr = jac.T @ r
            if not (np.all(np.isfinite(jtj)) and np.all(np.isfinite(jtr))):
                raise DivergenceError(
                    "non-finite residual during iteration", last_model=model_from(theta, sse))
            diag = np.diag(jtj).copy()
            diag[diag <= 0.0] = 1.0
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            candidate = theta + step
            candidate[4] = max(candidate[4], 0.0)
            r_new = _residuals(candidate, lengths, phis, weights)
            sse_new = float(r_new @ r_new)
            if not math.isfinite(sse_new):
                raise DivergenceError(
                    "non-finite residual during iteration", last_model=model_from(theta, sse))
            if sse_new < sse:
                improvement = (sse - sse_new) / max(sse, 1e-300)
                theta, r, sse = candidate, r_new, sse_new
                lam /= 10.0
                if improvement < ftol:
                    break
            else:
                lam *= 10.0
    return model_from(theta, sse)
