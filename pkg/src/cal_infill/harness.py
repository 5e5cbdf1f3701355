"""Experiment runner: fixed-length vs adaptive (cal) vs exhaustive modes,
probe-curve recording for bias fitting, and report aggregation.

Result files are line-delimited JSON, one TaskResult per line, written in
task-file order regardless of worker completion order, flushed per line.
Reruns skip task_ids already present in the output file (a torn final line
from a crash is truncated first), so an interrupted run resumed equals an
uninterrupted one byte for byte. Nothing time-dependent is stored, so
identical configs and seeds give identical files.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .backends import (
    ProbeBackend,
    RemoteBackend,
    ReplayBackend,
    SyntheticLandscapeSpec,
    SyntheticSuiteBackend,
    load_synthetic_spec,
)
from .errors import CalInfillError, ParseError, ValidationError
from .metrics import bleu2, length_error_stats, rouge_l, search_cost_stats
from .search import discover_length, exhaustive_search
from .types import (
    BiasModel,
    InfillTask,
    ProbeRecord,
    SearchConfig,
    SearchResult,
    load_bias_model,
    read_probe_log,
    read_tasks,
)

log = logging.getLogger(__name__)

MODES = ("fixed", "cal", "exhaustive")

# Probe grid used when recording curves for bias fitting.
DEFAULT_PROBE_GRID = (1, 2, 4, 6, 12, 16, 24, 32, 48, 64, 96, 128)


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    tasks_path: str
    output_path: str
    backend: str
    search: SearchConfig = field(default_factory=SearchConfig)
    bias_model_path: str | None = None
    concurrency: int = 1
    seed: int | None = None  # overrides a synthetic landscape file's seed

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValidationError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode in ("cal", "exhaustive") and not self.bias_model_path:
            raise ValidationError(f"mode {self.mode!r} requires bias_model_path")
        if self.concurrency < 1:
            raise ValidationError("concurrency must be >= 1")

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "tasks_path": self.tasks_path,
            "output_path": self.output_path,
            "backend": self.backend,
            "search": {"step": self.search.step, "tolerance": self.search.tolerance,
                       "l_init": self.search.l_init, "l_max": self.search.l_max},
            "bias_model_path": self.bias_model_path,
            "concurrency": self.concurrency,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "ExperimentConfig":
        try:
            search = obj.get("search", {})
            return cls(
                mode=obj["mode"],
                tasks_path=obj["tasks_path"],
                output_path=obj["output_path"],
                backend=obj["backend"],
                search=SearchConfig(
                    step=int(search.get("step", 1)),
                    tolerance=int(search.get("tolerance", 4)),
                    l_init=int(search.get("l_init", 8)),
                    l_max=int(search.get("l_max", 64)),
                ),
                bias_model_path=obj.get("bias_model_path"),
                concurrency=int(obj.get("concurrency", 1)),
                seed=None if obj.get("seed") is None else int(obj["seed"]),
            )
        except KeyError as exc:
            raise ParseError(f"experiment config missing field {exc}") from exc


@dataclass(frozen=True)
class TaskResult:
    task_id: str
    mode: str
    l_used: int | None
    search: SearchResult | None = None
    decoded_middle: str | None = None
    metrics: dict[str, float] = field(default_factory=dict)
    oracle_length: int | None = None
    error: str | None = None

    def __post_init__(self) -> None:
        if self.error is None:
            if self.l_used is None or self.l_used < 1:
                raise ValidationError("successful result needs l_used >= 1")
            if self.mode in ("cal", "exhaustive") and self.search is None:
                raise ValidationError(f"{self.mode} results must carry a search trace")
            if self.mode == "fixed" and self.search is not None:
                raise ValidationError("fixed results must not carry a search trace")

    def to_json_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "mode": self.mode,
            "l_used": self.l_used,
            "search": None if self.search is None else self.search.to_json_dict(),
            "decoded_middle": self.decoded_middle,
            "metrics": self.metrics,
            "oracle_length": self.oracle_length,
            "error": self.error,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "TaskResult":
        return cls(
            task_id=obj["task_id"],
            mode=obj["mode"],
            l_used=obj["l_used"],
            search=None if obj.get("search") is None else SearchResult.from_json_dict(obj["search"]),
            decoded_middle=obj.get("decoded_middle"),
            metrics=dict(obj.get("metrics", {})),
            oracle_length=obj.get("oracle_length"),
            error=obj.get("error"),
        )


def build_backend(spec: str, tasks: Sequence[InfillTask],
                  remote_timeout: float | None = None,
                  seed_override: int | None = None) -> ProbeBackend:
    """Instantiate a backend from its spec string:
    ``synthetic:<landscape.json>``, ``replay:<probe-log>``, or ``remote:<url>``.

    ``seed_override`` replaces a synthetic landscape file's seed so one flag
    can pin all randomness of a run; replay and remote backends draw none.
    """
    if ":" not in spec:
        raise ValidationError(f"backend spec {spec!r} must look like kind:argument")
    kind, arg = spec.split(":", 1)
    if kind == "synthetic":
        template, _ = load_synthetic_spec(arg)
        if seed_override is not None:
            template = SyntheticLandscapeSpec(
                bias=template.bias, oracle_length=template.oracle_length,
                peak_amplitude=template.peak_amplitude, peak_width=template.peak_width,
                noise_sigma=template.noise_sigma, seed=seed_override)
        return SyntheticSuiteBackend(template, tasks)
    if kind == "replay":
        return ReplayBackend.from_records(read_probe_log(arg), tasks)
    if kind == "remote":
        kwargs = {} if remote_timeout is None else {"timeout": remote_timeout}
        return RemoteBackend(arg, **kwargs)
    raise ValidationError(f"unknown backend kind {kind!r} (expected synthetic/replay/remote)")


def _resolve_oracle_length(task: InfillTask, backend: ProbeBackend) -> int | None:
    if task.oracle_length is not None:
        return task.oracle_length
    if task.ground_truth_middle is not None and backend.capabilities.supports_tokenize:
        return backend.tokenize(task.ground_truth_middle)
    return None


def _run_one(task: InfillTask, mode: str, search_config: SearchConfig,
             backend: ProbeBackend, model: BiasModel | None) -> TaskResult:
    try:
        search_result: SearchResult | None = None
        if mode == "fixed":
            l_used = search_config.l_init
        elif mode == "cal":
            search_result = discover_length(backend, task, search_config, model)
            l_used = search_result.l_hat
        else:
            search_result = exhaustive_search(backend, task, 1, search_config.l_max, model)
            l_used = search_result.l_hat

        metrics: dict[str, float] = {}
        decoded: str | None = None
        if backend.capabilities.supports_decode:
            decoded = backend.decode(task.prefix, task.suffix, l_used)
            if task.ground_truth_middle is not None:
                rouge = rouge_l(decoded, task.ground_truth_middle)
                metrics["bleu2"] = bleu2(decoded, task.ground_truth_middle)
                metrics["rouge_l_precision"] = rouge.precision
                metrics["rouge_l_recall"] = rouge.recall
                metrics["rouge_l_f1"] = rouge.f1
        oracle = _resolve_oracle_length(task, backend)
        if oracle is not None:
            metrics["abs_length_error"] = float(abs(l_used - oracle))
        return TaskResult(task_id=task.task_id, mode=mode, l_used=l_used,
                          search=search_result, decoded_middle=decoded,
                          metrics=metrics, oracle_length=oracle)
    except Exception as exc:  # per-task isolation: record, do not abort the run
        log.warning("task %s failed: %s", task.task_id, exc)
        return TaskResult(task_id=task.task_id, mode=mode, l_used=None, error=str(exc))


def _load_completed(output_path: Path) -> tuple[list[TaskResult], int]:
    """Parse an existing result file, dropping any torn tail.

    Only newline-terminated, well-formed lines count as completed; everything
    after the first bad or unterminated line is discarded so a crash can never
    corrupt a resumed run. Returns the results and the valid-prefix length.
    """
    if not output_path.exists():
        return [], 0
    data = output_path.read_bytes()
    results: list[TaskResult] = []
    offset = 0
    start = 0
    while True:
        newline = data.find(b"\n", start)
        if newline == -1:
            break
        line = data[start:newline]
        if line.strip():
            try:
                results.append(TaskResult.from_json_dict(json.loads(line.decode("utf-8"))))
            except (ValueError, KeyError, ValidationError):
                break
        offset = newline + 1
        start = newline + 1
    return results, offset


def run_experiment(config: ExperimentConfig, backend: ProbeBackend | None = None,
                   remote_timeout: float | None = None) -> list[TaskResult]:
    """Run every pending task and append results to the output file.

    Returns all results (previously completed plus new) in task-file order.
    """
    tasks = read_tasks(config.tasks_path)
    model: BiasModel | None = None
    if config.mode in ("cal", "exhaustive"):
        model = load_bias_model(config.bias_model_path)
    if backend is None:
        backend = build_backend(config.backend, tasks, remote_timeout=remote_timeout,
                                seed_override=config.seed)

    output_path = Path(config.output_path)
    completed, valid_offset = _load_completed(output_path)
    if output_path.exists() and valid_offset < len(output_path.read_bytes()):
        with output_path.open("r+b") as fh:
            fh.truncate(valid_offset)
    done_ids = {r.task_id for r in completed}
    pending = [t for t in tasks if t.task_id not in done_ids]

    by_id = {r.task_id: r for r in completed}
    if pending:
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with output_path.open("ab") as fh:
            with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
                futures = [pool.submit(_run_one, task, config.mode, config.search, backend, model)
                           for task in pending]
                try:
                    for future in futures:
                        result = future.result()
                        line = json.dumps(result.to_json_dict(), separators=(",", ":"))
                        fh.write(line.encode("utf-8") + b"\n")
                        fh.flush()
                        os.fsync(fh.fileno())
                        by_id[result.task_id] = result
                except BaseException:
                    for future in futures:
                        future.cancel()
                    raise
    return [by_id[t.task_id] for t in tasks if t.task_id in by_id]


def record_probe_curves(tasks: Sequence[InfillTask], backend: ProbeBackend,
                        grid: Sequence[int] = DEFAULT_PROBE_GRID,
                        output_path: str | Path | None = None) -> list[ProbeRecord]:
    """Probe every (task, grid length) pair and return the records.

    Backend failures are logged per point and skipped.
    """
    grid = tuple(grid)
    if not grid:
        raise ValidationError("probe grid must be non-empty")
    if list(grid) != sorted(grid):
        raise ValidationError("probe grid must be ascending")
    records: list[ProbeRecord] = []
    for task in tasks:
        for length in grid:
            try:
                values = backend.probe(task.prefix, task.suffix, length)
                records.append(ProbeRecord.from_confidences(task.task_id, values,
                                                            backend_id=backend.backend_id))
            except CalInfillError as exc:
                log.warning("probe (%s, L=%d) failed and was skipped: %s", task.task_id, length, exc)
    if output_path is not None:
        from .types import write_probe_log
        Path(output_path).parent.mkdir(parents=True, exist_ok=True)
        write_probe_log(output_path, records)
    return records


def _aggregate(results: Sequence[TaskResult]) -> dict:
    ok = [r for r in results if r.error is None]
    failed = len(results) - len(ok)
    metric_keys = sorted({k for r in ok for k in r.metrics})
    mean_metrics = {
        key: sum(r.metrics[key] for r in ok if key in r.metrics) / max(sum(key in r.metrics for r in ok), 1)
        for key in metric_keys
    }
    pairs = [(r.l_used, r.oracle_length) for r in ok
             if r.oracle_length is not None and r.l_used is not None]
    searches = [r.search for r in ok if r.search is not None]
    block = {
        "n_tasks": len(results),
        "n_failed": failed,
        "mean_metrics": mean_metrics,
    }
    if pairs:
        block["length_error"] = length_error_stats(pairs)
    if searches:
        block["search_cost"] = search_cost_stats(searches)
    return block


def summarize(results: Sequence[TaskResult],
              baseline_results: Sequence[TaskResult] | None = None) -> dict:
    """Aggregate results per mode; with a baseline, also emit metric deltas."""
    if not results:
        raise ValidationError("summarize needs at least one result")
    modes = sorted({r.mode for r in results})
    report: dict = {"modes": {}}
    for mode in modes:
        report["modes"][mode] = _aggregate([r for r in results if r.mode == mode])
    if baseline_results:
        base = _aggregate(list(baseline_results))
        report["baseline"] = base
        deltas: dict = {}
        for mode in modes:
            block = report["modes"][mode]
            delta_metrics = {
                key: block["mean_metrics"][key] - base["mean_metrics"][key]
                for key in block["mean_metrics"] if key in base["mean_metrics"]
            }
            for stat_key in ("length_error",):
                if stat_key in block and stat_key in base:
                    for k in block[stat_key]:
                        if k in base[stat_key]:
                            delta_metrics[f"{stat_key}.{k}"] = block[stat_key][k] - base[stat_key][k]
            deltas[mode] = delta_metrics
        report["deltas_vs_baseline"] = deltas
    return report


def render_table(report: Mapping) -> str:
    """Plain-text view of a summarize() report, aligned for humans."""
    rows: list[tuple[str, str, str]] = []
    for mode, block in report["modes"].items():
        rows.append((mode, "tasks", str(block["n_tasks"])))
        if block["n_failed"]:
            rows.append((mode, "failed", str(block["n_failed"])))
        for key, value in block["mean_metrics"].items():
            rows.append((mode, key, f"{value:.4f}"))
        for stat_key in ("length_error", "search_cost"):
            for k, v in block.get(stat_key, {}).items():
                rows.append((mode, f"{stat_key}.{k}", f"{v:.4f}"))
    for mode, deltas in report.get("deltas_vs_baseline", {}).items():
        for key, value in deltas.items():
            rows.append((mode, f"delta.{key}", f"{value:+.4f}"))
    if not rows:
        return "(empty report)\n"
    widths = [max(len(row[i]) for row in rows) for i in range(3)]
    lines = [f"{mode:<{widths[0]}}  {key:<{widths[1]}}  {value:>{widths[2]}}"
             for mode, key, value in rows]
    return "\n".join(lines) + "\n"
