"""Command-line interface: fit-bias, discover, simulate, record, evaluate.

Defaults mirror the benchmark setup: step 1, tolerance 4 for the code
profile (2 for text via --profile text), l_max 64 for single-span tasks
(128 for multi via --span multi). Exit codes: 0 success, 1 validation or
usage error, 2 runtime failure. All randomness flows from --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backends import SyntheticBackend, SyntheticLandscapeSpec, load_synthetic_spec
from .biasfit import DEFAULT_FTOL, DEFAULT_INIT, DEFAULT_MAX_ITERS, DEFAULT_WINDOW, fit_bias, prepare_fit_dataset
from .errors import CalInfillError, InsufficientDataError, ParseError, ValidationError
from .harness import (
    DEFAULT_PROBE_GRID,
    ExperimentConfig,
    TaskResult,
    build_backend,
    record_probe_curves,
    render_table,
    run_experiment,
    summarize,
)
from .types import (
    InfillTask,
    ProbeRecord,
    SearchConfig,
    read_probe_log,
    read_tasks,
    save_bias_model,
    write_probe_log,
    write_tasks,
)

REMOTE_TIMEOUT_ENV = "CAL_REMOTE_TIMEOUT_SECS"

PROFILE_TOLERANCE = {"code": 4, "text": 2}
SPAN_L_MAX = {"single": 64, "multi": 128}


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _parse_grid(text: str) -> tuple[int, ...]:
    try:
        grid = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ValidationError(f"grid must be comma-separated integers, got {text!r}") from exc
    if not grid:
        raise ValidationError("grid must be non-empty")
    return grid


def _remote_timeout() -> float | None:
    raw = os.environ.get(REMOTE_TIMEOUT_ENV)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError as exc:
        raise ValidationError(f"{REMOTE_TIMEOUT_ENV}={raw!r} is not a number") from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="cal-infill", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-bias", parents=[], help="fit the length-bias curve from a probe log")
    p.add_argument("--probes", required=True, help="probe log (JSON lines)")
    p.add_argument("--tasks", required=True, help="task file with oracle lengths")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW,
                   help="oracle-exclusion half width (default 4)")
    p.add_argument("--out", required=True, help="output bias-model JSON path")
    p.add_argument("--init", default=",".join(str(x) for x in DEFAULT_INIT),
                   help="comma-separated a,b,c,d,e initializer")
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--ftol", type=float, default=DEFAULT_FTOL)

    p = sub.add_parser("discover", help="adaptive length discovery over a task file")
    p.add_argument("--tasks", required=True)
    p.add_argument("--backend", required=True,
                   help="synthetic:<spec.json> | replay:<log> | remote:<url>")
    p.add_argument("--bias", required=True, help="bias-model JSON path")
    p.add_argument("--l-init", type=int, required=True)
    p.add_argument("--step", type=int, default=1)
    p.add_argument("--profile", choices=sorted(PROFILE_TOLERANCE), default="code",
                   help="tolerance default: code=4, text=2")
    p.add_argument("--tolerance", type=int, default=None, help="override the profile tolerance")
    p.add_argument("--span", choices=sorted(SPAN_L_MAX), default="single",
                   help="l_max default: single=64, multi=128")
    p.add_argument("--l-max", type=int, default=None, help="override the span l_max")
    p.add_argument("--out", required=True, help="output results file (JSON lines)")
    p.add_argument("--concurrency", type=int, default=None,
                   help="worker pool size (default 1 remote, 8 otherwise)")
    p.add_argument("--seed", type=int, default=None,
                   help="override the synthetic landscape seed")

    p = sub.add_parser("simulate", help="generate synthetic tasks and their probe log")
    p.add_argument("--spec", required=True, help="landscape spec JSON")
    p.add_argument("--tasks", type=int, required=True, help="number of tasks to simulate")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output probe log")
    p.add_argument("--grid", default=",".join(str(x) for x in DEFAULT_PROBE_GRID))
    p.add_argument("--tasks-out", default=None, help="also write the generated task file here")

    p = sub.add_parser("record", help="record probe curves over a length grid")
    p.add_argument("--tasks", required=True)
    p.add_argument("--backend", required=True)
    p.add_argument("--grid", default=",".join(str(x) for x in DEFAULT_PROBE_GRID))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=None,
                   help="override the synthetic landscape seed")

    p = sub.add_parser("evaluate", help="aggregate a results file into a summary report")
    p.add_argument("--results", required=True)
    p.add_argument("--baseline", default=None)
    p.add_argument("--out", required=True, help="output summary JSON")
    return parser


def _cmd_fit_bias(args) -> int:
    records = read_probe_log(args.probes)
    tasks = read_tasks(args.tasks)
    oracle_lengths = {t.task_id: t.oracle_length for t in tasks if t.oracle_length is not None}
    init = tuple(float(x) for x in args.init.split(","))
    if len(init) != 5:
        raise ValidationError(f"--init needs 5 values, got {len(init)}")
    dataset = prepare_fit_dataset(records, oracle_lengths, window=args.window)
    model = fit_bias(dataset, init=init, max_iters=args.max_iters, ftol=args.ftol)
    save_bias_model(args.out, model)
    print(f"fit {len(dataset.points)} pooled lengths -> {args.out} "
          f"(weighted SSE {model.fit_meta.weighted_sse:.3e})")
    return 0


def _cmd_discover(args) -> int:
    tolerance = args.tolerance if args.tolerance is not None else PROFILE_TOLERANCE[args.profile]
    l_max = args.l_max if args.l_max is not None else SPAN_L_MAX[args.span]
    concurrency = args.concurrency
    if concurrency is None:
        concurrency = 1 if args.backend.startswith("remote:") else 8
    config = ExperimentConfig(
        mode="cal",
        tasks_path=args.tasks,
        output_path=args.out,
        backend=args.backend,
        search=SearchConfig(step=args.step, tolerance=tolerance, l_init=args.l_init, l_max=l_max),
        bias_model_path=args.bias,
        concurrency=concurrency,
        seed=args.seed,
    )
    results = run_experiment(config, remote_timeout=_remote_timeout())
    failed = sum(r.error is not None for r in results)
    print(f"discovered lengths for {len(results)} tasks ({failed} failed) -> {args.out}")
    return 0


def _cmd_simulate(args) -> int:
    template, oracle_range = load_synthetic_spec(args.spec)
    grid = _parse_grid(args.grid)
    rng = np.random.Generator(np.random.Philox(args.seed))
    lo, hi = oracle_range if oracle_range is not None else (3, 40)
    tasks: list[InfillTask] = []
    records: list[ProbeRecord] = []
    for i in range(args.tasks):
        task_id = f"synth-{i:04d}"
        oracle = int(rng.integers(lo, hi + 1)) if oracle_range is not None else template.oracle_length
        task = InfillTask(task_id=task_id, prefix=f"synthetic context {i}", suffix="",
                          oracle_length=oracle, domain_tag="synthetic")
        tasks.append(task)
        spec = SyntheticLandscapeSpec(
            bias=template.bias, oracle_length=oracle,
            peak_amplitude=template.peak_amplitude, peak_width=template.peak_width,
            noise_sigma=template.noise_sigma, seed=args.seed)
        backend = SyntheticBackend(spec, task_key=task_id)
        for length in grid:
            values = backend.probe(task.prefix, task.suffix, length)
            records.append(ProbeRecord.from_confidences(task_id, values, backend_id=backend.backend_id))
    write_probe_log(args.out, records)
    if args.tasks_out:
        write_tasks(args.tasks_out, tasks)
    print(f"simulated {len(tasks)} tasks x {len(grid)} lengths -> {args.out}")
    return 0


def _cmd_record(args) -> int:
    tasks = read_tasks(args.tasks)
    backend = build_backend(args.backend, tasks, remote_timeout=_remote_timeout(),
                            seed_override=args.seed)
    grid = _parse_grid(args.grid)
    records = record_probe_curves(tasks, backend, grid=grid, output_path=args.out)
    print(f"recorded {len(records)} probes -> {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    results = _read_results(args.results)
    if not results:
        raise ValidationError(f"results file {args.results} is empty")
    baseline = _read_results(args.baseline) if args.baseline else None
    report = summarize(results, baseline)
    Path(args.out).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    sys.stdout.write(render_table(report))
    return 0


def _read_results(path: str) -> list[TaskResult]:
    results = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            results.append(TaskResult.from_json_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError) as exc:
            raise ParseError(f"{path}: line {i}: malformed result: {exc}") from exc
    return results


_COMMANDS = {
    "fit-bias": _cmd_fit_bias,
    "discover": _cmd_discover,
    "simulate": _cmd_simulate,
    "record": _cmd_record,
    "evaluate": _cmd_evaluate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ValidationError, ParseError, InsufficientDataError, FileNotFoundError) as exc:
        print(f"cal-infill {args.command}: {exc}", file=sys.stderr)
        return 1
    except CalInfillError as exc:
        print(f"cal-infill {args.command}: runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
