"""End-to-end benchmark: fixed-length baseline vs adaptive discovery.

Builds a small synthetic suite with varying true lengths, runs the harness
in fixed and adaptive modes, and prints the summary report with deltas.
Result files are JSON lines written in task order; rerunning a config skips
completed tasks, so interrupted runs resume cleanly.
"""

import importlib.resources as resources
import json
import tempfile
from pathlib import Path

import cal_infill as ci
from cal_infill.harness import ExperimentConfig, render_table, run_experiment, summarize


def data_text(name):
    return resources.files("cal_infill").joinpath("data", name).read_text()


bias = ci.BiasModel.from_json_dict(json.loads(data_text("reference_bias.json")))
workdir = Path(tempfile.mkdtemp(prefix="cal-infill-demo-"))

tasks = [ci.InfillTask(task_id=f"t{i:02d}", prefix=f"context {i}", suffix="",
                       oracle_length=4 + (3 * i) % 18)
         for i in range(16)]
tasks_path = workdir / "tasks.jsonl"
ci.write_tasks(tasks_path, tasks)

spec_path = workdir / "landscape.json"
spec_path.write_text(json.dumps({
    "bias": bias.to_json_dict(), "oracle_length": 10,
    "peak_amplitude": 0.35, "peak_width": 1.5, "noise_sigma": 0.01, "seed": 21}))
bias_path = workdir / "bias.json"
ci.save_bias_model(bias_path, bias)

common = dict(tasks_path=str(tasks_path), backend=f"synthetic:{spec_path}",
              bias_model_path=str(bias_path), concurrency=8)
search = ci.SearchConfig(step=1, tolerance=4, l_init=8, l_max=64)

fixed = run_experiment(ExperimentConfig(
    mode="fixed", output_path=str(workdir / "fixed.jsonl"), search=search, **common))
adaptive = run_experiment(ExperimentConfig(
    mode="cal", output_path=str(workdir / "cal.jsonl"), search=search, **common))

report = summarize(adaptive, baseline_results=fixed)
print(render_table(report))

errors = [(r.l_used, r.oracle_length) for r in adaptive]
print("per-task answers (adaptive):")
for r in adaptive:
    print(f"  {r.task_id}: chose L={r.l_used:>2}, true {r.oracle_length:>2},"
          f" {r.search.probe_count} probes")
print()
print(f"result files under {workdir}")
