"""Bidirectional hill climbing over the calibrated confidence landscape.

Starts the search far below and far above the true length on the bundled
case-study curve. Both runs climb to the same answer; the printed traces
show the probe order, the incumbent updates, and where each arm gives up.
"""

import importlib.resources as resources
import json

import cal_infill as ci
from cal_infill.backends import ReplayBackend


def data_text(name):
    return resources.files("cal_infill").joinpath("data", name).read_text()


bias = ci.BiasModel.from_json_dict(json.loads(data_text("reference_bias.json")))
task = ci.parse_tasks(data_text("demo_tasks.jsonl"))[0]
curve = ci.ConfidenceCurve.from_records(ci.parse_probe_log(data_text("demo_curve_full.jsonl")))
backend = ReplayBackend.from_curve(curve)

for l_init in (4, 16):
    config = ci.SearchConfig(step=1, tolerance=4, l_init=l_init, l_max=64)
    result = ci.discover_length(backend, task, config, bias)
    print(f"start at L={l_init}:")
    incumbent = float("-inf")
    for point in result.trace:
        mark = ""
        if point.phi_c > incumbent:
            incumbent = point.phi_c
            mark = "  <- new best"
        print(f"  probe L={point.length:>2}  phi={point.phi:.3f}  phi_c={point.phi_c:.3f}{mark}")
    print(f"  answer: L={result.l_hat} after {result.probe_count} probes"
          f" (true length {task.oracle_length})")
    print()

full = ci.exhaustive_search(backend, task, 1, 21, bias)
print(f"exhaustive sweep over [1, 21] agrees: L={full.l_hat} ({full.probe_count} probes)")
