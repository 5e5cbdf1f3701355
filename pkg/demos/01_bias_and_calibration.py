"""Why raw first-step confidence misleads, and how calibration fixes it.

Replays the bundled case-study curve (a real probe sweep over mask lengths
1..21 for a task whose true middle is 10 tokens long). Raw confidence decays
with length, so short masks always look good; dividing by the fitted decay
curve B(L) exposes a clear peak at the true length.
"""

import importlib.resources as resources
import json

import cal_infill as ci


def data_text(name):
    return resources.files("cal_infill").joinpath("data", name).read_text()


bias = ci.BiasModel.from_json_dict(json.loads(data_text("reference_bias.json")))
records = ci.parse_probe_log(data_text("demo_curve_full.jsonl"))
curve = ci.ConfidenceCurve.from_records(records)

print(f"decay model: B(L) = {bias.a:.2f}*exp(-{bias.b:.2f} L)"
      f" + {bias.c:.2f}*exp(-{bias.d:.2f} L) + {bias.e:.2f}")
print()
print(f"{'L':>3} {'phi':>7} {'B(L)':>7} {'phi_c':>7}")
best_raw = max(curve.lengths(), key=curve.phi_at)
best_cal = max(curve.lengths(), key=lambda L: ci.calibrate(curve.phi_at(L), L, bias))
for length in curve.lengths():
    phi = curve.phi_at(length)
    b = ci.evaluate_bias(bias, length)
    phi_c = ci.calibrate(phi, length, bias)
    markers = "".join((" <- raw argmax" if length == best_raw else "",
                       " <- calibrated argmax" if length == best_cal else ""))
    print(f"{length:>3} {phi:>7.3f} {b:>7.3f} {phi_c:>7.3f}{markers}")

print()
print(f"raw confidence points at L={best_raw} (too short);"
      f" calibrated confidence points at L={best_cal} (the true length is 10)")
