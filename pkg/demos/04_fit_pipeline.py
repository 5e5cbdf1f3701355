"""Fitting the length-decay curve from probe logs.

Simulates 100 peakless tasks, probes them on a sparse length grid, pools
the samples per length with 1/sqrt(N) weights after dropping probes near
each task's true length, then fits the double-exponential decay by damped
Gauss-Newton. The fitted curve is compared against the generator.
"""

import importlib.resources as resources
import json

import numpy as np

import cal_infill as ci
from cal_infill.backends import SyntheticBackend, SyntheticLandscapeSpec


def data_text(name):
    return resources.files("cal_infill").joinpath("data", name).read_text()


truth = ci.BiasModel.from_json_dict(json.loads(data_text("reference_bias.json")))
grid = (1, 2, 4, 6, 12, 16, 24, 32, 48, 64, 96, 128)

rng = np.random.Generator(np.random.Philox(101))
records = []
oracles = {}
for i in range(100):
    task_id = f"task-{i:03d}"
    oracles[task_id] = int(rng.integers(3, 41))
    spec = SyntheticLandscapeSpec(bias=truth, oracle_length=oracles[task_id],
                                  peak_amplitude=0.0, peak_width=1.0,
                                  noise_sigma=0.01, seed=99)
    backend = SyntheticBackend(spec, task_key=task_id)
    for length in grid:
        records.append(ci.ProbeRecord.from_confidences(
            task_id, backend.probe("", "", length), backend_id="sim"))

dataset = ci.prepare_fit_dataset(records, oracles, window=4)
print(f"{len(records)} probes -> {len(dataset.points)} pooled lengths "
      f"(window 4 around each true length)")
for point in dataset.points:
    print(f"  L={point.length:>3}  phi={point.phi:.4f}  weight={point.weight:.4f}")

fitted = ci.fit_bias(dataset)
print()
print(f"truth : a={truth.a:.3f} b={truth.b:.3f} c={truth.c:.3f} d={truth.d:.3f} e={truth.e:.3f}")
print(f"fitted: a={fitted.a:.3f} b={fitted.b:.3f} c={fitted.c:.3f} d={fitted.d:.3f} e={fitted.e:.3f}")
print(f"weighted SSE {fitted.fit_meta.weighted_sse:.3e} over {fitted.fit_meta.n_points} points")

max_rel = max(abs(ci.evaluate_bias(fitted, L) - ci.evaluate_bias(truth, L))
              / ci.evaluate_bias(truth, L) for L in range(1, 129))
print(f"max relative curve error on [1, 128]: {max_rel:.4%}")
print("note: the two exponential pairs are exchangeable and weakly identified,")
print("so parameters can drift while the curve itself stays tight")
