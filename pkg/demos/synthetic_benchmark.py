"""Tiered selection versus plain active learning on synthetic blobs.

Runs the three methods on the same pool and prints each cost/accuracy curve,
then the labeling efficiency of the tiered loop against both baselines.
"""

import numpy as np

from tieredal import (ExperimentConfig, TrainConfig, cost_accuracy_curve,
                      labeling_efficiency, run_experiment)

BASE = dict(blob_classes=10, blob_per_class=50, blob_dim=5, blob_spread=1.2,
            seed_size=40, b1=8, b2=8, b3=8, rounds=6, runs=1,
            c_a=3.0, c_v=1.0, train=TrainConfig(t_max=40), rng_seed=0)

curves = {}
for method in ("clarifier", "al_suggest", "al_plain"):
    records = run_experiment(ExperimentConfig(method=method, **BASE))[0]
    curves[method] = cost_accuracy_curve(records)
    print(f"\n{method}")
    print("  round  cost  accuracy")
    for r in records:
        print(f"  {r.round:>5}  {r.cost_cumulative:>4.0f}  {r.test_accuracy:.3f}")

# target: midway between the seed model and the weakest final model
a0 = curves["al_plain"][0][1]
amax = min(max(a for _, a in c) for c in curves.values())
target = 0.5 * (a0 + amax)
print(f"\ntarget accuracy {target:.3f}")
for other in ("al_suggest", "al_plain"):
    eff = labeling_efficiency(curves["clarifier"], curves[other], target)
    print(f"clarifier vs {other}: {eff:.2f}x cheaper")
