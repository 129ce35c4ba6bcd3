"""
Goal as an index or as a word vector
====================================

The same dense learner is given its goal either as a one-hot index or as the
goal word's vector.  Both should learn four goals in a similar number of steps.
Each run takes around ten seconds.
"""

import numpy as np

from lexnav import harness
from lexnav.embedding import default_store
from lexnav.gridworld import load_map
from lexnav.plotting import emit_plot

SEEDS = (0, 1, 2)
GOALS = ("shower", "toilet", "bed", "toaster")

amap, store = load_map(), default_store()
runs = {}
for kind in ("dense-onehot", "dense-embedding"):
    runs[kind] = [harness.run_training(harness.RunConfig(goals=GOALS, agent=kind, seed=s), amap, store)
                  for s in SEEDS]
    steps = [m.steps_to_criterion for m in runs[kind]]
    print(f"{kind:16s} steps to criterion {steps}  median {np.median(steps):.0f}")

emit_plot({k: harness.aggregate_runs(v) for k, v in runs.items()}, "onehot_vs_embedding.svg",
          title="four goals, dense learner")
print("wrote onehot_vs_embedding.svg")
