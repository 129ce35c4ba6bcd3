"""
More goals, more steps?
=======================

Train the tabular learner on nested goal sets of size 2, 4 and 10 and compare
how long each takes to reach the success criterion.  With epsilon decaying
linearly over 150,000 steps the criterion is met once epsilon falls near 0.8,
whatever the set size, so the three medians land close together.
"""

import numpy as np

from lexnav import harness
from lexnav.gridworld import OBJECT_GLYPHS, load_map
from lexnav.plotting import emit_plot

SEEDS = (0, 1, 2)
SETS = {
    2: ("shower", "bed"),
    4: ("shower", "toilet", "bed", "toaster"),
    10: tuple(OBJECT_GLYPHS.values()),
}

amap = load_map()
curves = {}
for size, goals in SETS.items():
    runs = [harness.run_training(harness.RunConfig(goals=goals, seed=s), amap) for s in SEEDS]
    steps = [m.steps_to_criterion for m in runs]
    print(f"{size:2d} goals: {steps}  median {np.median(steps):.0f}")
    curves[f"{size} goals"] = harness.aggregate_runs(runs)

emit_plot(curves, "goal_set_size.svg", title="goal-set size, tabular learner")
print("wrote goal_set_size.svg")
