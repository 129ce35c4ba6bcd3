"""
Borrowing exploration from a related goal
=========================================

Train a prior policy on four goals, freeze it, then learn "bathtub" from
scratch.  During exploration a fifth of the non-greedy actions come from the
prior policy queried with one of its own goals.  A useful prior (shower) cuts
the steps needed; unrelated ones (bed, toaster) slow learning down.
"""

import numpy as np

from lexnav import harness
from lexnav.embedding import default_store
from lexnav.gridworld import load_map
from lexnav.plotting import emit_plot
from lexnav.transfer import ExplorationSchedule

SEEDS = (0, 1, 2)
MASTERED = ("shower", "toilet", "bed", "toaster")

amap, store = load_map(), default_store()
prior = harness.run_training(harness.RunConfig(goals=MASTERED, seed=0), amap)
print("prior policy trained in", prior.steps_to_criterion, "steps")

base = harness.RunConfig(target="bathtub", mastered=MASTERED, prior_checkpoint="in-memory",
                         schedule=ExplorationSchedule(alpha=0.2))
curves = {}
for word in ("none", "shower", "toilet", "bed", "toaster", "auto"):
    runs = [harness.run_transfer(base.replace(prior=word, seed=s), amap, store, prior.agent) for s in SEEDS]
    steps = [m.steps_to_criterion for m in runs]
    print(f"prior {word:8s} -> {runs[0].prior_goal or '-':8s} steps {steps}  median {np.median(steps):.0f}")
    curves[f"prior {word}"] = harness.aggregate_runs(runs)

emit_plot(curves, "transfer.svg", title="learning bathtub with a frozen prior")
print("wrote transfer.svg")
