"""
One goal, a lookup table, optimal paths
=======================================

Train a tabular learner on "toilet" until 95 of the last 100 episodes
succeed, then follow its greedy policy from every spawn cell and compare the
path length to the BFS distance.
"""

from lexnav import harness
from lexnav.gridworld import load_map

amap = load_map()
metrics = harness.run_training(harness.RunConfig(goals=("toilet",), seed=7), amap)
print("criterion reached after", metrics.steps_to_criterion, "steps,", len(metrics.episodes), "episodes")

lengths = harness.greedy_lengths(metrics.agent, amap, "toilet")
optimal = sum(n == amap.bfs_distance(c, "toilet") for c, n in lengths.items())
print(f"greedy path is shortest from {optimal} of {len(lengths)} spawn cells")

# the learning curve, one row per 1000 steps
for row in metrics.rows[::5]:
    print(f"step {row[0]:6d}  success {row[2]:.2f}  epsilon {row[5]:.2f}")
