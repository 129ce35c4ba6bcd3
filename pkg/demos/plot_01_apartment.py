"""
The apartment gridworld
=======================

Load the built-in floor plan, look at where the objects sit and check the
shaped reward on a short hand-written walk.
"""

import numpy as np

from lexnav.gridworld import NORTH, WEST, GridState, encode_observation, load_map, step

amap = load_map()
print(amap.render())
print(amap.width, "x", amap.height, "cells,", len(amap.spawn_cells), "spawn cells")

# Each object has a BFS distance field; -1 marks walls and furniture.
field = amap.distance_field("toilet")
print("distance field for the toilet:\n", field)
print("farthest spawn from the toilet:", max(amap.bfs_distance(c, "toilet") for c in amap.spawn_cells))

# A step that closes one unit of distance earns 1 - 0.01.  Walking into a wall
# costs only the slack penalty, and reaching the object adds the bonus.
state = GridState((3, 7), "toilet")
for action in (NORTH, NORTH, WEST):
    out = step(amap, state, action)
    print(state.position, "->", out.state.position, "distance", out.distances, "reward", round(out.reward, 2))
    state = out.state
    if out.done:
        print("reached the toilet, success =", out.success)
        break

# The agent sees its column and row as two one-hot blocks.
obs = encode_observation(amap, (3, 7))
print("observation length", obs.size, "hot indices", np.flatnonzero(obs))
