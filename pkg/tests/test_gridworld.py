import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lexnav.gridworld import (EAST, MAX_EPISODE_STEPS, MOVES, NORTH, SOUTH, WEST, EpisodeOver, GridState,
                              MapError, NavigationEnv, encode_observation, parse_map, reset, step)
from oracles import binomial_bounds, dijkstra_to_goal, random_valid_map


def test_default_map_shape(amap):
    # counted straight off the ASCII text
    from importlib import resources
    text = (resources.files("lexnav") / "data" / "apartment.map").read_text()
    rows = text.split()
    assert (amap.width, amap.height) == (len(rows[0]), len(rows)) == (25, 11)
    assert len(amap.spawn_cells) == sum(r.count(">") for r in rows) == 69
    assert len(amap.object_index) == 10


def test_rooms(amap):
    bathroom = {"shower", "bathtub", "toilet"}
    assert all(amap.object_cell(w)[0] < 7 for w in bathroom)
    assert all(7 < amap.object_cell(w)[0] < 15 for w in ("stove", "toaster", "table", "microwave"))
    assert all(amap.object_cell(w)[0] > 15 for w in ("bed", "wardrobe", "nightstand"))


@pytest.mark.parametrize("text, match", [
    ("###\n###\n###", "no spawn"),
    ("#####\n#>..#\n#..#\n#####", "ragged"),
    ("#####\n#>.?#\n#####", "unknown glyph"),
    ("######\n#>S.S#\n######", "duplicate"),
    ("#######\n#>..###\n####S##\n#######", "unreachable"),
    ("#######\n#>.#..#\n###S..#\n#######", "unreachable"),
    ("#>###\n#...#\n#####", "border"),
])
def test_parse_errors(text, match):
    with pytest.raises(MapError, match=match):
        parse_map(text)


def test_success_cells(amap):
    assert amap.success_cells("shower") == {(2, 1), (1, 2)}
    single = parse_map("#####\n#>.S#\n#####")
    assert single.success_cells("shower") == {(2, 1)}
    with pytest.raises(MapError):
        amap.success_cells("sofa")


def test_bfs_known_values(amap):
    for cell in amap.success_cells("toilet"):
        assert amap.bfs_distance(cell, "toilet") == 0
    assert amap.bfs_distance((3, 5), "toilet") == 1
    # unit-weight Dijkstra oracle, frozen
    assert amap.bfs_distance((12, 8), "shower") == 17


def test_bfs_matches_dijkstra_everywhere(amap):
    rows = amap.rows
    for goal, cell in amap.object_index.items():
        for c in amap.passable_cells():
            assert amap.bfs_distance(c, goal) == dijkstra_to_goal(rows, c, cell)


def test_bfs_matches_dijkstra_on_random_maps():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        rows = random_valid_map(rng)
        m = parse_map("\n".join(rows))
        for goal, cell in m.object_index.items():
            for c in m.passable_cells():
                expected = dijkstra_to_goal(rows, c, cell)
                if expected is None:
                    with pytest.raises(MapError):
                        m.bfs_distance(c, goal)
                else:
                    assert m.bfs_distance(c, goal) == expected


def test_reset_single_spawn_is_deterministic():
    m = parse_map("######\n#>..S#\n######")
    for seed in range(5):
        state, obs = reset(m, "shower", np.random.default_rng(seed))
        assert state.position == (1, 1)
        assert state.steps_taken == 0


def test_reset_same_seed_same_sequence(amap):
    a = NavigationEnv(amap, np.random.default_rng(3))
    b = NavigationEnv(amap, np.random.default_rng(3))
    assert [a.reset("bed")[0].position for _ in range(50)] == [b.reset("bed")[0].position for _ in range(50)]


def test_reset_is_uniform_over_spawns(amap):
    env = NavigationEnv(amap, np.random.default_rng(99))
    n = 10_000
    counts = {c: 0 for c in amap.spawn_cells}
    for _ in range(n):
        counts[env.reset("table")[0].position] += 1
    lo, hi = binomial_bounds(n, 1 / len(amap.spawn_cells))
    assert all(lo <= k <= hi for k in counts.values())


def test_step_rewards(amap):
    state = GridState((3, 7), "toilet")
    d0 = amap.bfs_distance((3, 7), "toilet")
    out = step(amap, state, NORTH)
    assert out.distances == (d0, d0 - 1)
    assert out.reward == pytest.approx(0.99)
    assert not out.done

    bump = step(amap, GridState((1, 7), "toilet"), WEST)
    assert bump.state.position == (1, 7)
    assert bump.reward == pytest.approx(-0.01)

    # into an object cell also bumps
    blocked = step(amap, GridState((2, 1), "bed"), WEST)
    assert blocked.state.position == (2, 1)

    win = step(amap, GridState((2, 4), "toilet"), SOUTH)
    assert win.success and win.done
    assert win.reward == pytest.approx(10.99)


def test_step_after_done_raises(amap):
    out = step(amap, GridState((2, 4), "toilet"), SOUTH)
    with pytest.raises(EpisodeOver):
        step(amap, out.state, NORTH)


def test_episode_cap(amap):
    env = NavigationEnv(amap, np.random.default_rng(0))
    env.reset("wardrobe")
    env.state = GridState((1, 7), "wardrobe")
    n = 0
    while True:
        out = env.step(WEST)  # bump forever
        n += 1
        if out.done:
            break
    assert n == MAX_EPISODE_STEPS
    assert not out.success


def test_observation_encoding(amap):
    v = encode_observation(amap, (3, 7))
    assert v.shape == (36,)
    assert np.flatnonzero(v).tolist() == [3, 32]
    assert v.sum() == 2
    cells = amap.passable_cells()
    assert len({encode_observation(amap, c).tobytes() for c in cells}) == len(cells)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["shower", "bathtub", "stove", "bed", "nightstand"]))
def test_reward_telescopes_and_distance_moves_by_at_most_one(seed, goal):
    from lexnav.gridworld import load_map
    amap = load_map()
    rng = np.random.default_rng(seed)
    env = NavigationEnv(amap, rng)
    state, _ = env.reset(goal)
    d0 = amap.bfs_distance(state.position, goal)
    improvement, total, steps = 0, 0.0, 0
    while True:
        out = env.step(int(rng.integers(4)))
        before, after = out.distances
        assert abs(before - after) <= 1
        improvement += before - after
        total += out.reward
        steps += 1
        if out.done:
            break
    d_final = amap.bfs_distance(out.state.position, goal)
    assert improvement == d0 - d_final
    expected = d0 - d_final - 0.01 * steps + 10.0 * out.success
    assert math.isclose(total, expected, abs_tol=1e-9)
    assert steps <= MAX_EPISODE_STEPS


def test_greedy_descent_takes_exactly_d_steps(amap):
    for goal in amap.object_index:
        field = amap.distance_field(goal)
        for start in amap.spawn_cells:
            state = GridState(start, goal)
            d0 = amap.bfs_distance(start, goal)
            n = 0
            while not state.done:
                x, y = state.position
                a = next(a for a, (dx, dy) in enumerate(MOVES)
                         if amap.passable((x + dx, y + dy)) and field[y + dy, x + dx] == field[y, x] - 1)
                state = step(amap, state, a).state
                n += 1
            assert n == d0


def test_distance_scale():
    m = parse_map("######\n#>..S#\n######")
    out = step(m, GridState((1, 1), "shower"), EAST, distance_scale=0.5)
    assert out.reward == pytest.approx(0.49)
