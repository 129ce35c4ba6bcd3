"""Discrete apartment used for object navigation.

Cells are addressed as ``(x, y)`` with ``x`` the column and ``y`` the row,
both 0-indexed from the top-left corner. The agent moves in the four compass
directions; walls and objects block movement. An episode succeeds when the
agent stands next to (4-adjacent to) the goal object.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from importlib import resources
from types import MappingProxyType

import numpy as np

NORTH, EAST, SOUTH, WEST = range(4)
ACTION_NAMES = ("North", "East", "South", "West")
MOVES = ((0, -1), (1, 0), (0, 1), (-1, 0))

WALL, FLOOR, SPAWN = "#", ".", ">"
OBJECT_GLYPHS = {
    "S": "shower", "B": "bathtub", "T": "toilet",
    "O": "stove", "A": "toaster", "L": "table", "M": "microwave",
    "D": "bed", "W": "wardrobe", "N": "nightstand",
}
GLYPH_OF = {word: glyph for glyph, word in OBJECT_GLYPHS.items()}

MAX_EPISODE_STEPS = 500
SLACK_PENALTY = -0.01
SUCCESS_BONUS = 10.0


class MapError(ValueError):
    pass


class EpisodeOver(RuntimeError):
    pass


@dataclass(frozen=True)
class ApartmentMap:
    width: int
    height: int
    rows: tuple  # the validated ASCII rows
    spawn_cells: tuple
    object_index: MappingProxyType  # word -> (x, y)
    _fields: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def objects(self) -> tuple:
        return tuple(self.object_index)

    def glyph(self, cell) -> str:
        x, y = cell
        return self.rows[y][x]

    def passable(self, cell) -> bool:
        x, y = cell
        if not (0 <= x < self.width and 0 <= y < self.height):
            return False
        return self.rows[y][x] in (FLOOR, SPAWN)

    def neighbors(self, cell):
        x, y = cell
        for dx, dy in MOVES:
            nxt = (x + dx, y + dy)
            if self.passable(nxt):
                yield nxt

    def passable_cells(self) -> list:
        return [(x, y) for y in range(self.height) for x in range(self.width)
                if self.passable((x, y))]

    def success_cells(self, goal: str) -> frozenset:
        x, y = self.object_cell(goal)
        return frozenset(self.neighbors((x, y)))

    def object_cell(self, goal: str) -> tuple:
        try:
            return self.object_index[goal]
        except KeyError:
            raise MapError(f"no object named {goal!r} on this map") from None

    def distance_field(self, goal: str) -> np.ndarray:
        """BFS steps to the nearest success cell, indexed ``[y, x]``; -1 where unreachable."""
        if goal not in self._fields:
            dist = np.full((self.height, self.width), -1, dtype=np.int64)
            queue = deque()
            for cell in sorted(self.success_cells(goal)):
                dist[cell[1], cell[0]] = 0
                queue.append(cell)
            while queue:
                cell = queue.popleft()
                d = dist[cell[1], cell[0]]
                for nxt in self.neighbors(cell):
                    if dist[nxt[1], nxt[0]] < 0:
                        dist[nxt[1], nxt[0]] = d + 1
                        queue.append(nxt)
            dist.setflags(write=False)
            self._fields[goal] = dist
        return self._fields[goal]

    def bfs_distance(self, cell, goal: str) -> int:
        if not self.passable(cell):
            raise MapError(f"cell {cell} is not passable")
        d = int(self.distance_field(goal)[cell[1], cell[0]])
        if d < 0:
            raise MapError(f"goal {goal!r} unreachable from {cell}")
        return d

    def render(self) -> str:
        return "\n".join(self.rows)


def bfs_distance(amap: ApartmentMap, cell, goal: str) -> int:
    return amap.bfs_distance(cell, goal)


def success_cells(amap: ApartmentMap, goal: str) -> frozenset:
    return amap.success_cells(goal)


def parse_map(text: str) -> ApartmentMap:
    rows = [line.rstrip("\r") for line in text.strip("\n").split("\n")]
    rows = [r for r in rows if r.strip()]
    if not rows:
        raise MapError("empty map")
    width, height = len(rows[0]), len(rows)
    for y, row in enumerate(rows):
        if len(row) != width:
            raise MapError(f"ragged map: row {y} has {len(row)} columns, expected {width}")

    objects, spawns = {}, []
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            if ch == SPAWN:
                spawns.append((x, y))
            elif ch in OBJECT_GLYPHS:
                word = OBJECT_GLYPHS[ch]
                if word in objects:
                    raise MapError(f"duplicate object {ch!r} ({word}) at {(x, y)} and {objects[word]}")
                objects[word] = (x, y)
            elif ch not in (WALL, FLOOR):
                raise MapError(f"unknown glyph {ch!r} at {(x, y)}")
            on_border = x in (0, width - 1) or y in (0, height - 1)
            if on_border and ch != WALL:
                raise MapError(f"border cell {(x, y)} is {ch!r}, expected wall")
    if not spawns:
        raise MapError("map has no spawn cell")

    amap = ApartmentMap(width, height, tuple(rows), tuple(spawns), MappingProxyType(objects))
    for word, cell in objects.items():
        if not amap.success_cells(word):
            raise MapError(f"unreachable object {word!r} at {cell}: no open neighbour")
        field_ = amap.distance_field(word)
        for s in spawns:
            if field_[s[1], s[0]] < 0:
                raise MapError(f"unreachable object {word!r} at {cell} from spawn cell {s}")
    return amap


def load_map(path=None) -> ApartmentMap:
    """Load a map file, or the bundled apartment when ``path`` is None or ``"default"``."""
    if path is None or str(path) == "default":
        text = (resources.files("lexnav") / "data" / "apartment.map").read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    return parse_map(text)


def encode_observation(amap: ApartmentMap, cell) -> np.ndarray:
    """one-hot(x, width) followed by one-hot(y, height)."""
    vec = np.zeros(amap.width + amap.height)
    vec[cell[0]] = 1.0
    vec[amap.width + cell[1]] = 1.0
    return vec


@dataclass(frozen=True)
class GridState:
    position: tuple
    goal: str
    steps_taken: int = 0
    done: bool = False


@dataclass(frozen=True)
class StepOutcome:
    state: GridState
    observation: np.ndarray
    reward: float
    done: bool
    success: bool
    distances: tuple  # (before, after) in BFS steps


def step(amap: ApartmentMap, state: GridState, action: int,
         distance_scale: float = 1.0, max_steps: int = MAX_EPISODE_STEPS) -> StepOutcome:
    if state.done:
        raise EpisodeOver("step() called on a finished episode; call reset()")
    dx, dy = MOVES[action]
    x, y = state.position
    nxt = (x + dx, y + dy)
    if not amap.passable(nxt):
        nxt = state.position
    field_ = amap.distance_field(state.goal)
    d_before = int(field_[y, x])
    d_after = int(field_[nxt[1], nxt[0]])
    success = d_after == 0
    reward = distance_scale * (d_before - d_after) + SLACK_PENALTY
    if success:
        reward += SUCCESS_BONUS
    steps = state.steps_taken + 1
    done = success or steps >= max_steps
    new_state = GridState(nxt, state.goal, steps, done)
    return StepOutcome(new_state, encode_observation(amap, nxt), reward, done, success,
                       (d_before, d_after))


class NavigationEnv:
    """One episode stream over a shared map, with its own random generator."""

    def __init__(self, amap: ApartmentMap, rng: np.random.Generator,
                 distance_scale: float = 1.0, max_steps: int = MAX_EPISODE_STEPS):
        self.map = amap
        self.rng = rng
        self.distance_scale = distance_scale
        self.max_steps = max_steps
        self.state = None

    def reset(self, goal: str):
        self.map.object_cell(goal)
        spawn = self.map.spawn_cells[self.rng.integers(len(self.map.spawn_cells))]
        self.state = GridState(spawn, goal)
        return self.state, encode_observation(self.map, spawn)

    def step(self, action: int) -> StepOutcome:
        if self.state is None:
            raise EpisodeOver("reset() must be called before step()")
        out = step(self.map, self.state, action, self.distance_scale, self.max_steps)
        self.state = out.state
        return out


def reset(amap: ApartmentMap, goal: str, rng: np.random.Generator):
    return NavigationEnv(amap, rng).reset(goal)
