"""Goal-conditional action-value learners.

Every policy here answers ``q_values(cell, goal)`` for a grid cell ``(x, y)``
and a goal word, and picks actions with :func:`argmax_random`. The tabular
learner keys directly on ``(goal, cell)``; the dense learner feeds the
position one-hot features concatenated with a goal vector to a
:class:`~lexnav.nn.DenseNet` and bootstraps from a periodically synced
target copy.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

import numpy as np

from . import nn
from .embedding import EmbeddingStore
from .gridworld import OBJECT_GLYPHS

N_ACTIONS = 4
OBJECT_VOCABULARY = tuple(OBJECT_GLYPHS.values())
TAB_HEADER = "lexnav-tab v1"

ONEHOT, EMBEDDING = "onehot", "embedding"


def argmax_random(values, rng: np.random.Generator) -> int:
    """Index of the maximum, ties broken uniformly with ``rng``."""
    values = np.asarray(values)
    best = np.flatnonzero(values == values.max())
    if len(best) == 1:
        return int(best[0])
    return int(best[rng.integers(len(best))])


class GoalEncoder:
    """Maps goal words to vectors, either one-hot over a vocabulary or via word vectors."""

    def __init__(self, mode: str, vocabulary=OBJECT_VOCABULARY, store: EmbeddingStore | None = None):
        if mode not in (ONEHOT, EMBEDDING):
            raise ValueError(f"unknown goal encoding {mode!r}")
        if mode == EMBEDDING and store is None:
            raise ValueError("embedding goal encoding needs an EmbeddingStore")
        self.mode = mode
        self.vocabulary = tuple(vocabulary)
        self.store = store
        self._cache = {}

    @property
    def dimension(self) -> int:
        return len(self.vocabulary) if self.mode == ONEHOT else self.store.dimension

    def encode(self, word: str) -> np.ndarray:
        vec = self._cache.get(word)
        if vec is None:
            if self.mode == ONEHOT:
                if word not in self.vocabulary:
                    raise KeyError(f"goal {word!r} not in one-hot vocabulary")
                vec = np.zeros(len(self.vocabulary))
                vec[self.vocabulary.index(word)] = 1.0
            else:
                vec = self.store.vector(word).values
            self._cache[word] = vec
        return vec


def encode_goal(word: str, mode: str, store_or_vocab=OBJECT_VOCABULARY) -> np.ndarray:
    if mode == EMBEDDING:
        return GoalEncoder(mode, store=store_or_vocab).encode(word)
    return GoalEncoder(mode, vocabulary=store_or_vocab).encode(word)


@dataclass(frozen=True)
class Transition:
    cell: tuple
    goal: str
    action: int
    reward: float
    next_cell: tuple
    done: bool


class ReplayBuffer:
    """Fixed-capacity FIFO ring of transitions with uniform sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items = []
        self.pushed = 0

    def __len__(self):
        return len(self._items)

    def push(self, transition: Transition):
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self.pushed % self.capacity] = transition
        self.pushed += 1

    def sample(self, batch_size: int, rng: np.random.Generator) -> list:
        if not self._items:
            raise ValueError("cannot sample from an empty buffer")
        idx = rng.integers(len(self._items), size=batch_size)
        return [self._items[i] for i in idx]

    def __iter__(self):
        # oldest first
        if len(self._items) < self.capacity:
            return iter(list(self._items))
        start = self.pushed % self.capacity
        return iter(self._items[start:] + self._items[:start])


class Policy:
    """Shared greedy-action logic."""

    def q_values(self, cell, goal: str) -> np.ndarray:
        raise NotImplementedError

    def greedy_action(self, cell, goal: str, rng: np.random.Generator) -> int:
        return argmax_random(self.q_values(cell, goal), rng)


class TabularQ(Policy):
    kind = "tabular"

    def __init__(self, width: int, height: int):
        self.width = width
        self.height = height
        self.tables = {}
        self.visited = {}

    def _table(self, goal: str):
        table = self.tables.get(goal)
        if table is None:
            table = self.tables[goal] = np.zeros((self.height, self.width, N_ACTIONS))
            self.visited[goal] = np.zeros((self.height, self.width), dtype=bool)
        return table

    @property
    def goals(self) -> tuple:
        return tuple(self.tables)

    def q_values(self, cell, goal: str) -> np.ndarray:
        table = self.tables.get(goal)
        if table is None:
            return np.zeros(N_ACTIONS)
        return table[cell[1], cell[0]].copy()

    def update(self, t: Transition, lr: float = 0.1, gamma: float = 0.99) -> float:
        """One Q-learning backup; returns the TD error."""
        table = self._table(t.goal)
        x, y = t.cell
        target = t.reward
        if not t.done:
            nx, ny = t.next_cell
            target += gamma * table[ny, nx].max()
        td = target - table[y, x, t.action]
        table[y, x, t.action] += lr * td
        self.visited[t.goal][y, x] = True
        return td

    def dumps(self) -> str:
        lines = [TAB_HEADER, f"# grid {self.width} {self.height}"]
        for goal, table in self.tables.items():
            ys, xs = np.nonzero(self.visited[goal])
            for x, y in sorted(zip(xs.tolist(), ys.tolist()), key=lambda c: (c[1], c[0])):
                q = " ".join(repr(float(v)) for v in table[y, x])
                lines.append(f"{goal} {x} {y} {q}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "TabularQ":
        lines = text.splitlines()
        if not lines or lines[0].split()[:1] != ["lexnav-tab"]:
            raise nn.CheckpointError("not a tabular checkpoint")
        if lines[0].strip() != TAB_HEADER:
            raise nn.CheckpointError(f"unsupported tabular checkpoint header {lines[0]!r}")
        width = height = None
        entries = []
        for line in lines[1:]:
            if line.startswith("# grid"):
                width, height = (int(v) for v in line.split()[2:4])
            elif line.strip() and not line.startswith("#"):
                parts = line.split()
                if len(parts) != 3 + N_ACTIONS:
                    raise nn.CheckpointError(f"bad tabular line: {line!r}")
                entries.append((parts[0], int(parts[1]), int(parts[2]), [float(v) for v in parts[3:]]))
        if width is None:
            width = 1 + max((e[1] for e in entries), default=0)
            height = 1 + max((e[2] for e in entries), default=0)
        agent = cls(width, height)
        for goal, x, y, q in entries:
            agent._table(goal)[y, x] = q
            agent.visited[goal][y, x] = True
        return agent


class DenseQ(Policy):
    """Online/target network pair over ``position one-hot ++ goal vector``."""

    kind = "dense"

    def __init__(self, width: int, height: int, encoder: GoalEncoder, rng: np.random.Generator,
                 hidden=(64, 64), gamma: float = 0.99, lr: float = 1e-3, sync_every: int = 1000,
                 zero_init: bool = False):
        self.width = width
        self.height = height
        self.encoder = encoder
        self.gamma = gamma
        self.sync_every = sync_every
        sizes = [self.obs_dim + encoder.dimension, *hidden, N_ACTIONS]
        self.online = nn.init_net(sizes, rng, zero=zero_init)
        self.target = self.online.copy()
        self.opt = nn.AdamState.for_net(self.online, lr=lr)
        self.updates = 0

    @property
    def obs_dim(self) -> int:
        return self.width + self.height

    def features(self, cells, goals) -> np.ndarray:
        """Batch of concatenated ``(position one-hot, goal vector)`` rows."""
        n = len(cells)
        xs = np.fromiter((c[0] for c in cells), dtype=np.intp, count=n)
        ys = np.fromiter((c[1] for c in cells), dtype=np.intp, count=n)
        obs = np.zeros((n, self.obs_dim))
        rows = np.arange(n)
        obs[rows, xs] = 1.0
        obs[rows, self.width + ys] = 1.0
        goal_vecs = np.array([self.encoder.encode(g) for g in goals])
        return np.concatenate([obs, goal_vecs], axis=1)

    def input_vector(self, cell, goal: str) -> np.ndarray:
        return self.features([cell], [goal])[0]

    def q_values(self, cell, goal: str) -> np.ndarray:
        return nn.forward(self.online, self.input_vector(cell, goal))

    def sync(self):
        self.target = self.online.copy()

    def loss_and_grads(self, batch):
        """Mean Huber TD loss over ``batch`` and its gradient for the online net."""
        x = self.features([t.cell for t in batch], [t.goal for t in batch])
        x_next = self.features([t.next_cell for t in batch], [t.goal for t in batch])
        actions = np.array([t.action for t in batch])
        rewards = np.array([t.reward for t in batch])
        not_done = 1.0 - np.array([t.done for t in batch], dtype=np.float64)
        next_q = nn.forward(self.target, x_next).max(axis=1)
        targets = rewards + self.gamma * next_q * not_done
        out, trace = nn.forward_trace(self.online, x)
        rows = np.arange(len(batch))
        loss, dloss = nn.huber(out[rows, actions], targets)
        n = len(batch)
        grad_out = np.zeros_like(out)
        grad_out[rows, actions] = dloss / n
        grads = nn.backward(self.online, x, grad_out, trace)
        return float(loss.mean()), grads

    def update(self, batch) -> float:
        loss, grads = self.loss_and_grads(batch)
        nn.adam_step(self.online, grads, self.opt)
        self.updates += 1
        if self.updates % self.sync_every == 0:
            self.sync()
        return loss

    def dumps(self) -> str:
        comments = [f"grid {self.width} {self.height}",
                    f"goal_mode {self.encoder.mode}",
                    f"gamma {self.gamma!r}"]
        if self.encoder.mode == ONEHOT:
            comments.append("vocabulary " + " ".join(self.encoder.vocabulary))
        else:
            comments.append(f"embedding_dim {self.encoder.dimension}")
        return nn.dump_net(self.online, comments)

    @classmethod
    def loads(cls, text: str, store: EmbeddingStore | None = None) -> "DenseQ":
        net, comments = nn.parse_net(text)
        meta = {}
        for c in comments:
            key, _, value = c.partition(" ")
            meta[key] = value
        try:
            width, height = (int(v) for v in meta["grid"].split())
            mode = meta["goal_mode"]
        except KeyError as exc:
            raise nn.CheckpointError(f"checkpoint missing {exc.args[0]!r} metadata") from None
        if mode == ONEHOT:
            encoder = GoalEncoder(ONEHOT, vocabulary=meta["vocabulary"].split())
        else:
            if store is None:
                raise nn.CheckpointError("embedding-mode checkpoint needs an embedding store")
            if store.dimension != int(meta["embedding_dim"]):
                raise nn.CheckpointError("embedding dimension does not match checkpoint")
            encoder = GoalEncoder(EMBEDDING, store=store)
        hidden = tuple(net.layer_sizes[1:-1])
        agent = cls(width, height, encoder, np.random.default_rng(0), hidden=hidden,
                    gamma=float(meta.get("gamma", 0.99)), zero_init=True)
        if agent.online.layer_sizes != net.layer_sizes:
            raise nn.CheckpointError("network shape does not match grid and goal encoding")
        agent.online = net
        agent.target = net.copy()
        agent.opt = nn.AdamState.for_net(net)
        return agent

    @property
    def goals(self) -> tuple:
        if self.encoder.mode == ONEHOT:
            return self.encoder.vocabulary
        return self.encoder.store.words


def q_values(agent: Policy, cell, goal: str) -> np.ndarray:
    return agent.q_values(cell, goal)


def greedy_action(agent: Policy, cell, goal: str, rng: np.random.Generator) -> int:
    return agent.greedy_action(cell, goal, rng)


def tabular_update(agent: TabularQ, transition: Transition, lr: float, gamma: float) -> TabularQ:
    agent.update(transition, lr, gamma)
    return agent


def dense_update(agent: DenseQ, batch) -> float:
    return agent.update(batch)


def save_policy(agent: Policy, sink) -> None:
    text = agent.dumps()
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sink.write(text)


def load_policy(source, store: EmbeddingStore | None = None) -> Policy:
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    elif isinstance(source, io.IOBase) or hasattr(source, "read"):
        text = source.read()
    else:
        text = str(source)
    head = text.split(None, 1)[0] if text.strip() else ""
    if head == "lexnav-tab":
        return TabularQ.loads(text)
    if head == nn.NET_MAGIC:
        return DenseQ.loads(text, store)
    raise nn.CheckpointError("unrecognised policy checkpoint")
