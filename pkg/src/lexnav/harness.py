"""Experiment runner: config files, training/transfer loops, metrics and evaluation."""

from __future__ import annotations

import dataclasses
import io
import logging
import os
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import qlearn
from .embedding import EmbeddingStore, default_store, load_embeddings
from .gridworld import MAX_EPISODE_STEPS, MOVES, ApartmentMap, NavigationEnv, load_map
from .qlearn import DenseQ, GoalEncoder, Policy, ReplayBuffer, TabularQ, Transition
from .transfer import (GREEDY, PRIOR, RANDOM, ExplorationSchedule, PriorPolicy,
                       explore_action, select_prior)

log = logging.getLogger(__name__)

CSV_HEADER = ("env_step,episodes,success_rate,mean_return,mean_ep_len,"
              "epsilon,frac_greedy,frac_prior,frac_random")
AGENT_KINDS = ("tabular", "dense-onehot", "dense-embedding")


class ConfigError(ValueError):
    pass


def _words(value: str) -> tuple:
    return tuple(w.strip() for w in value.replace(",", " ").split() if w.strip())


def _ints(value: str) -> tuple:
    return tuple(int(v) for v in _words(value))


def _optional(value: str):
    return None if value.strip().lower() in ("", "none") else value.strip()


@dataclass
class RunConfig:
    map: str = "default"
    goals: tuple = ()
    agent: str = "tabular"
    embedding: str = "default"
    schedule: ExplorationSchedule = field(default_factory=ExplorationSchedule)
    prior_checkpoint: str | None = None
    prior: str = "auto"
    mastered: tuple = ()
    target: str | None = None
    max_env_steps: int = 400_000
    criterion_rate: float = 0.95
    criterion_window: int = 100
    seed: int = 0
    log_every: int = 1000
    gamma: float = 0.99
    tabular_lr: float = 0.1
    dense_lr: float = 1e-3
    batch_size: int = 32
    sync_every: int = 1000
    replay_capacity: int = 50_000
    warmup: int = 1000
    train_every: int = 1
    hidden: tuple = (64, 64)
    distance_scale: float = 1.0
    max_episode_steps: int = MAX_EPISODE_STEPS

    def replace(self, **changes) -> "RunConfig":
        sched = {k[len("schedule_"):]: changes.pop(k) for k in list(changes) if k.startswith("schedule_")}
        cfg = dataclasses.replace(self, **changes)
        if sched:
            cfg.schedule = dataclasses.replace(cfg.schedule, **sched)
        return cfg


# config key -> (RunConfig attribute, parser); "schedule.*" handled separately
_KEYS = {
    "map": ("map", str),
    "goals": ("goals", _words),
    "agent": ("agent", str),
    "embedding": ("embedding", str),
    "transfer.prior_checkpoint": ("prior_checkpoint", _optional),
    "transfer.prior": ("prior", str),
    "transfer.mastered": ("mastered", _words),
    "transfer.target": ("target", _optional),
    "budget.max_env_steps": ("max_env_steps", int),
    "criterion.rate": ("criterion_rate", float),
    "criterion.window": ("criterion_window", int),
    "seed": ("seed", int),
    "log.every": ("log_every", int),
    "learner.gamma": ("gamma", float),
    "learner.lr": ("tabular_lr", float),
    "learner.dense_lr": ("dense_lr", float),
    "learner.batch": ("batch_size", int),
    "learner.sync": ("sync_every", int),
    "learner.replay_capacity": ("replay_capacity", int),
    "learner.warmup": ("warmup", int),
    "learner.train_every": ("train_every", int),
    "learner.hidden": ("hidden", _ints),
    "reward.distance_scale": ("distance_scale", float),
    "env.max_steps": ("max_episode_steps", int),
}
_SCHEDULE_KEYS = {
    "schedule.epsilon_start": ("epsilon_start", float),
    "schedule.epsilon_end": ("epsilon_end", float),
    "schedule.decay_steps": ("decay_steps", int),
    "schedule.alpha": ("alpha", float),
}
_PATH_KEYS = ("map", "embedding", "prior_checkpoint")


def parse_config(text: str, base_dir: str | None = None) -> RunConfig:
    """Parse ``key = value`` lines; relative paths resolve against ``base_dir``."""
    values, sched = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        try:
            if key in _KEYS:
                attr, conv = _KEYS[key]
                values[attr] = conv(value)
            elif key in _SCHEDULE_KEYS:
                attr, conv = _SCHEDULE_KEYS[key]
                sched[attr] = conv(value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {value!r}") from None
    if base_dir is not None:
        for attr in _PATH_KEYS:
            v = values.get(attr)
            if v and v != "default" and not os.path.isabs(v):
                values[attr] = os.path.normpath(os.path.join(base_dir, v))
    try:
        schedule = ExplorationSchedule(**sched)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunConfig(schedule=schedule, **values)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, os.path.dirname(os.path.abspath(path)))


def validate_config(cfg: RunConfig, amap: ApartmentMap, transfer: bool = False):
    if cfg.agent not in AGENT_KINDS:
        raise ConfigError(f"agent must be one of {AGENT_KINDS}, got {cfg.agent!r}")
    goals = (cfg.target,) if transfer else cfg.goals
    if not goals or goals == (None,):
        raise ConfigError("transfer.target is required" if transfer else "goals is empty")
    for g in goals:
        if g not in amap.object_index:
            raise ConfigError(f"goal {g!r} is not an object on the map")
    if transfer:
        if not cfg.prior_checkpoint:
            raise ConfigError("transfer.prior_checkpoint is required")
        if cfg.target in cfg.mastered:
            raise ConfigError("transfer target must not be one of the mastered goals")
    if not 0.0 <= cfg.criterion_rate <= 1.0:
        raise ConfigError("criterion.rate must lie in [0, 1]")
    for name in ("max_env_steps",):
        if getattr(cfg, name) < 0:
            raise ConfigError(f"{name} must be non-negative")
    for name in ("criterion_window", "log_every", "batch_size", "sync_every",
                 "replay_capacity", "train_every", "max_episode_steps"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be positive")


@dataclass(frozen=True)
class EpisodeRecord:
    goal: str
    end_step: int
    length: int
    ret: float
    success: bool
    truncated: bool = False  # cut short by the step budget


@dataclass
class RunMetrics:
    rows: list
    episodes: list
    steps_to_criterion: int | None
    criterion_rate: float
    criterion_window: int
    agent: Policy | None = None
    prior_goal: str | None = None

    @property
    def reached_criterion(self) -> bool:
        return self.steps_to_criterion is not None

    @property
    def env_steps(self) -> int:
        return self.rows[-1][0] if self.rows else 0

    def steps_to_rate(self, rate: float, window: int | None = None):
        """First env step at which the trailing success rate reaches ``rate``."""
        window = window or self.criterion_window
        recent = deque(maxlen=window)
        for ep in self.episodes:
            if ep.truncated:
                continue
            recent.append(ep.success)
            if len(recent) == window and sum(recent) / window >= rate:
                return ep.end_step
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(round(float(v), 10))


def read_csv(path) -> dict:
    """Load a metrics CSV into column arrays."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"{path}: not a metrics CSV")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    data = np.array(rows, dtype=np.float64).reshape(-1, len(CSV_HEADER.split(",")))
    return {name: data[:, i] for i, name in enumerate(CSV_HEADER.split(","))}


class ShortestPathPolicy(Policy):
    """Oracle that always steps down the BFS distance field."""

    def __init__(self, amap: ApartmentMap):
        self.map = amap

    @property
    def goals(self):
        return tuple(self.map.object_index)

    def q_values(self, cell, goal):
        field_ = self.map.distance_field(goal)
        out = np.empty(4)
        for a, (dx, dy) in enumerate(MOVES):
            nxt = (cell[0] + dx, cell[1] + dy)
            if not self.map.passable(nxt):
                nxt = cell
            out[a] = -field_[nxt[1], nxt[0]]
        return out


class RandomPolicy(Policy):
    def q_values(self, cell, goal):
        return np.zeros(4)


def _load_store(cfg: RunConfig) -> EmbeddingStore:
    if cfg.embedding in (None, "", "default"):
        return default_store()
    return load_embeddings(cfg.embedding)


def make_agent(cfg: RunConfig, amap: ApartmentMap, rng: np.random.Generator,
               store: EmbeddingStore | None = None) -> Policy:
    if cfg.agent == "tabular":
        return TabularQ(amap.width, amap.height)
    if cfg.agent == "dense-onehot":
        encoder = GoalEncoder(qlearn.ONEHOT)
    else:
        encoder = GoalEncoder(qlearn.EMBEDDING, store=store if store is not None else _load_store(cfg))
    return DenseQ(amap.width, amap.height, encoder, rng, hidden=cfg.hidden, gamma=cfg.gamma,
                  lr=cfg.dense_lr, sync_every=cfg.sync_every)


def _train(cfg: RunConfig, amap: ApartmentMap, goals, agent: Policy,
           prior: PriorPolicy | None, rngs) -> RunMetrics:
    env_rng, act_rng, goal_rng, replay_rng = rngs
    env = NavigationEnv(amap, env_rng, cfg.distance_scale, cfg.max_episode_steps)
    dense = isinstance(agent, DenseQ)
    buffer = ReplayBuffer(cfg.replay_capacity) if dense else None
    schedule = cfg.schedule
    alpha = schedule.alpha if prior is not None else 0.0

    rows, episodes = [], []
    recent = deque(maxlen=cfg.criterion_window)
    counts = {GREEDY: 0, PRIOR: 0, RANDOM: 0}
    t = 0
    steps_to_criterion = None

    def emit_row():
        window = episodes[-cfg.criterion_window:]
        window = [e for e in window if not e.truncated]
        n = len(window)
        total = sum(counts.values()) or 1
        rows.append((
            t, sum(1 for e in episodes if not e.truncated),
            sum(e.success for e in window) / n if n else 0.0,
            sum(e.ret for e in window) / n if n else 0.0,
            sum(e.length for e in window) / n if n else 0.0,
            schedule.epsilon_at(t),
            counts[GREEDY] / total, counts[PRIOR] / total, counts[RANDOM] / total,
        ))
        for k in counts:
            counts[k] = 0

    while t < cfg.max_env_steps:
        goal = goals[int(goal_rng.integers(len(goals)))]
        state, _ = env.reset(goal)
        ep_return, ep_len = 0.0, 0
        out = None
        while True:
            eps = schedule.epsilon_at(t)
            decision = explore_action(agent, state.position, goal, prior, eps, alpha, act_rng)
            counts[decision.source] += 1
            out = env.step(decision.action)
            t += 1
            ep_len += 1
            ep_return += out.reward
            tr = Transition(state.position, goal, decision.action, out.reward,
                            out.state.position, out.success)
            if dense:
                buffer.push(tr)
                if len(buffer) >= max(cfg.warmup, 1) and t % cfg.train_every == 0:
                    agent.update(buffer.sample(cfg.batch_size, replay_rng))
            else:
                agent.update(tr, cfg.tabular_lr, cfg.gamma)
            state = out.state
            if out.done or t >= cfg.max_env_steps:
                break
            if t % cfg.log_every == 0:
                emit_row()
        truncated = not out.done
        episodes.append(EpisodeRecord(goal, t, ep_len, ep_return, out.success, truncated))
        if not truncated:
            recent.append(out.success)
        reached = (len(recent) == cfg.criterion_window
                   and sum(recent) / cfg.criterion_window >= cfg.criterion_rate)
        if reached:
            steps_to_criterion = t
        if t % cfg.log_every == 0 or reached or t >= cfg.max_env_steps:
            emit_row()
        if reached:
            break

    log.info("run finished at step %d after %d episodes (criterion at %s)",
             t, len(episodes), steps_to_criterion)
    return RunMetrics(rows, episodes, steps_to_criterion, cfg.criterion_rate,
                      cfg.criterion_window, agent, prior.goal if prior else None)


def _rngs(seed: int):
    seq = np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in seq.spawn(5)]


def run_training(cfg: RunConfig, amap: ApartmentMap | None = None,
                 store: EmbeddingStore | None = None) -> RunMetrics:
    amap = amap or load_map(cfg.map)
    validate_config(cfg, amap)
    init_rng, *rngs = _rngs(cfg.seed)
    agent = make_agent(cfg, amap, init_rng, store)
    return _train(cfg, amap, tuple(cfg.goals), agent, None, rngs)


def resolve_prior(cfg: RunConfig, prior_policy: Policy, store: EmbeddingStore | None = None) -> str | None:
    """Pick the prior goal: an explicit word, ``none``, or nearest in word space."""
    choice = (cfg.prior or "auto").strip()
    if choice.lower() == "none":
        return None
    if choice.lower() == "auto":
        mastered = cfg.mastered or tuple(g for g in prior_policy.goals if g != cfg.target)
        store = store if store is not None else _load_store(cfg)
        word, score = select_prior(store, cfg.target, mastered)
        log.info("prior %r selected for %r (cosine %.4f)", word, cfg.target, score)
        return word
    if choice == cfg.target:
        raise ConfigError("prior goal must differ from the target")
    return choice


def run_transfer(cfg: RunConfig, amap: ApartmentMap | None = None,
                 store: EmbeddingStore | None = None, prior_policy: Policy | None = None) -> RunMetrics:
    """Train a fresh agent on ``cfg.target`` using a frozen prior policy for exploration."""
    amap = amap or load_map(cfg.map)
    validate_config(cfg, amap, transfer=True)
    if prior_policy is None:
        if not os.path.exists(cfg.prior_checkpoint):
            raise FileNotFoundError(f"prior checkpoint not found: {cfg.prior_checkpoint}")
        prior_policy = qlearn.load_policy(cfg.prior_checkpoint, store if store is not None else _load_store(cfg))
    prior_goal = resolve_prior(cfg, prior_policy, store)
    prior = PriorPolicy(prior_goal, prior_policy) if prior_goal is not None else None
    init_rng, *rngs = _rngs(cfg.seed)
    agent = make_agent(cfg, amap, init_rng, store)
    return _train(cfg, amap, (cfg.target,), agent, prior, rngs)


def rollout(policy: Policy, amap: ApartmentMap, start, goal: str, rng: np.random.Generator,
            max_steps: int = MAX_EPISODE_STEPS):
    """Greedy episode from ``start``; returns ``(success, length)``."""
    from .gridworld import GridState, step
    state = GridState(tuple(start), goal)
    out = None
    while not state.done:
        out = step(amap, state, policy.greedy_action(state.position, goal, rng), max_steps=max_steps)
        state = out.state
    return out.success, state.steps_taken


def evaluate(policy: Policy, amap: ApartmentMap, goals, n_episodes: int, seed: int = 0,
             max_steps: int = MAX_EPISODE_STEPS):
    """Greedy success rate and mean episode length from random spawns."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be positive")
    goals = tuple(goals)
    if not goals:
        raise ValueError("no goals to evaluate")
    rng = np.random.default_rng(seed)
    successes, lengths = 0, 0
    for _ in range(n_episodes):
        goal = goals[int(rng.integers(len(goals)))]
        start = amap.spawn_cells[int(rng.integers(len(amap.spawn_cells)))]
        ok, n = rollout(policy, amap, start, goal, rng, max_steps)
        successes += ok
        lengths += n
    return successes / n_episodes, lengths / n_episodes


def greedy_lengths(policy: Policy, amap: ApartmentMap, goal: str, seed: int = 0) -> dict:
    """Greedy episode length from every spawn cell (``None`` where it fails)."""
    rng = np.random.default_rng(seed)
    out = {}
    for cell in amap.spawn_cells:
        ok, n = rollout(policy, amap, cell, goal, rng)
        out[cell] = n if ok else None
    return out


def aggregate_runs(runs) -> dict:
    """Mean/min/max success-rate band across runs on the union of logged steps.

    Each curve is a step function that holds its last logged value after the
    run stops and reads 0 before its first row.
    """
    curves = []
    for r in runs:
        if isinstance(r, RunMetrics):
            steps = np.array([row[0] for row in r.rows], dtype=np.float64)
            rate = np.array([row[2] for row in r.rows], dtype=np.float64)
        else:
            steps, rate = np.asarray(r["env_step"], float), np.asarray(r["success_rate"], float)
        curves.append((steps, rate))
    if not curves:
        raise ValueError("no runs to aggregate")
    grid = np.unique(np.concatenate([s for s, _ in curves]))
    stacked = []
    for steps, rate in curves:
        idx = np.searchsorted(steps, grid, side="right") - 1
        vals = np.where(idx >= 0, rate[np.clip(idx, 0, None)] if len(rate) else 0.0, 0.0)
        stacked.append(vals)
    stacked = np.array(stacked)
    return {"env_step": grid, "mean": stacked.mean(axis=0),
            "min": stacked.min(axis=0), "max": stacked.max(axis=0), "n_runs": len(curves)}
