"""Exploration that borrows actions from an already mastered goal.

With exploration rate ``epsilon`` and prior sampling rate ``alpha`` an action
comes from one of three sources:

* greedy w.r.t. the learner, for the new goal    -- probability 1 - epsilon
* greedy w.r.t. the frozen prior policy, queried
  with the mastered goal closest in word space   -- probability epsilon * alpha
* uniformly random                                -- probability epsilon * (1 - alpha)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import EmbeddingStore, nearest_prior
from .qlearn import N_ACTIONS, Policy

GREEDY, PRIOR, RANDOM = "greedy", "prior", "random"
SOURCES = (GREEDY, PRIOR, RANDOM)


@dataclass(frozen=True)
class ExplorationSchedule:
    epsilon_start: float = 1.0
    epsilon_end: float = 0.01
    decay_steps: int = 150_000
    alpha: float = 0.0

    def __post_init__(self):
        for name in ("epsilon_start", "epsilon_end", "alpha"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.epsilon_start < self.epsilon_end:
            raise ValueError("epsilon_start must be >= epsilon_end")
        if self.decay_steps < 1:
            raise ValueError("decay_steps must be positive")

    def epsilon_at(self, t: int) -> float:
        frac = min(t / self.decay_steps, 1.0)
        return self.epsilon_start - (self.epsilon_start - self.epsilon_end) * frac


def epsilon_at(schedule: ExplorationSchedule, t: int) -> float:
    return schedule.epsilon_at(t)


@dataclass(frozen=True)
class PriorPolicy:
    goal: str
    policy: Policy


@dataclass(frozen=True)
class ActionDecision:
    action: int
    source: str


def select_prior(store: EmbeddingStore, target: str, mastered) -> tuple:
    """``(word, cosine)`` of the mastered goal nearest to ``target``."""
    return nearest_prior(store, target, mastered)


def branch_probabilities(epsilon: float, alpha: float) -> tuple:
    """Widths of the greedy/prior/random intervals that partition [0, 1)."""
    greedy_end = 1.0 - epsilon
    prior_end = min(1.0, greedy_end + epsilon * alpha)
    return greedy_end, prior_end - greedy_end, 1.0 - prior_end


def explore_action(agent: Policy, cell, goal: str, prior: PriorPolicy | None,
                   epsilon: float, alpha: float, rng: np.random.Generator) -> ActionDecision:
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if prior is None:
        alpha = 0.0
    u = rng.random()
    greedy_end = 1.0 - epsilon
    if u < greedy_end:
        return ActionDecision(agent.greedy_action(cell, goal, rng), GREEDY)
    if u < min(1.0, greedy_end + epsilon * alpha):
        return ActionDecision(prior.policy.greedy_action(cell, prior.goal, rng), PRIOR)
    return ActionDecision(int(rng.integers(N_ACTIONS)), RANDOM)
