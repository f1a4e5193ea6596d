"""Two-action Tsetlin automata.

An automaton with ``N`` states per action sits in a state in ``[1, 2N]``.
States ``1..N`` select Exclude and ``N+1..2N`` select Include.  A reward
pushes the state away from the centre (more confidence in the current
action), a penalty pushes it towards the centre and eventually across it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Action(enum.IntEnum):
    EXCLUDE = 0
    INCLUDE = 1


class Feedback(enum.IntEnum):
    INACTION = 0
    PENALTY = 1
    REWARD = 2


@dataclass
class TsetlinAutomaton:
    """A single automaton.  Mutated in place by :meth:`reward`/:meth:`penalize`."""

    n_states_per_action: int
    state: int

    def __post_init__(self):
        if self.n_states_per_action < 1:
            raise ValueError("n_states_per_action must be >= 1")
        if not 1 <= self.state <= 2 * self.n_states_per_action:
            raise ValueError(
                f"state {self.state} outside [1, {2 * self.n_states_per_action}]"
            )

    @property
    def action(self) -> Action:
        return Action.EXCLUDE if self.state <= self.n_states_per_action else Action.INCLUDE

    def reward(self) -> TsetlinAutomaton:
        n = self.n_states_per_action
        if self.state <= n:
            if self.state > 1:
                self.state -= 1
        elif self.state < 2 * n:
            self.state += 1
        return self

    def penalize(self) -> TsetlinAutomaton:
        if self.state <= self.n_states_per_action:
            self.state += 1
        else:
            self.state -= 1
        return self

    def apply(self, feedback: Feedback) -> TsetlinAutomaton:
        # Inaction is the identity transition.
        if feedback == Feedback.REWARD:
            return self.reward()
        if feedback == Feedback.PENALTY:
            return self.penalize()
        return self


def new_automaton(n_states_per_action: int, rng: np.random.Generator) -> TsetlinAutomaton:
    """Start at ``N`` or ``N+1`` with equal probability."""
    if n_states_per_action < 1:
        raise ValueError("n_states_per_action must be >= 1")
    return TsetlinAutomaton(n_states_per_action, n_states_per_action + int(rng.integers(0, 2)))


def action(a: TsetlinAutomaton) -> Action:
    return a.action


def reward(a: TsetlinAutomaton) -> TsetlinAutomaton:
    return a.reward()


def penalize(a: TsetlinAutomaton) -> TsetlinAutomaton:
    return a.penalize()


def state_dtype(n_states_per_action: int) -> np.dtype:
    """Smallest unsigned cell that holds ``2N``."""
    if n_states_per_action < 1:
        raise ValueError("n_states_per_action must be >= 1")
    if 2 * n_states_per_action <= np.iinfo(np.uint16).max:
        return np.dtype(np.uint16)
    if 2 * n_states_per_action <= np.iinfo(np.uint32).max:
        return np.dtype(np.uint32)
    raise ValueError("n_states_per_action too large for 32-bit state cells")


def initial_states(shape, n_states_per_action: int, rng: np.random.Generator) -> np.ndarray:
    """Array version of :func:`new_automaton`."""
    dtype = state_dtype(n_states_per_action)
    states = rng.integers(0, 2, size=shape, dtype=np.uint8).astype(dtype)
    states += dtype.type(n_states_per_action)
    return states
