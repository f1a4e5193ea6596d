"""Conjunctive clauses controlled by teams of Tsetlin automata."""

from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from . import _kernels
from .automata import Action, TsetlinAutomaton, initial_states, state_dtype
from .bits import n_words, pack_bits
from .text import BitDocument


class DimensionError(ValueError):
    """Document width does not match the clause/model width."""


class Mode(enum.Enum):
    LEARNING = "learning"
    INFERENCE = "inference"


class Literal(NamedTuple):
    feature_index: int
    negated: bool = False

    def __str__(self):
        return f"NOT x{self.feature_index}" if self.negated else f"x{self.feature_index}"


def as_packed(x, n_features: int) -> np.ndarray:
    """Validate a document against ``n_features`` and return its packed words."""
    bits = x.bits if isinstance(x, BitDocument) else np.asarray(x, dtype=np.uint8)
    if bits.ndim != 1 or bits.shape[0] != n_features:
        raise DimensionError(f"document has {bits.shape[-1] if bits.ndim else 0} bits, "
                             f"model expects {n_features}")
    return pack_bits(bits)


def include_masks(states: np.ndarray, n_states_per_action: int) -> tuple[np.ndarray, np.ndarray]:
    """Packed include masks for plain and negated literals.

    ``states`` may be a single clause row ``(2k,)`` or any stack ``(..., 2k)``.
    """
    included = states > n_states_per_action
    lead = states.shape[:-1]
    k = states.shape[-1] // 2
    plain = pack_bits(included[..., 0::2].reshape(-1, k)).reshape(*lead, n_words(k))
    neg = pack_bits(included[..., 1::2].reshape(-1, k)).reshape(*lead, n_words(k))
    return plain, neg


class Clause:
    """A clause of ``2k`` automata plus a polarity.

    ``states[2j]`` controls ``x_j`` and ``states[2j+1]`` controls ``NOT x_j``.
    A clause handed out by a machine is a view: feedback applied to it
    changes the machine.
    """

    def __init__(self, states: np.ndarray, n_states_per_action: int, polarity: int,
                 plain_mask: np.ndarray | None = None, neg_mask: np.ndarray | None = None):
        if states.ndim != 1 or states.shape[0] % 2:
            raise ValueError("clause needs an even-length 1-d state vector")
        if polarity not in (1, -1):
            raise ValueError("polarity must be +1 or -1")
        self.states = states
        self.n_states_per_action = n_states_per_action
        self.polarity = polarity
        if plain_mask is None or neg_mask is None:
            plain_mask, neg_mask = include_masks(states, n_states_per_action)
        self.plain_mask = plain_mask
        self.neg_mask = neg_mask

    @classmethod
    def new(cls, n_features: int, n_states_per_action: int, polarity: int,
            rng: np.random.Generator) -> Clause:
        return cls(initial_states(2 * n_features, n_states_per_action, rng),
                   n_states_per_action, polarity)

    @classmethod
    def from_literals(cls, n_features: int, literals, n_states_per_action: int = 100,
                      polarity: int = 1) -> Clause:
        """Clause whose automata sit at the centre, with ``literals`` just included."""
        states = np.full(2 * n_features, n_states_per_action,
                         dtype=state_dtype(n_states_per_action))
        for lit in literals:
            lit = Literal(*lit) if not isinstance(lit, Literal) else lit
            states[2 * lit.feature_index + int(lit.negated)] = n_states_per_action + 1
        return cls(states, n_states_per_action, polarity)

    @property
    def n_features(self) -> int:
        return self.states.shape[0] // 2

    @property
    def automata(self) -> list[TsetlinAutomaton]:
        """Copies of the automata, in storage order."""
        return [TsetlinAutomaton(self.n_states_per_action, int(s)) for s in self.states]

    def action(self, position: int) -> Action:
        return Action(int(self.states[position] > self.n_states_per_action))

    def set_state(self, position: int, state: int) -> None:
        if not 1 <= state <= 2 * self.n_states_per_action:
            raise ValueError("state out of range")
        self.states[position] = state
        self.refresh()

    def refresh(self) -> None:
        """Rebuild include masks after writing ``states`` directly."""
        plain, neg = include_masks(self.states, self.n_states_per_action)
        self.plain_mask[:] = plain
        self.neg_mask[:] = neg

    def included_literals(self) -> list[Literal]:
        return included_literals(self)

    def evaluate(self, x, mode: Mode = Mode.INFERENCE) -> int:
        return evaluate_clause(self, x, mode)

    def __repr__(self):
        body = " AND ".join(str(lit) for lit in self.included_literals()) or "(empty)"
        sign = "+" if self.polarity > 0 else "-"
        return f"Clause({sign} {body})"


def included_literals(c: Clause) -> list[Literal]:
    """Included literals by feature index, plain before negated at equal index."""
    positions = np.flatnonzero(c.states > c.n_states_per_action)
    return [Literal(int(p) // 2, bool(p % 2)) for p in positions]


def evaluate_clause(c: Clause, x, mode: Mode = Mode.INFERENCE) -> int:
    xw = as_packed(x, c.n_features)
    return int(_kernels.clause_output(c.plain_mask, c.neg_mask, xw, mode is Mode.LEARNING))
