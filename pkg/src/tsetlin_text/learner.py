"""Vote summation, classification and the Type I / Type II feedback game."""

from __future__ import annotations

import csv
import enum
import time
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .automata import initial_states
from .bits import pack_bits
from .clause import Clause, DimensionError, Mode, as_packed, include_masks
from .text import BitDocument, Corpus

# SeedSequence tags separating the initialisation stream from training streams.
_INIT_TAG = 0x1A17
_EPOCH_TAG = 0xE90C


class FeedbackType(enum.IntEnum):
    TYPE_I = _kernels.TYPE_I
    TYPE_II = _kernels.TYPE_II


@dataclass(frozen=True)
class HyperParams:
    """``n_clauses`` is per class and split evenly between the two polarities."""

    n_clauses: int
    n_states: int
    s: float
    threshold: int
    epochs: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_clauses < 2 or self.n_clauses % 2:
            raise ValueError("n_clauses must be a positive even number")
        if self.n_states < 1:
            raise ValueError("n_states must be >= 1")
        if not self.s >= 1.0:
            raise ValueError("s must be >= 1")
        if self.threshold < 1 or int(self.threshold) != self.threshold:
            raise ValueError("threshold must be a positive integer")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> HyperParams:
        return cls(int(d["n_clauses"]), int(d["n_states"]), float(d["s"]),
                   int(d["threshold"]), int(d["epochs"]), int(d["seed"]))


def clause_polarities(n_clauses: int) -> np.ndarray:
    """+1 for the 1st, 3rd, 5th... clause, -1 for the 2nd, 4th..."""
    return np.where(np.arange(n_clauses) % 2 == 0, 1, -1).astype(np.int64)


def _example_seed(rng: np.random.Generator) -> np.uint64:
    return rng.integers(0, 2**64, dtype=np.uint64)


def feedback_activation_probability(f: int, threshold: int, kind: FeedbackType) -> float:
    """Chance that a clause joins the feedback round.

    Type I: ``(T - clamp(f, -T, T)) / 2T``;  Type II: ``(T + clamp(f, -T, T)) / 2T``.
    """
    f = max(-threshold, min(threshold, f))
    if FeedbackType(kind) is FeedbackType.TYPE_I:
        return (threshold - f) / (2 * threshold)
    return (threshold + f) / (2 * threshold)


def type_i_feedback(c: Clause, x, s: float, rng: np.random.Generator) -> Clause:
    """Apply the Type I table to every automaton of ``c`` (in place)."""
    if not s >= 1.0:
        raise ValueError("s must be >= 1")
    xw = as_packed(x, c.n_features)
    out = _kernels.clause_output(c.plain_mask, c.neg_mask, xw, True)
    if _kernels.feedback_clause(c.states, c.plain_mask, c.neg_mask, xw, out, _kernels.TYPE_I,
                                1.0 / s, c.n_states_per_action, _example_seed(rng)):
        raise AssertionError(_kernels._UNREACHABLE)
    return c


def type_ii_feedback(c: Clause, x, rng: np.random.Generator | None = None) -> Clause:
    """Apply the Type II table (deterministic: every cell is 0 or 1)."""
    xw = as_packed(x, c.n_features)
    out = _kernels.clause_output(c.plain_mask, c.neg_mask, xw, True)
    _kernels.feedback_clause(c.states, c.plain_mask, c.neg_mask, xw, out, _kernels.TYPE_II,
                             1.0, c.n_states_per_action, np.uint64(0))
    return c


class TsetlinMachine:
    """``m`` clauses over ``k`` features deciding one binary target."""

    def __init__(self, n_features: int, params: HyperParams,
                 rng: np.random.Generator | None = None, *, _arrays=None):
        if n_features < 1:
            raise ValueError("n_features must be >= 1")
        self.n_features = n_features
        self.params = params
        self.polarity = clause_polarities(params.n_clauses)
        if _arrays is not None:
            self.states, self.plain_mask, self.neg_mask = _arrays
        else:
            if rng is None:
                rng = np.random.default_rng(np.random.SeedSequence([params.seed, _INIT_TAG]))
            self.states = initial_states((params.n_clauses, 2 * n_features), params.n_states, rng)
            self.plain_mask, self.neg_mask = include_masks(self.states, params.n_states)

    @property
    def n_clauses(self) -> int:
        return self.params.n_clauses

    def clause(self, j: int) -> Clause:
        return Clause(self.states[j], self.params.n_states, int(self.polarity[j]),
                      self.plain_mask[j], self.neg_mask[j])

    @property
    def clauses(self) -> list[Clause]:
        return [self.clause(j) for j in range(self.n_clauses)]

    def refresh(self) -> None:
        """Rebuild include masks after writing ``states`` directly."""
        self.plain_mask[:], self.neg_mask[:] = include_masks(self.states, self.params.n_states)

    def clause_outputs(self, x, mode: Mode = Mode.INFERENCE) -> np.ndarray:
        xw = as_packed(x, self.n_features)
        return _kernels.clause_outputs(self.plain_mask, self.neg_mask, xw, mode is Mode.LEARNING)

    def vote_sum(self, x, mode: Mode = Mode.INFERENCE) -> int:
        return int(self.clause_outputs(x, mode).astype(np.int64) @ self.polarity)

    def classify(self, x) -> int:
        return int(self.vote_sum(x, Mode.INFERENCE) > 0)

    def train_example(self, x, y: int, rng: np.random.Generator,
                      parallel: bool = False) -> np.ndarray:
        """Play one round on ``(x, y)``; returns which clauses received feedback."""
        if y not in (0, 1):
            raise ValueError("y must be 0 or 1")
        xw = as_packed(x, self.n_features)
        activated = np.zeros(self.n_clauses, dtype=np.uint8)
        step = _kernels.train_machine_parallel if parallel else _kernels.train_machine
        p = self.params
        step(self.states, self.plain_mask, self.neg_mask, self.polarity, xw, int(y),
             int(p.threshold), 1.0 / p.s, int(p.n_states), _example_seed(rng), 0, activated)
        return activated.astype(bool)


def vote_sum(tm: TsetlinMachine, x, mode: Mode = Mode.INFERENCE) -> int:
    return tm.vote_sum(x, mode)


def classify(tm: TsetlinMachine, x) -> int:
    return tm.classify(x)


def train_example(tm: TsetlinMachine, x, y: int, rng: np.random.Generator) -> np.ndarray:
    return tm.train_example(x, y, rng)


@dataclass
class EpochRecord:
    epoch: int
    train_accuracy: float | None
    test_accuracy: float | None
    activations: list[int]
    seconds: float


@dataclass
class TrainingHistory:
    records: list[EpochRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def final(self) -> EpochRecord | None:
        return self.records[-1] if self.records else None

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "train_acc", "test_acc", "seconds"])
            for r in self.records:
                w.writerow([r.epoch,
                            "" if r.train_accuracy is None else f"{r.train_accuracy:.6f}",
                            "" if r.test_accuracy is None else f"{r.test_accuracy:.6f}",
                            f"{r.seconds:.3f}"])


class MultiClassTM:
    """One clause pool per class; prediction is the argmax of class vote sums."""

    def __init__(self, n_features: int, class_labels, params: HyperParams):
        class_labels = [str(c) for c in class_labels]
        if not class_labels:
            raise ValueError("need at least one class")
        if len(set(class_labels)) != len(class_labels):
            raise ValueError("duplicate class labels")
        if n_features < 1:
            raise ValueError("n_features must be >= 1")
        self.n_features = n_features
        self.class_labels = class_labels
        self.params = params
        self.polarity = clause_polarities(params.n_clauses)
        self.epochs_trained = 0
        rng = np.random.default_rng(np.random.SeedSequence([params.seed, _INIT_TAG]))
        self.states = initial_states((len(class_labels), params.n_clauses, 2 * n_features),
                                     params.n_states, rng)
        self.plain_mask, self.neg_mask = include_masks(self.states, params.n_states)

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    @property
    def per_class(self) -> list[TsetlinMachine]:
        return [TsetlinMachine(self.n_features, self.params,
                               _arrays=(self.states[c], self.plain_mask[c], self.neg_mask[c]))
                for c in range(self.n_classes)]

    def refresh(self) -> None:
        self.plain_mask[:], self.neg_mask[:] = include_masks(self.states, self.params.n_states)

    def class_ordinal(self, label) -> int:
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            if 0 <= label < self.n_classes:
                return int(label)
        elif str(label) in self.class_labels:
            return self.class_labels.index(str(label))
        raise ValueError(f"unknown class label {label!r}")

    def _packed_batch(self, X) -> np.ndarray:
        if isinstance(X, Corpus):
            if X.n_features != self.n_features:
                raise DimensionError(f"corpus has {X.n_features} features, "
                                     f"model expects {self.n_features}")
            return X.packed
        X = np.asarray(X, dtype=np.uint8)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise DimensionError(f"expected (n, {self.n_features}) bit matrix")
        return pack_bits(X)

    def class_sums(self, X) -> np.ndarray:
        """Inference vote sums for a batch, shape ``(n_docs, n_classes)``."""
        return _kernels.class_sums(self.plain_mask, self.neg_mask, self.polarity,
                                   self._packed_batch(X))

    def vote_sums(self, x) -> np.ndarray:
        xw = as_packed(x, self.n_features)
        return _kernels.class_sums(self.plain_mask, self.neg_mask, self.polarity, xw[None, :])[0]

    def predict(self, X) -> np.ndarray:
        """Class ordinals; ties go to the lowest ordinal."""
        return np.argmax(self.class_sums(X), axis=1)

    def classify(self, x) -> str:
        return self.class_labels[int(np.argmax(self.vote_sums(x)))]

    def accuracy(self, corpus: Corpus) -> float:
        return float(np.mean(self.predict(corpus) == corpus.labels))

    def train_example(self, x, label, rng: np.random.Generator) -> tuple[int, int | None]:
        """Train the target class with y=1 and one random other class with y=0.

        Returns ``(target, negative)`` ordinals; ``negative`` is None with one class.
        """
        target = self.class_ordinal(label)
        xw = as_packed(x, self.n_features)
        p = self.params
        scratch = np.zeros(p.n_clauses, dtype=np.uint8)
        negative = None
        if self.n_classes > 1:
            negative = int(rng.integers(0, self.n_classes - 1))
            negative += negative >= target
        seed = _example_seed(rng)
        for c, y in ((target, 1), (negative, 0)):
            if c is None:
                continue
            _kernels.train_machine(self.states[c], self.plain_mask[c], self.neg_mask[c],
                                   self.polarity, xw, y, int(p.threshold), 1.0 / p.s,
                                   int(p.n_states), seed, c, scratch)
        return target, negative

    def _check_corpus(self, corpus: Corpus) -> None:
        if corpus.n_features != self.n_features:
            raise DimensionError(f"corpus has {corpus.n_features} features, "
                                 f"model expects {self.n_features}")
        if list(corpus.class_labels) != self.class_labels:
            raise ValueError(f"corpus classes {corpus.class_labels} differ from "
                             f"model classes {self.class_labels}")

    def fit(self, train: Corpus, eval_corpus: Corpus | None = None, epochs: int | None = None,
            *, parallel: bool = False, record_train_accuracy: bool = True,
            on_epoch: Callable[[EpochRecord], None] | None = None) -> TrainingHistory:
        """Run ``epochs`` passes (default ``params.epochs``) over ``train``.

        Each epoch reshuffles with a generator derived from ``(seed, epoch)``,
        so a resumed model continues the same sequence it would have run in one go.
        """
        if len(train) == 0:
            raise ValueError("training corpus is empty")
        self._check_corpus(train)
        if eval_corpus is not None:
            self._check_corpus(eval_corpus)
        epochs = self.params.epochs if epochs is None else epochs
        p = self.params
        history = TrainingHistory()
        Xw = train.packed
        labels = train.labels
        n = len(train)
        step = _kernels.fit_epoch_parallel if parallel else _kernels.fit_epoch
        for _ in range(epochs):
            start = time.perf_counter()
            gen = np.random.default_rng(
                np.random.SeedSequence([p.seed, _EPOCH_TAG, self.epochs_trained]))
            order = gen.permutation(n)
            negatives = gen.integers(0, max(self.n_classes - 1, 1), size=n)
            negatives += negatives >= labels[order]
            seeds = gen.integers(0, 2**64, size=n, dtype=np.uint64)
            activations = np.zeros(self.n_classes, dtype=np.int64)
            step(self.states, self.plain_mask, self.neg_mask, self.polarity, Xw, labels,
                 order, negatives, seeds, int(p.threshold), 1.0 / p.s, int(p.n_states),
                 activations)
            self.epochs_trained += 1
            elapsed = time.perf_counter() - start
            record = EpochRecord(
                epoch=self.epochs_trained,
                train_accuracy=self.accuracy(train) if record_train_accuracy else None,
                test_accuracy=self.accuracy(eval_corpus) if eval_corpus is not None else None,
                activations=activations.tolist(),
                seconds=elapsed,
            )
            history.records.append(record)
            if on_epoch is not None:
                on_epoch(record)
        return history


def classify_multiclass(mtm: MultiClassTM, x) -> str:
    return mtm.classify(x)


def train_example_multiclass(mtm: MultiClassTM, x, label, rng: np.random.Generator):
    return mtm.train_example(x, label, rng)


def fit(mtm: MultiClassTM, train: Corpus, eval_each_epoch: Corpus | None = None,
        **kwargs) -> TrainingHistory:
    return mtm.fit(train, eval_each_epoch, **kwargs)


__all__ = [
    "BitDocument", "EpochRecord", "FeedbackType", "HyperParams", "MultiClassTM",
    "TrainingHistory", "TsetlinMachine", "classify", "classify_multiclass",
    "feedback_activation_probability", "fit", "train_example", "train_example_multiclass",
    "type_i_feedback", "type_ii_feedback", "vote_sum",
]
