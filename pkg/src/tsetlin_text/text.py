"""From raw text to term-presence bit vectors.

Tokenization rules are fixed and portable: optional lowercasing, Unicode
punctuation mapped to spaces, whitespace split, then contiguous word n-grams
joined with ``_``.  A document becomes a k-bit vector where bit ``j`` says
whether vocabulary term ``j`` occurs in it at least once.
"""

from __future__ import annotations

import functools
import string
import sys
import unicodedata
import warnings
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import sparse

from .bits import pack_bits


class FeatureSelectionWarning(UserWarning):
    """``top_k`` asked for more terms than the vocabulary holds."""


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    strip_punctuation: bool = True
    ngram_sizes: tuple[int, ...] = (1,)
    min_document_frequency: int = 1

    def __post_init__(self):
        sizes = tuple(sorted(set(int(n) for n in self.ngram_sizes)))
        if not sizes:
            raise ValueError("ngram_sizes must not be empty")
        if sizes[0] < 1:
            raise ValueError("n-gram sizes must be >= 1")
        if self.min_document_frequency < 1:
            raise ValueError("min_document_frequency must be >= 1")
        object.__setattr__(self, "ngram_sizes", sizes)

    def to_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "strip_punctuation": self.strip_punctuation,
            "ngram_sizes": list(self.ngram_sizes),
            "min_document_frequency": self.min_document_frequency,
        }

    @classmethod
    def from_dict(cls, d: dict) -> TokenizerConfig:
        return cls(
            lowercase=bool(d["lowercase"]),
            strip_punctuation=bool(d["strip_punctuation"]),
            ngram_sizes=tuple(d["ngram_sizes"]),
            min_document_frequency=int(d["min_document_frequency"]),
        )


class RawDocument(NamedTuple):
    text: str
    label: str
    source: str = ""


@dataclass
class RawCorpus:
    """Labelled texts before binarization."""

    documents: list[RawDocument]
    class_labels: list[str]
    skipped: int = 0

    def __len__(self):
        return len(self.documents)

    def __iter__(self):
        return iter(self.documents)

    def __getitem__(self, i):
        return self.documents[i]

    @property
    def degenerate(self) -> bool:
        return len(self.class_labels) < 2

    def subset(self, indices) -> RawCorpus:
        return RawCorpus([self.documents[i] for i in indices], list(self.class_labels))

    @property
    def labels(self) -> list[str]:
        return [d.label for d in self.documents]


@functools.lru_cache(maxsize=1)
def _punctuation_table() -> dict[int, str]:
    # Unicode P* categories plus ASCII symbols such as <, >, $ and |.
    table = {
        cp: " "
        for cp in range(sys.maxunicode + 1)
        if unicodedata.category(chr(cp)).startswith("P")
    }
    table.update((ord(ch), " ") for ch in string.punctuation)
    return table


def tokenize(text: str, cfg: TokenizerConfig = TokenizerConfig()) -> list[str]:
    if cfg.lowercase:
        text = text.lower()
    if cfg.strip_punctuation:
        text = text.translate(_punctuation_table())
    words = text.split()
    terms = []
    for n in cfg.ngram_sizes:
        if n == 1:
            terms.extend(words)
        else:
            terms.extend("_".join(words[i:i + n]) for i in range(len(words) - n + 1))
    return terms


class Vocabulary:
    """Ordered term list; position ``j`` is propositional variable ``x_j``."""

    def __init__(self, terms: Iterable[str]):
        self.terms = tuple(terms)
        self.index = {t: i for i, t in enumerate(self.terms)}
        if len(self.index) != len(self.terms):
            raise ValueError("duplicate terms in vocabulary")

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __contains__(self, term):
        return term in self.index

    def __getitem__(self, j: int) -> str:
        return self.terms[j]

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.terms == other.terms

    def __repr__(self):
        return f"Vocabulary({len(self)} terms)"


@dataclass
class BitDocument:
    bits: np.ndarray
    label: int | None = None

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.uint8)
        if self.bits.ndim != 1:
            raise ValueError("BitDocument bits must be one-dimensional")
        if np.any(self.bits > 1):
            raise ValueError("BitDocument bits must be 0 or 1")

    def __len__(self):
        return self.bits.shape[0]

    @property
    def packed(self) -> np.ndarray:
        return pack_bits(self.bits)


@dataclass
class Corpus:
    """Binarized documents, stored as one ``(n, k)`` uint8 matrix."""

    bits: np.ndarray
    labels: np.ndarray
    class_labels: list[str]
    provenance: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.bits.ndim != 2:
            raise ValueError("Corpus bits must be a 2-d matrix")
        if self.labels.shape != (self.bits.shape[0],):
            raise ValueError("one label per document required")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= len(self.class_labels)):
            raise ValueError("label ordinal outside the class set")
        if not self.provenance:
            self.provenance = [""] * len(self.labels)
        self._packed = None

    def __len__(self):
        return self.bits.shape[0]

    def __getitem__(self, i) -> BitDocument:
        return BitDocument(self.bits[i], int(self.labels[i]))

    @property
    def n_features(self) -> int:
        return self.bits.shape[1]

    @property
    def documents(self) -> list[BitDocument]:
        return [self[i] for i in range(len(self))]

    @property
    def packed(self) -> np.ndarray:
        if self._packed is None:
            self._packed = pack_bits(self.bits) if len(self) else np.zeros((0, 0), np.uint64)
        return self._packed

    def subset(self, indices) -> Corpus:
        indices = np.asarray(indices, dtype=np.int64)
        return Corpus(self.bits[indices], self.labels[indices], list(self.class_labels),
                      [self.provenance[i] for i in indices])


def _items(raw_corpus) -> list:
    items = list(raw_corpus)
    if not items:
        raise ValueError("corpus is empty")
    return items


def term_sets(texts: Iterable[str], cfg: TokenizerConfig) -> list[set[str]]:
    return [set(tokenize(t, cfg)) for t in texts]


def _vocabulary_from_sets(sets: Sequence[set[str]], min_df: int) -> Vocabulary:
    df = Counter()
    for s in sets:
        df.update(s)
    kept = [(t, n) for t, n in df.items() if n >= min_df]
    kept.sort(key=lambda tn: (-tn[1], tn[0]))
    return Vocabulary(t for t, _ in kept)


def build_vocabulary(raw_corpus, cfg: TokenizerConfig = TokenizerConfig()) -> Vocabulary:
    """Terms with document frequency >= ``min_document_frequency``.

    Ordered by descending document frequency, ties broken lexicographically.
    """
    items = _items(raw_corpus)
    return _vocabulary_from_sets(term_sets((it[0] for it in items), cfg),
                                 cfg.min_document_frequency)


def binarize(text: str, vocab: Vocabulary, cfg: TokenizerConfig = TokenizerConfig(),
             label: int | None = None) -> BitDocument:
    bits = np.zeros(len(vocab), dtype=np.uint8)
    for term in tokenize(text, cfg):
        j = vocab.index.get(term)
        if j is not None:
            bits[j] = 1
    return BitDocument(bits, label)


def _presence_matrix(sets: Sequence[set[str]], vocab: Vocabulary) -> sparse.csr_matrix:
    rows, cols = [], []
    for i, s in enumerate(sets):
        for term in s:
            j = vocab.index.get(term)
            if j is not None:
                rows.append(i)
                cols.append(j)
    data = np.ones(len(rows), dtype=np.uint8)
    return sparse.csr_matrix((data, (rows, cols)), shape=(len(sets), len(vocab)), dtype=np.uint8)


def _label_ordinals(labels: Sequence, class_labels: Sequence[str]) -> np.ndarray:
    lookup = {c: i for i, c in enumerate(class_labels)}
    try:
        return np.array([lookup[lab] for lab in labels], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} outside the class set") from None


def binarize_corpus(raw_corpus, vocab: Vocabulary, cfg: TokenizerConfig = TokenizerConfig(),
                    class_labels: Sequence[str] | None = None) -> Corpus:
    items = list(raw_corpus)
    if class_labels is None:
        class_labels = getattr(raw_corpus, "class_labels", None) or sorted({it[1] for it in items})
    sets = term_sets((it[0] for it in items), cfg)
    bits = _presence_matrix(sets, vocab).toarray()
    labels = _label_ordinals([it[1] for it in items], class_labels)
    provenance = [it[2] if len(it) > 2 else "" for it in items]
    return Corpus(bits.reshape(len(items), len(vocab)), labels, list(class_labels), provenance)


def _entropy(counts: np.ndarray) -> np.ndarray:
    """Base-2 entropy along the last axis of a count array; empty rows give 0."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(total > 0, counts / total, 0.0)
        terms = np.where(p > 0, -p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return terms.sum(axis=-1)


def information_gain_from_counts(present: np.ndarray, class_totals: np.ndarray) -> np.ndarray:
    """IG for every feature given per-class counts of documents containing it.

    ``present`` is ``(k, C)``: documents of class ``c`` where feature is 1.
    ``class_totals`` is ``(C,)``.
    """
    present = np.asarray(present, dtype=np.float64)
    class_totals = np.asarray(class_totals, dtype=np.float64)
    n = class_totals.sum()
    absent = class_totals[None, :] - present
    n1 = present.sum(axis=1)
    n0 = n - n1
    conditional = (n1 * _entropy(present) + n0 * _entropy(absent)) / n
    return np.maximum(_entropy(class_totals) - conditional, 0.0)


def information_gain(feature_bits, labels) -> float:
    """H(Y) - H(Y | X) in bits for one binary feature."""
    x = np.asarray(feature_bits, dtype=np.int64)
    y = np.asarray(labels)
    if x.shape != y.shape:
        raise ValueError("feature and label lengths differ")
    if x.size == 0:
        raise ValueError("need at least one example")
    _, y = np.unique(y, return_inverse=True)
    totals = np.bincount(y)
    present = np.bincount(y[x == 1], minlength=totals.size)
    return float(information_gain_from_counts(present[None, :], totals)[0])


def select_features(raw_corpus, cfg: TokenizerConfig, top_k: int) -> Vocabulary:
    """Keep the ``top_k`` terms with the highest information gain.

    Pass only the training split: every statistic is computed from
    ``raw_corpus``.  Ties keep the base vocabulary's order.  The returned
    vocabulary is ordered by rank.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    items = _items(raw_corpus)
    sets = term_sets((it[0] for it in items), cfg)
    vocab = _vocabulary_from_sets(sets, cfg.min_document_frequency)
    return _select_from_sets(sets, [it[1] for it in items], vocab, top_k)


def _select_from_sets(sets, labels, vocab: Vocabulary, top_k: int) -> Vocabulary:
    if top_k >= len(vocab):
        if top_k > len(vocab):
            warnings.warn(f"top_k={top_k} exceeds vocabulary size {len(vocab)}; "
                          "keeping every term", FeatureSelectionWarning, stacklevel=3)
        return vocab
    _, y = np.unique(np.asarray(labels, dtype=object).astype(str), return_inverse=True)
    presence = _presence_matrix(sets, vocab)
    onehot = sparse.csr_matrix((np.ones(len(y)), (np.arange(len(y)), y)))
    present = (presence.T.astype(np.float64) @ onehot).toarray()
    scores = information_gain_from_counts(present, np.bincount(y))
    order = np.argsort(-scores, kind="stable")[:top_k]
    return Vocabulary(vocab.terms[j] for j in order)
