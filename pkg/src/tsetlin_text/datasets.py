"""Benchmark corpora on disk and reproducible train/test splits."""

from __future__ import annotations

import enum
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.model_selection import StratifiedKFold, StratifiedShuffleSplit

from .text import RawCorpus, RawDocument

log = logging.getLogger(__name__)

DATA_DIR_ENV = "TSETLIN_TEXT_DATA"

# 16 newsgroups in four super-categories (~16,000 messages in the 19997 release).
DEFAULT_20NG_GROUPING = {
    "comp.graphics": "computers",
    "comp.os.ms-windows.misc": "computers",
    "comp.sys.ibm.pc.hardware": "computers",
    "comp.sys.mac.hardware": "computers",
    "comp.windows.x": "computers",
    "rec.autos": "recreation",
    "rec.motorcycles": "recreation",
    "rec.sport.baseball": "recreation",
    "rec.sport.hockey": "recreation",
    "sci.crypt": "science",
    "sci.electronics": "science",
    "sci.med": "science",
    "sci.space": "science",
    "talk.politics.guns": "politics",
    "talk.politics.mideast": "politics",
    "talk.politics.misc": "politics",
}


class DatasetError(Exception):
    """A corpus could not be loaded; ``path`` names the offending location."""

    def __init__(self, message: str, path: os.PathLike | str | None = None):
        super().__init__(f"{message}: {path}" if path is not None else message)
        self.path = None if path is None else str(path)


class DatasetKind(str, enum.Enum):
    NEWSGROUPS20 = "20ng"
    IMDB = "imdb"
    LABELED_DIRS = "dirs"


@dataclass
class DatasetSpec:
    kind: DatasetKind
    root_path: Path
    grouping: dict[str, str] | None = None

    def __post_init__(self):
        self.kind = DatasetKind(self.kind)
        self.root_path = Path(self.root_path)
        if not self.root_path.is_dir():
            raise DatasetError("dataset root does not exist", self.root_path)
        if self.kind is DatasetKind.NEWSGROUPS20 and self.grouping is None:
            self.grouping = dict(DEFAULT_20NG_GROUPING)


def _read_text(path: Path, encoding: str) -> str:
    try:
        return path.read_text(encoding=encoding)
    except (OSError, UnicodeDecodeError) as exc:
        raise DatasetError(f"cannot read file ({exc.__class__.__name__})", path) from exc


def _files(directory: Path) -> list[Path]:
    if not directory.is_dir():
        raise DatasetError("missing directory", directory)
    return sorted((p for p in directory.iterdir() if p.is_file()), key=lambda p: p.name)


def _read_labelled(directory: Path, label: str, root: Path, encoding: str) -> list[RawDocument]:
    return [RawDocument(_read_text(p, encoding), label, p.relative_to(root).as_posix())
            for p in _files(directory)]


def load_imdb(spec: DatasetSpec | os.PathLike | str) -> tuple[RawCorpus, RawCorpus]:
    """Read ``train/{neg,pos}`` and ``test/{neg,pos}`` of the IMDb review tree."""
    root = spec.root_path if isinstance(spec, DatasetSpec) else Path(spec)
    labels = ["neg", "pos"]
    splits = []
    for split in ("train", "test"):
        docs = []
        for label in labels:
            docs.extend(_read_labelled(root / split / label, label, root, "utf-8"))
        splits.append(RawCorpus(docs, list(labels)))
    return splits[0], splits[1]


def load_20newsgroups(spec: DatasetSpec | os.PathLike | str,
                      grouping: dict[str, str] | None = None) -> RawCorpus:
    """One directory per newsgroup, one message per file; headers are kept.

    Newsgroups missing from ``grouping`` are skipped and counted in
    ``RawCorpus.skipped``.
    """
    if isinstance(spec, DatasetSpec):
        root, grouping = spec.root_path, grouping or spec.grouping
    else:
        root = Path(spec)
    grouping = dict(DEFAULT_20NG_GROUPING if grouping is None else grouping)
    if not root.is_dir():
        raise DatasetError("dataset root does not exist", root)
    present = {p.name: p for p in root.iterdir() if p.is_dir()}
    absent = sorted(set(grouping) - set(present))
    if absent:
        raise DatasetError(f"grouping names newsgroups not found on disk ({', '.join(absent)})",
                           root)
    docs, skipped = [], 0
    for name in sorted(present):
        if name not in grouping:
            skipped += len(_files(present[name]))
            continue
        docs.extend(_read_labelled(present[name], grouping[name], root, "latin-1"))
    if not docs:
        raise DatasetError("no documents found", root)
    if skipped:
        log.info("skipped %d documents outside the grouping", skipped)
    corpus = RawCorpus(docs, sorted(set(grouping.values())), skipped)
    if corpus.degenerate:
        log.warning("20 Newsgroups grouping yields a single class")
    return corpus


def load_labeled_dirs(spec: DatasetSpec | os.PathLike | str) -> RawCorpus:
    """``root/<label>/<file>``: directory names are the class labels."""
    root = spec.root_path if isinstance(spec, DatasetSpec) else Path(spec)
    if not root.is_dir():
        raise DatasetError("dataset root does not exist", root)
    labels = sorted(p.name for p in root.iterdir() if p.is_dir())
    docs = []
    for label in labels:
        docs.extend(_read_labelled(root / label, label, root, "utf-8"))
    if not docs:
        raise DatasetError("no documents found", root)
    return RawCorpus(docs, labels)


@dataclass(frozen=True)
class SplitPlan:
    kind: str
    fraction: float | None = None
    folds: int | None = None
    repeats: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.kind == "holdout":
            if self.fraction is None or not 0.0 < self.fraction < 1.0:
                raise ValueError("hold-out fraction must lie in (0, 1)")
        elif self.kind == "cv":
            if self.folds is None or self.folds < 2:
                raise ValueError("cross-validation needs folds >= 2")
            if self.repeats < 1:
                raise ValueError("repeats must be >= 1")
        else:
            raise ValueError(f"unknown split kind {self.kind!r}")

    @classmethod
    def holdout(cls, fraction: float, seed: int = 0) -> SplitPlan:
        return cls("holdout", fraction=fraction, seed=seed)

    @classmethod
    def cross_validation(cls, folds: int, repeats: int = 1, seed: int = 0) -> SplitPlan:
        return cls("cv", folds=folds, repeats=repeats, seed=seed)


def _derived_seed(seed: int, repeat: int) -> int:
    return int(np.random.SeedSequence([seed, repeat]).generate_state(1)[0])


def make_splits(labels, plan: SplitPlan) -> list[tuple[np.ndarray, np.ndarray]]:
    """Stratified ``(train_indices, test_indices)`` pairs, sorted within each side."""
    if isinstance(labels, RawCorpus):
        labels = labels.labels
    elif hasattr(labels, "labels"):
        labels = labels.labels
    y = np.asarray(labels)
    n = len(y)
    placeholder = np.zeros(n)
    if plan.kind == "holdout":
        splitter = StratifiedShuffleSplit(n_splits=1, train_size=plan.fraction,
                                          random_state=_derived_seed(plan.seed, 0))
        train, test = next(splitter.split(placeholder, y))
        return [(np.sort(train), np.sort(test))]
    if n < plan.folds:
        raise ValueError(f"{n} documents cannot fill {plan.folds} folds")
    _, counts = np.unique(y, return_counts=True)
    if counts.min() < plan.folds:
        raise ValueError(f"a class has {counts.min()} documents, fewer than {plan.folds} folds")
    pairs = []
    for r in range(plan.repeats):
        kfold = StratifiedKFold(n_splits=plan.folds, shuffle=True,
                                random_state=_derived_seed(plan.seed, r))
        pairs.extend((np.sort(tr), np.sort(te)) for tr, te in kfold.split(placeholder, y))
    return pairs
