"""Macro-averaged classification scores and t-based confidence intervals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats


@dataclass
class MetricsReport:
    class_labels: list[str]
    confusion: np.ndarray  # rows: true class, columns: predicted class
    precision: np.ndarray
    recall: np.ndarray
    f1: np.ndarray
    precision_undefined: np.ndarray
    recall_undefined: np.ndarray

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    @property
    def support(self) -> np.ndarray:
        return self.confusion.sum(axis=1)

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.confusion) / self.total) if self.total else 0.0

    @property
    def macro_precision(self) -> float:
        return float(self.precision.mean())

    @property
    def macro_recall(self) -> float:
        return float(self.recall.mean())

    @property
    def macro_f1(self) -> float:
        return float(self.f1.mean())

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "confusion": self.confusion.tolist(),
            "per_class": [
                {
                    "class": label,
                    "support": int(self.support[i]),
                    "precision": float(self.precision[i]),
                    "recall": float(self.recall[i]),
                    "f1": float(self.f1[i]),
                    "precision_undefined": bool(self.precision_undefined[i]),
                    "recall_undefined": bool(self.recall_undefined[i]),
                }
                for i, label in enumerate(self.class_labels)
            ],
        }

    def format_text(self) -> str:
        d = self.to_dict()
        lines = [
            f"accuracy        {d['accuracy']:.6f}",
            f"macro precision {d['macro_precision']:.6f}",
            f"macro recall    {d['macro_recall']:.6f}",
            f"macro F1        {d['macro_f1']:.6f}",
            "",
            f"{'class':<20} {'support':>8} {'precision':>10} {'recall':>10} {'f1':>10}",
        ]
        for row in d["per_class"]:
            flag = "*" if row["precision_undefined"] or row["recall_undefined"] else " "
            lines.append(f"{row['class']:<20} {row['support']:>8d} {row['precision']:>10.6f} "
                         f"{row['recall']:>10.6f} {row['f1']:>10.6f}{flag}")
        lines.append("")
        lines.append("confusion (rows true, columns predicted)")
        lines.extend(" ".join(f"{v:>7d}" for v in row) for row in d["confusion"])
        return "\n".join(lines) + "\n"


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    undefined = den == 0
    return np.where(undefined, 0.0, num / np.where(undefined, 1, den)), undefined


def macro_metrics(predictions, labels, n_classes: int,
                  class_labels: list[str] | None = None) -> MetricsReport:
    """Per-class precision/recall/F1 and their unweighted means.

    A ratio with a zero denominator is reported as 0 and flagged.  Macro F1 is
    the mean of per-class F1 values.
    """
    pred = np.asarray(predictions, dtype=np.int64)
    true = np.asarray(labels, dtype=np.int64)
    if pred.shape != true.shape:
        raise ValueError("predictions and labels differ in length")
    if pred.size and (min(pred.min(), true.min()) < 0 or max(pred.max(), true.max()) >= n_classes):
        raise ValueError("class ordinal outside [0, n_classes)")
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(confusion, (true, pred), 1)
    tp = np.diag(confusion).astype(np.float64)
    precision, p_undef = _safe_ratio(tp, confusion.sum(axis=0))
    recall, r_undef = _safe_ratio(tp, confusion.sum(axis=1))
    f1, _ = _safe_ratio(2 * precision * recall, precision + recall)
    if class_labels is None:
        class_labels = [str(i) for i in range(n_classes)]
    return MetricsReport(list(class_labels), confusion, precision, recall, f1, p_undef, r_undef)


def confidence_interval(samples, level: float = 0.95) -> tuple[float, float]:
    """``(mean, half_width)`` with half width ``t_{(1+level)/2, n-1} * s / sqrt(n)``."""
    x = np.asarray(samples, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least two samples")
    sd = x.std(ddof=1)
    t = stats.t.ppf(0.5 + level / 2, df=x.size - 1)
    return float(x.mean()), float(t * sd / math.sqrt(x.size))


@dataclass
class RunSummary:
    name: str
    samples: list[float]
    mean: float
    half_width: float

    @classmethod
    def from_samples(cls, name: str, samples, level: float = 0.95) -> RunSummary:
        samples = [float(v) for v in samples]
        if len(samples) < 2:
            return cls(name, samples, samples[0] if samples else float("nan"), float("nan"))
        mean, half = confidence_interval(samples, level)
        return cls(name, samples, mean, half)

    def __str__(self):
        return f"{self.name:<16} {100 * self.mean:6.2f} ± {100 * self.half_width:.2f}"
