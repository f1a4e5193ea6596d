"""Learned clauses as readable IF ... THEN rules, and per-document vote breakdowns."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .clause import Clause, as_packed
from .learner import MultiClassTM
from .text import BitDocument, Corpus, TokenizerConfig, Vocabulary, binarize


class Polarity(str, enum.Enum):
    FOR = "for"
    AGAINST = "against"


@dataclass
class Rule:
    class_label: str
    polarity: Polarity
    terms: list[tuple[str, bool]]
    support: int | None = None
    clause_index: int | None = None

    @property
    def empty(self) -> bool:
        return not self.terms

    @property
    def body(self) -> str:
        if self.empty:
            return "(empty)"
        return " AND ".join(f"NOT {t}" if neg else t for t, neg in self.terms)

    def __str__(self):
        return f"IF {self.body} THEN {self.polarity.value.upper()} {self.class_label}"

    def to_dict(self) -> dict:
        return {
            "class": self.class_label,
            "polarity": self.polarity.value,
            "literals": [{"term": t, "negated": neg} for t, neg in self.terms],
            "support": self.support,
        }


def clause_to_rule(c: Clause, vocab: Vocabulary, class_label: str,
                   clause_index: int | None = None) -> Rule:
    if c.n_features != len(vocab):
        raise ValueError("clause and vocabulary sizes differ")
    terms = [(vocab[lit.feature_index], lit.negated) for lit in c.included_literals()]
    polarity = Polarity.FOR if c.polarity > 0 else Polarity.AGAINST
    return Rule(str(class_label), polarity, terms, clause_index=clause_index)


def extract_rules(mtm: MultiClassTM, vocab: Vocabulary,
                  reference: Corpus | None = None) -> dict[str, list[Rule]]:
    """Every clause of every class as a rule, in clause order.

    With a ``reference`` corpus, ``support`` counts the documents on which the
    clause fires at inference (empty clauses never fire).
    """
    counts = None
    if reference is not None:
        counts = _kernels.firing_counts(mtm.plain_mask, mtm.neg_mask,
                                        mtm._packed_batch(reference))
    rules = {}
    for k, (label, tm) in enumerate(zip(mtm.class_labels, mtm.per_class)):
        rules[label] = []
        for j, clause in enumerate(tm.clauses):
            rule = clause_to_rule(clause, vocab, label, j)
            if counts is not None:
                rule.support = int(counts[k, j])
            rules[label].append(rule)
    return rules


def _top(rules: list[Rule], top_n: int | None) -> list[Rule]:
    if top_n is None:
        return rules
    ranked = sorted(rules, key=lambda r: (-(r.support or 0), r.clause_index))
    return ranked[:max(top_n, 0)]


def export_rules(mtm: MultiClassTM, vocab: Vocabulary, reference: Corpus | None = None,
                 fmt: str = "text", top_n: int | None = None) -> str:
    """Render rules as text (one per line) or JSON; ``top_n`` is per class."""
    selected = {label: _top(rs, top_n) for label, rs in extract_rules(mtm, vocab, reference).items()}
    total = sum(len(rs) for rs in selected.values())
    if fmt == "json":
        return json.dumps({
            "classes": mtm.class_labels,
            "n_rules": total,
            "rules": [r.to_dict() for rs in selected.values() for r in rs],
        }, indent=2, ensure_ascii=False)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    lines = [f"# {total} rules over {len(mtm.class_labels)} classes"]
    for rs in selected.values():
        for r in rs:
            line = str(r)
            if r.support is not None:
                line += f"  # support={r.support}"
            lines.append(line)
    return "\n".join(lines) + "\n"


@dataclass
class ClassVotes:
    class_label: str
    vote_sum: int
    fired: list[Rule] = field(default_factory=list)

    @property
    def for_votes(self) -> int:
        return sum(1 for r in self.fired if r.polarity is Polarity.FOR)

    @property
    def against_votes(self) -> int:
        return sum(1 for r in self.fired if r.polarity is Polarity.AGAINST)


@dataclass
class Explanation:
    predicted: str
    classes: list[ClassVotes]

    def format_text(self) -> str:
        lines = [f"predicted: {self.predicted}"]
        for cv in self.classes:
            lines.append(f"{cv.class_label}: vote sum {cv.vote_sum:+d} "
                         f"({cv.for_votes} for, {cv.against_votes} against)")
            lines.extend(f"  {r}" for r in cv.fired)
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "predicted": self.predicted,
            "classes": [{"class": cv.class_label, "vote_sum": cv.vote_sum,
                         "fired": [r.to_dict() for r in cv.fired]} for cv in self.classes],
        }


def explain_prediction(mtm: MultiClassTM, vocab: Vocabulary, text,
                       cfg: TokenizerConfig = TokenizerConfig()) -> Explanation:
    """List the clauses that fire on ``text`` (a string or a BitDocument)."""
    doc = text if isinstance(text, BitDocument) else binarize(text, vocab, cfg)
    xw = as_packed(doc, mtm.n_features)
    classes = []
    for label, tm in zip(mtm.class_labels, mtm.per_class):
        outputs = _kernels.clause_outputs(tm.plain_mask, tm.neg_mask, xw, False)
        fired = [clause_to_rule(tm.clause(j), vocab, label, j)
                 for j in np.flatnonzero(outputs)]
        total = sum(1 if r.polarity is Polarity.FOR else -1 for r in fired)
        classes.append(ClassVotes(label, total, fired))
    best = max(range(len(classes)), key=lambda k: (classes[k].vote_sum, -k))
    return Explanation(mtm.class_labels[best], classes)
