"""Command-line driver: train, eval, cv, explain, bench.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .clause import DimensionError
from .datasets import (DATA_DIR_ENV, DatasetError, DatasetKind, SplitPlan, load_20newsgroups,
                       load_imdb, load_labeled_dirs, make_splits)
from .explain import explain_prediction, export_rules
from .learner import HyperParams, MultiClassTM
from .metrics import RunSummary, macro_metrics
from .modelfile import ModelFileError, load_model, save_model
from .text import (Corpus, RawCorpus, TokenizerConfig, _select_from_sets,
                   _vocabulary_from_sets, binarize_corpus, term_sets)

log = logging.getLogger("tsetlin_text")

PROG = "tsetlin-text"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# --------------------------------------------------------------------------- data


def _tokenizer(args) -> TokenizerConfig:
    min_df = args.min_df
    if min_df is None:
        min_df = 2 if args.dataset in ("imdb", "20ng") else 1
    try:
        sizes = tuple(int(v) for v in str(args.ngrams).split(",") if v.strip())
        return TokenizerConfig(lowercase=not args.no_lowercase,
                               strip_punctuation=not args.keep_punctuation,
                               ngram_sizes=sizes, min_document_frequency=min_df)
    except ValueError as exc:
        raise UsageError(f"bad tokenizer option: {exc}") from None


def _data_dir(args) -> Path:
    d = args.data_dir or os.environ.get(DATA_DIR_ENV)
    if not d:
        raise UsageError(f"--data-dir is required (or set {DATA_DIR_ENV})")
    return Path(d)


def _grouping(args):
    if getattr(args, "grouping", None) is None:
        return None
    with open(args.grouping, encoding="utf-8") as fh:
        return json.load(fh)


def _load_full(args) -> RawCorpus:
    kind = DatasetKind(args.dataset)
    root = _data_dir(args)
    if kind is DatasetKind.NEWSGROUPS20:
        return load_20newsgroups(root, _grouping(args))
    if kind is DatasetKind.LABELED_DIRS:
        return load_labeled_dirs(root)
    train, test = load_imdb(root)
    return RawCorpus(train.documents + test.documents, train.class_labels)


def _train_test(args, split_info: dict | None = None) -> tuple[RawCorpus, RawCorpus, dict]:
    """The official IMDb split, or a seeded stratified hold-out for the others."""
    if args.dataset == "imdb":
        train, test = load_imdb(_data_dir(args))
        return train, test, {"kind": "official"}
    corpus = _load_full(args)
    info = split_info or {"kind": "holdout", "fraction": args.train_fraction,
                          "seed": args.split_seed if args.split_seed is not None else args.seed}
    plan = SplitPlan.holdout(info["fraction"], info["seed"])
    tr, te = make_splits(corpus, plan)[0]
    return corpus.subset(tr), corpus.subset(te), info


def _prepare(train_raw: RawCorpus, test_raw: RawCorpus, cfg: TokenizerConfig, top_k: int | None):
    sets = term_sets((d.text for d in train_raw), cfg)
    vocab = _vocabulary_from_sets(sets, cfg.min_document_frequency)
    if top_k:
        vocab = _select_from_sets(sets, train_raw.labels, vocab, top_k)
    if len(vocab) == 0:
        raise ValueError("vocabulary is empty; lower --min-df")
    labels = train_raw.class_labels
    return (vocab, binarize_corpus(train_raw, vocab, cfg, labels),
            binarize_corpus(test_raw, vocab, cfg, labels))


def _params(args) -> HyperParams:
    if args.features is not None and args.features < 1:
        raise UsageError("--features must be >= 1")
    try:
        return HyperParams(n_clauses=args.clauses, n_states=args.states, s=args.s,
                           threshold=args.threshold, epochs=args.epochs, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ----------------------------------------------------------------------- commands


def cmd_train(args) -> int:
    cfg = _tokenizer(args)
    params = _params(args)
    train_raw, test_raw, split = _train_test(args)
    vocab, train, test = _prepare(train_raw, test_raw, cfg, args.features)
    log.info("%d train / %d test documents, %d features", len(train), len(test), len(vocab))
    mtm = MultiClassTM(len(vocab), train.class_labels, params)

    def report(rec):
        log.info("epoch %d  train %.4f  test %.4f  (%.1fs)", rec.epoch,
                 rec.train_accuracy or 0.0, rec.test_accuracy or 0.0, rec.seconds)

    history = mtm.fit(train, test, parallel=args.parallel,
                      record_train_accuracy=not args.skip_train_accuracy, on_epoch=report)
    extra = {"dataset": args.dataset, "split": split, "features": args.features or 0}
    save_model(mtm, vocab, cfg, args.out, extra)
    history_path = args.history or f"{args.out}.history.csv"
    history.write_csv(history_path)
    final = history.final
    if final is not None:
        print(f"final epoch {final.epoch}: test accuracy {final.test_accuracy:.4f}")
    print(f"model written to {args.out}; history to {history_path}")
    return 0


def cmd_eval(args) -> int:
    loaded = load_model(args.model)
    meta = loaded.metadata
    if args.dataset is None:
        args.dataset = meta.get("dataset")
    if args.dataset is None:
        raise UsageError("--dataset is required")
    split = meta.get("split") if meta.get("dataset") == args.dataset else None
    if args.dataset != "imdb" and split is None:
        split = {"kind": "holdout", "fraction": args.train_fraction, "seed": args.seed}
    train_raw, test_raw, _ = _train_test(args, split)
    raw = {"train": train_raw, "test": test_raw}[args.split]
    corpus = binarize_corpus(raw, loaded.vocabulary, loaded.tokenizer, loaded.model.class_labels)
    report = macro_metrics(loaded.model.predict(corpus), corpus.labels,
                           loaded.model.n_classes, loaded.model.class_labels)
    if args.json:
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.format_text(), end="")
    return 0


def _cv_run(payload):
    train_raw, test_raw, cfg, top_k, params = payload
    vocab, train, test = _prepare(train_raw, test_raw, cfg, top_k)
    mtm = MultiClassTM(len(vocab), train.class_labels, params)
    mtm.fit(train, record_train_accuracy=False)
    report = macro_metrics(mtm.predict(test), test.labels, mtm.n_classes, mtm.class_labels)
    return {"accuracy": report.accuracy, "macro_precision": report.macro_precision,
            "macro_recall": report.macro_recall, "macro_f1": report.macro_f1}


def cmd_cv(args) -> int:
    cfg = _tokenizer(args)
    base = _params(args)
    corpus = _load_full(args)
    plan = SplitPlan.cross_validation(args.folds, args.repeats, args.seed)
    runs = []
    for i, (tr, te) in enumerate(make_splits(corpus, plan)):
        params = HyperParams(base.n_clauses, base.n_states, base.s, base.threshold,
                             base.epochs, (base.seed + i) % 2**64)
        runs.append((corpus.subset(tr), corpus.subset(te), cfg, args.features, params))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_cv_run, runs))
    else:
        results = []
        for i, run in enumerate(runs):
            results.append(_cv_run(run))
            log.info("run %d/%d: macro F1 %.4f", i + 1, len(runs), results[-1]["macro_f1"])
    names = ["accuracy", "macro_precision", "macro_recall", "macro_f1"]
    summaries = [RunSummary.from_samples(n, [r[n] for r in results]) for n in names]
    if args.json:
        print(json.dumps({s.name: {"mean": s.mean, "half_width": s.half_width,
                                   "samples": s.samples} for s in summaries}, indent=2))
    else:
        print(f"{len(results)} runs ({args.folds} folds x {args.repeats} repeats), "
              "mean % with 95% CI")
        for s in summaries:
            print(s)
    return 0


def cmd_explain(args) -> int:
    loaded = load_model(args.model)
    if args.text is not None or args.file is not None:
        text = args.text if args.text is not None else Path(args.file).read_text(encoding="utf-8")
        explanation = explain_prediction(loaded.model, loaded.vocabulary, text, loaded.tokenizer)
        if args.format == "json":
            print(json.dumps(explanation.to_dict(), indent=2, ensure_ascii=False))
        else:
            print(explanation.format_text(), end="")
        return 0
    reference = None
    if args.dataset is not None:
        meta = loaded.metadata
        split = meta.get("split") if meta.get("dataset") == args.dataset else None
        if args.dataset != "imdb" and split is None:
            split = {"kind": "holdout", "fraction": args.train_fraction, "seed": args.seed}
        train_raw, test_raw, _ = _train_test(args, split)
        raw = {"train": train_raw, "test": test_raw}[args.split]
        reference = binarize_corpus(raw, loaded.vocabulary, loaded.tokenizer,
                                    loaded.model.class_labels)
    out = export_rules(loaded.model, loaded.vocabulary, reference, args.format, args.top_n)
    print(out, end="" if out.endswith("\n") else "\n")
    return 0


def cmd_bench(args) -> int:
    params = _params(args)
    if args.dataset is not None:
        cfg = _tokenizer(args)
        train_raw, test_raw, _ = _train_test(args)
        _, train, test = _prepare(train_raw, test_raw, cfg, args.features)
    else:
        rng = np.random.default_rng(args.seed)
        bits = (rng.random((args.docs, args.n_features)) < args.density).astype(np.uint8)
        labels = rng.integers(0, args.classes, size=args.docs)
        train = test = Corpus(bits, labels, [f"c{i}" for i in range(args.classes)])
    mtm = MultiClassTM(train.n_features, train.class_labels, params)
    mtm.fit(train.subset(np.arange(min(len(train), 8))), epochs=1, record_train_accuracy=False)
    start = time.perf_counter()
    mtm.fit(train, epochs=params.epochs, parallel=args.parallel, record_train_accuracy=False)
    train_rate = params.epochs * len(train) / (time.perf_counter() - start)
    start = time.perf_counter()
    mtm.predict(test)
    infer_rate = len(test) / (time.perf_counter() - start)
    result = {"train_docs_per_second": train_rate, "inference_docs_per_second": infer_rate,
              "documents": len(train), "features": train.n_features,
              "clauses_per_class": params.n_clauses, "classes": mtm.n_classes}
    if args.json:
        print(json.dumps(result, indent=2))
    else:
        print(f"training   {train_rate:12.1f} docs/s")
        print(f"inference  {infer_rate:12.1f} docs/s")
    return 0


# ------------------------------------------------------------------------- parser


def _fraction(value: str) -> float:
    f = float(value)
    if not 0.0 < f < 1.0:
        raise argparse.ArgumentTypeError(f"{value} is not in (0, 1)")
    return f


def _add_data_args(p, required=True):
    p.add_argument("--dataset", choices=[k.value for k in DatasetKind], required=required)
    p.add_argument("--data-dir", help=f"dataset root (default: ${DATA_DIR_ENV})")
    p.add_argument("--grouping", help="JSON map newsgroup -> category (20ng)")
    p.add_argument("--ngrams", default="1", help="comma-separated word n-gram sizes")
    p.add_argument("--min-df", type=int, default=None,
                   help="document-frequency floor (default 2 for imdb/20ng, else 1)")
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--keep-punctuation", action="store_true")
    p.add_argument("--train-fraction", type=_fraction, default=0.8)
    p.add_argument("--split-seed", type=int, default=None)


def _add_model_args(p, clauses=None, epochs=None):
    p.add_argument("--features", type=int, default=None,
                   help="keep this many terms by information gain (default: all)")
    p.add_argument("--clauses", type=int, required=clauses is None, default=clauses,
                   help="clauses per class")
    p.add_argument("--states", type=int, default=100, help="states per automaton action")
    p.add_argument("--s", type=float, default=8.0, help="specificity")
    p.add_argument("--threshold", type=int, default=25)
    p.add_argument("--epochs", type=int, default=epochs or 100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--parallel", action="store_true", help="update clauses with threads")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train a model and write it to --out")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--history", help="per-epoch CSV (default: OUT.history.csv)")
    p.add_argument("--skip-train-accuracy", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="score a saved model")
    p.add_argument("--model", required=True)
    _add_data_args(p, required=False)
    p.add_argument("--split", choices=["train", "test"], default="test")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("cv", help="repeated stratified cross-validation")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("explain", help="export rules or explain one prediction")
    p.add_argument("--model", required=True)
    p.add_argument("--text")
    p.add_argument("--file")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--top-n", type=int, default=None)
    _add_data_args(p, required=False)
    p.add_argument("--split", choices=["train", "test"], default="train",
                   help="reference split for rule support")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("bench", help="training and inference throughput")
    _add_data_args(p, required=False)
    _add_model_args(p, clauses=200, epochs=1)
    p.add_argument("--docs", type=int, default=2000)
    p.add_argument("--n-features", type=int, default=1000)
    p.add_argument("--density", type=float, default=0.05)
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"{PROG}: usage error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{PROG}: usage error: {exc}", file=sys.stderr)
        return 1
    except (DatasetError, ModelFileError, DimensionError, ValueError, OSError) as exc:
        print(f"{PROG}: error: {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # never show a traceback to CLI users
        print(f"{PROG}: error: unexpected {exc.__class__.__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
