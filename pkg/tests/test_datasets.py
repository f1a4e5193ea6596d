import logging
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsetlin_text.datasets import (DEFAULT_20NG_GROUPING, DatasetError, DatasetKind, DatasetSpec,
                                   SplitPlan, load_20newsgroups, load_imdb, load_labeled_dirs,
                                   make_splits)


def write_tree(root, files):
    for rel, text in files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")


@pytest.fixture
def imdb_tree(tmp_path):
    files = {}
    for split in ("train", "test"):
        for label in ("pos", "neg"):
            for i in (1, 0):
                files[f"{split}/{label}/{i}_{label}.txt"] = f"{split} {label} review {i}"
    write_tree(tmp_path, files)
    return tmp_path


def test_imdb_miniature(imdb_tree):
    train, test = load_imdb(imdb_tree)
    assert len(train) == 4 and len(test) == 4
    assert train.class_labels == ["neg", "pos"]
    assert [d.source for d in train] == ["train/neg/0_neg.txt", "train/neg/1_neg.txt",
                                         "train/pos/0_pos.txt", "train/pos/1_pos.txt"]
    assert train[0].text == "train neg review 0" and train[0].label == "neg"
    assert load_imdb(DatasetSpec(DatasetKind.IMDB, imdb_tree)) == (train, test)


def test_imdb_missing_directory(imdb_tree):
    for p in (imdb_tree / "test" / "pos").iterdir():
        p.unlink()
    (imdb_tree / "test" / "pos").rmdir()
    with pytest.raises(DatasetError) as info:
        load_imdb(imdb_tree)
    assert info.value.path == str(imdb_tree / "test" / "pos")
    assert "test/pos" in str(info.value)


def test_imdb_unreadable_file_named(imdb_tree):
    bad = imdb_tree / "train" / "pos" / "bad.txt"
    bad.write_bytes(b"\xff\xfe\xfa not utf-8")
    with pytest.raises(DatasetError) as info:
        load_imdb(imdb_tree)
    assert info.value.path == str(bad)


@pytest.fixture
def ng_tree(tmp_path):
    files = {}
    for group in ("comp.graphics", "rec.autos", "sci.med", "talk.politics.guns", "misc.forsale"):
        for i in range(3):
            files[f"{group}/{1000 + i}"] = f"Subject: {group}\n\nmessage {i} from {group}"
    write_tree(tmp_path, files)
    return tmp_path


def test_20ng_default_grouping_skips_unmapped(ng_tree):
    grouping = {g: c for g, c in DEFAULT_20NG_GROUPING.items()
                if g in ("comp.graphics", "rec.autos", "sci.med", "talk.politics.guns")}
    corpus = load_20newsgroups(ng_tree, grouping)
    assert len(corpus) == 12 and corpus.skipped == 3
    assert corpus.class_labels == ["computers", "politics", "recreation", "science"]
    assert Counter(corpus.labels) == {c: 3 for c in corpus.class_labels}
    assert corpus[0].source == "comp.graphics/1000"


def test_20ng_default_grouping_requires_every_group(ng_tree):
    with pytest.raises(DatasetError, match="not found on disk"):
        load_20newsgroups(ng_tree)


def test_20ng_single_group_is_degenerate(ng_tree, caplog):
    with caplog.at_level(logging.WARNING):
        corpus = load_20newsgroups(ng_tree, {"sci.med": "science"})
    assert corpus.degenerate and len(corpus) == 3 and corpus.skipped == 12
    assert "single class" in caplog.text


def test_20ng_empty_root(tmp_path):
    with pytest.raises(DatasetError):
        load_20newsgroups(tmp_path, {})
    with pytest.raises(DatasetError):
        load_20newsgroups(tmp_path / "absent", {})


def test_spec_validation(tmp_path, ng_tree):
    with pytest.raises(DatasetError):
        DatasetSpec("imdb", tmp_path / "absent")
    with pytest.raises(ValueError):
        DatasetSpec("reuters", tmp_path)
    spec = DatasetSpec("20ng", ng_tree)
    assert spec.grouping == DEFAULT_20NG_GROUPING


def test_labeled_dirs(tmp_path):
    write_tree(tmp_path, {"b/2.txt": "two", "a/1.txt": "one", "b/1.txt": "uno"})
    corpus = load_labeled_dirs(tmp_path)
    assert corpus.class_labels == ["a", "b"]
    assert [d.text for d in corpus] == ["one", "uno", "two"]
    with pytest.raises(DatasetError):
        load_labeled_dirs(tmp_path / "a")


def test_holdout_80_20():
    labels = ["a"] * 50 + ["b"] * 50
    [(train, test)] = make_splits(labels, SplitPlan.holdout(0.8, seed=3))
    assert len(train) == 80 and len(test) == 20
    assert Counter(np.asarray(labels)[test]) == {"a": 10, "b": 10}
    assert sorted(np.concatenate([train, test]).tolist()) == list(range(100))


def test_cv_10x10_gives_100_pairs():
    labels = np.repeat([0, 1, 2], [40, 35, 25])
    pairs = make_splits(labels, SplitPlan.cross_validation(10, 10, seed=1))
    assert len(pairs) == 100
    for r in range(10):
        tests = np.concatenate([te for _, te in pairs[10 * r:10 * r + 10]])
        assert sorted(tests.tolist()) == list(range(100))
        for tr, te in pairs[10 * r:10 * r + 10]:
            assert not set(tr) & set(te) and len(tr) + len(te) == 100
    assert not np.array_equal(pairs[0][1], pairs[10][1])  # repeats reshuffle


def test_splits_reproducible():
    labels = np.repeat([0, 1], [30, 20])
    for plan in (SplitPlan.holdout(0.5, 7), SplitPlan.cross_validation(5, 3, 7)):
        a, b = make_splits(labels, plan), make_splits(labels, plan)
        assert all(np.array_equal(x, y) for pa, pb in zip(a, b) for x, y in zip(pa, pb))
    other = make_splits(labels, SplitPlan.holdout(0.5, 8))
    assert not np.array_equal(other[0][1], make_splits(labels, SplitPlan.holdout(0.5, 7))[0][1])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(5, 40), min_size=1, max_size=4), st.integers(2, 5),
       st.integers(0, 2**31))
def test_cv_stratified_within_one(class_sizes, folds, seed):
    labels = np.repeat(np.arange(len(class_sizes)), class_sizes)
    for _, test in make_splits(labels, SplitPlan.cross_validation(folds, 1, seed)):
        counts = np.bincount(labels[test], minlength=len(class_sizes))
        expected = np.array(class_sizes) / folds
        assert np.all(np.abs(counts - expected) <= 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(5, 40), min_size=2, max_size=4), st.floats(0.2, 0.8),
       st.integers(0, 2**31))
def test_holdout_stratified_within_one(class_sizes, fraction, seed):
    labels = np.repeat(np.arange(len(class_sizes)), class_sizes)
    [(train, test)] = make_splits(labels, SplitPlan.holdout(fraction, seed))
    counts = np.bincount(labels[train], minlength=len(class_sizes))
    assert np.all(np.abs(counts - np.array(class_sizes) * fraction) <= 1)


def test_split_errors():
    with pytest.raises(ValueError):
        SplitPlan.holdout(1.0)
    with pytest.raises(ValueError):
        SplitPlan.cross_validation(1)
    with pytest.raises(ValueError):
        SplitPlan.cross_validation(5, repeats=0)
    with pytest.raises(ValueError):
        make_splits([0, 1, 0], SplitPlan.cross_validation(5))
    with pytest.raises(ValueError):
        make_splits([0] * 10 + [1] * 3, SplitPlan.cross_validation(5))
    with pytest.raises(ValueError):
        make_splits([0, 0, 1, 1], SplitPlan.holdout(0.25))  # one training document, two classes
