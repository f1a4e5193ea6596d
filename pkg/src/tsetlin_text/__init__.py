"""Interpretable text categorization with Tsetlin machines."""

from .automata import Action, Feedback, TsetlinAutomaton, new_automaton
from .clause import Clause, DimensionError, Literal, Mode, evaluate_clause, included_literals
from .datasets import (DatasetError, DatasetSpec, SplitPlan, load_20newsgroups, load_imdb,
                       load_labeled_dirs, make_splits)
from .explain import Rule, clause_to_rule, explain_prediction, export_rules, extract_rules
from .learner import (FeedbackType, HyperParams, MultiClassTM, TrainingHistory, TsetlinMachine,
                      classify, classify_multiclass, feedback_activation_probability, fit,
                      train_example, train_example_multiclass, type_i_feedback,
                      type_ii_feedback, vote_sum)
from .metrics import MetricsReport, RunSummary, confidence_interval, macro_metrics
from .modelfile import ModelFileError, load_model, save_model
from .text import (BitDocument, Corpus, RawCorpus, RawDocument, TokenizerConfig, Vocabulary,
                   binarize, binarize_corpus, build_vocabulary, information_gain,
                   select_features, tokenize)

__version__ = "0.1.0"
