"""Semi-supervised character-level morphological reinflection.

A seq2seq encoder-decoder with additive attention, trained jointly on
labeled reinflection pairs and autoencoded unlabeled words, plus evaluation
metrics and an affix substitution-rule baseline.
"""

from .data import Alphabet, TokenCount, apply_ratio, build_alphabet, gen_random_strings, read_labeled, sample_corpus
from .decoding import accuracy, decode_beam, decode_greedy, edit_distance, evaluate
from .model import (
    Hyperparams,
    LabeledExample,
    ModelParameters,
    UnlabeledExample,
    Vocabulary,
    batch_loss,
    encode_input,
    example_nll,
    load,
    save,
    target_ids,
)
from .trainer import TrainConfig, epochs_for_fraction, train

__all__ = [
    "Alphabet",
    "Hyperparams",
    "LabeledExample",
    "ModelParameters",
    "TokenCount",
    "TrainConfig",
    "UnlabeledExample",
    "Vocabulary",
    "accuracy",
    "apply_ratio",
    "batch_loss",
    "build_alphabet",
    "decode_beam",
    "decode_greedy",
    "edit_distance",
    "encode_input",
    "epochs_for_fraction",
    "evaluate",
    "example_nll",
    "gen_random_strings",
    "load",
    "read_labeled",
    "sample_corpus",
    "save",
    "target_ids",
    "train",
]

__version__ = "0.1.0"
