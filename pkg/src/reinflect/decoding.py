"""Greedy and beam decoding plus the two evaluation metrics."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InputError
from .layers import decoder_step
from .model import BOS, CLASS_CHAR, ModelParameters, encode_sequence
from . import autodiff as ad

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Prediction:
    source_form: str
    target_tag: tuple[str, ...]
    predicted_form: str


def default_max_len(vocab, input_ids: list[int]) -> int:
    """Input character count plus 10; inflections rarely grow by more."""
    n_chars = sum(1 for i in input_ids if vocab.classes[i] == CLASS_CHAR)
    return n_chars + 10


def decode_greedy(model: ModelParameters, input_ids: list[int],
                  max_len: int | None = None) -> str:
    """Argmax decoding until E or max_len; ties break toward the lowest id."""
    vocab = model.vocab
    if max_len is None:
        max_len = default_max_len(vocab, input_ids)
    if max_len < 1:
        raise ConfigError(f"decode_greedy: max_len must be >= 1, got {max_len}")
    h_mat, s = encode_sequence(model, input_ids)
    y_emb = ad.lookup(model.embed, vocab.index[BOS])
    out: list[str] = []
    for _ in range(max_len):
        s, dist = decoder_step(model.dec, model.attn, model.out_w, model.out_b,
                               s, y_emb, h_mat)
        sym = int(np.argmax(dist.value))  # first max = lowest id on ties
        if sym == vocab.eos_out:
            return "".join(out)
        out.append(vocab.out_symbols[sym])
        y_emb = ad.lookup(model.embed, vocab.out_to_in[sym])
    logger.warning("decode_greedy: output truncated at max_len=%d", max_len)
    return "".join(out)


@dataclass
class _Hyp:
    score: float
    chars: tuple[int, ...]
    state: object
    y_emb: object
    order: int  # insertion counter for deterministic tie-breaking


def decode_beam(model: ModelParameters, input_ids: list[int], width: int,
                max_len: int | None = None) -> str:
    """Beam search over summed log-probabilities.

    A hypothesis finishes when it emits E; at max_len an unfinished hypothesis
    competes with its accumulated character log-probability.  width=1 is
    exactly greedy decoding.
    """
    if width < 1:
        raise ConfigError(f"decode_beam: width must be >= 1, got {width}")
    vocab = model.vocab
    if max_len is None:
        max_len = default_max_len(vocab, input_ids)
    h_mat, s0 = encode_sequence(model, input_ids)
    bos_emb = ad.lookup(model.embed, vocab.index[BOS])
    counter = 0
    beams = [_Hyp(0.0, (), s0, bos_emb, counter)]
    done: list[_Hyp] = []
    for _ in range(max_len):
        candidates: list[_Hyp] = []
        for hyp in beams:
            s, dist = decoder_step(model.dec, model.attn, model.out_w,
                                   model.out_b, hyp.state, hyp.y_emb, h_mat)
            logp = np.log(dist.value)
            for sym in range(vocab.n_out):
                counter += 1
                score = hyp.score + float(logp[sym])
                if sym == vocab.eos_out:
                    candidates.append(_Hyp(score, hyp.chars, None, None, counter))
                else:
                    y_emb = ad.lookup(model.embed, vocab.out_to_in[sym])
                    candidates.append(
                        _Hyp(score, hyp.chars + (sym,), s, y_emb, counter))
        # EOS competes for beam slots like any symbol; width=1 is thus greedy
        candidates.sort(key=lambda h: (-h.score, h.order))
        beams = []
        for hyp in candidates[:width]:
            (done if hyp.state is None else beams).append(hyp)
        if not beams:
            break
    done.extend(beams)  # truncated hypotheses compete as-is
    best = min(done, key=lambda h: (-h.score, h.order))
    return "".join(vocab.out_symbols[i] for i in best.chars)


def beam_score(model: ModelParameters, input_ids: list[int], form: str) -> float:
    """Total log-probability of emitting `form` then E (for consistency checks)."""
    from .model import example_nll, target_ids
    return -float(example_nll(model, input_ids, target_ids(model.vocab, form)).value)


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance over Unicode scalar values, unit costs."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1,
                           cur[j - 1] + 1,
                           prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[len(b)]


def accuracy(preds: list[str], golds: list[str]) -> float:
    if not preds or len(preds) != len(golds):
        raise InputError(
            f"accuracy: need equal nonempty lists, got {len(preds)} and {len(golds)}"
        )
    return sum(p == g for p, g in zip(preds, golds)) / len(preds)


def evaluate(preds: list[str], golds: list[str]) -> tuple[float, float]:
    """(exact-match accuracy, mean Levenshtein distance)."""
    acc = accuracy(preds, golds)
    mean_ed = sum(edit_distance(p, g) for p, g in zip(preds, golds)) / len(preds)
    return acc, mean_ed
