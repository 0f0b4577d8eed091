"""Training loop: mixed-task mini-batches, AdaDelta, epoch schedules."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import autodiff as ad
from .decoding import decode_greedy, evaluate
from .errors import ConfigError, TrainingDivergedError
from .model import (
    LabeledExample,
    ModelParameters,
    batch_loss,
    encode_input,
)
from .optim import AdaDelta, clip_gradients

LAST = "last"
BEST_DEV = "best_dev"

# Epoch schedule by labeled-data fraction: 1/8 of the data and above train
# for 200 epochs, 1/16 for 400, 1/32 for 800.
_SCHEDULE = {
    Fraction(1, 1): 200,
    Fraction(1, 4): 200,
    Fraction(1, 8): 200,
    Fraction(1, 16): 400,
    Fraction(1, 32): 800,
}


@dataclass
class TrainConfig:
    epochs: int
    batch_size: int = 20
    seed: int = 0
    adadelta_rho: float = 0.95
    adadelta_eps: float = 1e-6
    grad_clip_norm: float | None = 5.0
    model_selection: str = LAST

    def __post_init__(self):
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 < self.adadelta_rho < 1.0:
            raise ConfigError(f"adadelta_rho must be in (0, 1), got {self.adadelta_rho}")
        if self.adadelta_eps <= 0.0:
            raise ConfigError(f"adadelta_eps must be > 0, got {self.adadelta_eps}")
        if self.model_selection not in (LAST, BEST_DEV):
            raise ConfigError(f"unknown model_selection {self.model_selection!r}")


def epochs_for_fraction(fraction) -> int:
    """Epoch count for a labeled-data fraction (1, 1/4, 1/8, 1/16, 1/32)."""
    frac = Fraction(fraction) if not isinstance(fraction, Fraction) else fraction
    if frac not in _SCHEDULE:
        raise ConfigError(
            f"no epoch schedule for fraction {fraction}; set epochs explicitly"
        )
    return _SCHEDULE[frac]


def _dev_metrics(model: ModelParameters, dev: list[LabeledExample]) -> tuple[float, float]:
    preds = [decode_greedy(model, encode_input(model.vocab, ex)) for ex in dev]
    golds = [ex.target_form for ex in dev]
    return evaluate(preds, golds)


def train(
    model: ModelParameters,
    labeled: list,
    unlabeled: list,
    cfg: TrainConfig,
    dev: list[LabeledExample] | None = None,
    log_stream=None,
) -> tuple[ModelParameters, list[dict]]:
    """Optimize the joint objective over labeled + unlabeled examples.

    Each epoch shuffles both datasets together (tasks mixed freely within a
    batch) and minimizes the summed batch loss with AdaDelta.  Returns the
    final model (model_selection=last) or the best-dev-accuracy model
    (best_dev), plus a per-epoch log.
    """
    if not labeled and not unlabeled:
        raise ConfigError("train: need at least one labeled or unlabeled example")
    if cfg.model_selection == BEST_DEV and dev is None:
        raise ConfigError("model_selection=best_dev requires a dev set")

    examples = list(labeled) + list(unlabeled)
    params = model.parameters()
    opt = AdaDelta(params, rho=cfg.adadelta_rho, eps=cfg.adadelta_eps)
    log: list[dict] = []
    best_acc = -1.0
    best_model = None

    for epoch in range(1, cfg.epochs + 1):
        rng = np.random.default_rng([cfg.seed, epoch])
        perm = rng.permutation(len(examples))
        total_nll = 0.0
        for start in range(0, len(examples), cfg.batch_size):
            batch = [examples[i] for i in perm[start:start + cfg.batch_size]]
            model.zero_grads()
            loss = batch_loss(model, batch)
            loss_val = float(loss.value)
            if not math.isfinite(loss_val):
                raise TrainingDivergedError(
                    f"non-finite loss {loss_val} at epoch {epoch}, "
                    f"batch starting at {start}"
                )
            total_nll += loss_val
            ad.backward(loss)
            if cfg.grad_clip_norm is not None:
                clip_gradients(params, cfg.grad_clip_norm)
            opt.step()
        record = {"epoch": epoch, "train_nll": total_nll / len(examples)}
        if dev is not None:
            acc, ed = _dev_metrics(model, dev)
            record["dev_acc"] = acc
            record["dev_ed"] = ed
            if cfg.model_selection == BEST_DEV and acc > best_acc:
                best_acc = acc
                best_model = model.copy()
        log.append(record)
        if log_stream is not None:
            log_stream.write(json.dumps(record) + "\n")
            log_stream.flush()

    if cfg.model_selection == BEST_DEV and best_model is not None:
        return best_model, log
    return model, log
