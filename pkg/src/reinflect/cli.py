"""Command-line interface: train, predict, evaluate, sample-corpus,
gen-random, baseline.

Every subcommand that writes output also writes a `<name>.config.json` echo
of its resolved configuration next to it.  All randomness flows from one
root --seed through named substreams.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import zlib
from pathlib import Path

import numpy as np

from . import data, model as model_mod, trainer as trainer_mod
from .baseline import apply_rules, extract_rules, format_rules
from .decoding import decode_beam, decode_greedy, evaluate
from .errors import ConfigError, DataError, ReinflectError
from .model import Hyperparams, LabeledExample, ModelParameters, Vocabulary, encode_input


def substream(seed: int, name: str) -> np.random.Generator:
    """Named, reproducible child stream of the root seed."""
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def _write_config_echo(out_path: Path, args: argparse.Namespace) -> None:
    cfg = {k: (str(v) if isinstance(v, Path) else v)
           for k, v in vars(args).items() if k != "func"}
    echo = out_path.with_suffix(out_path.suffix + ".config.json")
    echo.write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _parse_fraction(text: str):
    from fractions import Fraction
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"bad fraction {text!r}")


def _subset_fraction(examples, fraction, seed: int):
    """First ceil(n/k) examples after a seeded shuffle; fraction 1 is a no-op."""
    if fraction == 1:
        return list(examples)
    n = math.ceil(len(examples) * float(fraction))
    rng = substream(seed, "fraction-subset")
    perm = rng.permutation(len(examples))
    return [examples[i] for i in perm[:n]]


def _read_unlabeled_words(path) -> list:
    return [model_mod.UnlabeledExample(t.token) for t in data.read_tokens(path)]


def cmd_train(args) -> int:
    labeled = data.read_labeled(args.labeled)
    if not labeled:
        raise DataError(f"no labeled examples in {args.labeled}")
    if args.fraction is not None:
        frac = _parse_fraction(args.fraction)
        labeled = _subset_fraction(labeled, frac, args.seed)
        epochs = args.epochs if args.epochs else trainer_mod.epochs_for_fraction(frac)
    else:
        if not args.epochs:
            raise ConfigError("set --epochs or --fraction (for the epoch schedule)")
        epochs = args.epochs

    unlabeled = _read_unlabeled_words(args.unlabeled) if args.unlabeled else []
    unlabeled = data.apply_ratio(len(labeled), unlabeled, ratio=args.ratio,
                                 seed=int(substream(args.seed, "ratio").integers(2**31)))

    alphabet = data.build_alphabet(labeled, [u.word for u in unlabeled])
    vocab = Vocabulary.build(alphabet.chars, data.collect_subtags(labeled))
    hp = Hyperparams(embed_dim=args.embed_dim, hidden=args.hidden,
                     attn_dim=args.attn_dim)
    model = ModelParameters.init(vocab, hp, substream(args.seed, "init"))

    dev = data.read_labeled(args.dev) if args.dev else None
    cfg = trainer_mod.TrainConfig(
        epochs=epochs,
        batch_size=args.batch_size,
        seed=int(substream(args.seed, "shuffle").integers(2**31)),
        grad_clip_norm=None if args.no_grad_clip else args.grad_clip,
        model_selection=args.model_selection,
    )
    out_model = Path(args.model_out)
    out_model.parent.mkdir(parents=True, exist_ok=True)
    log_path = Path(args.log_out) if args.log_out else out_model.with_suffix(".log.jsonl")
    with open(log_path, "w", encoding="utf-8") as log_stream:
        trained, _log = trainer_mod.train(model, labeled, unlabeled, cfg,
                                          dev=dev, log_stream=log_stream)
    model_mod.save(trained, out_model)
    _write_config_echo(out_model, args)
    print(f"wrote model to {out_model} (log: {log_path})")
    return 0


def _read_prediction_inputs(path) -> list[tuple[str, tuple[str, ...]]]:
    """source_form TAB target_tag [TAB ignored]; returns (form, subtags) pairs."""
    rows = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise DataError(f"{path}:{lineno}: expected at least 2 columns")
            rows.append((fields[0], data.parse_tag(fields[1])))
    return rows


def cmd_predict(args) -> int:
    model = model_mod.load(args.model)
    rows = _read_prediction_inputs(args.input)
    out_path = Path(args.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        for source, tag in rows:
            # an empty tag means "autoencode this word"
            ex = (LabeledExample(source, tag, source) if tag
                  else model_mod.UnlabeledExample(source))
            ids = encode_input(model.vocab, ex)
            if args.beam > 1:
                pred = decode_beam(model, ids, width=args.beam, max_len=args.max_len)
            else:
                pred = decode_greedy(model, ids, max_len=args.max_len)
            f.write(f"{source}\t{','.join(tag)}\t{pred}\n")
    _write_config_echo(out_path, args)
    print(f"wrote {len(rows)} predictions to {out_path}")
    return 0


def cmd_evaluate(args) -> int:
    golds = data.read_labeled(args.gold)
    preds = data.read_labeled(args.pred)
    if len(golds) != len(preds):
        raise DataError(
            f"gold has {len(golds)} rows but predictions have {len(preds)}"
        )
    acc, ed = evaluate([p.target_form for p in preds],
                       [g.target_form for g in golds])
    print(f"accuracy {acc:.4f}")
    print(f"edit_distance {ed:.2f}")
    return 0


def cmd_sample_corpus(args) -> int:
    tokens = data.read_tokens(args.tokens)
    labeled = data.read_labeled(args.labeled)
    alphabet = data.build_alphabet(labeled)
    sample = data.sample_corpus(tokens, alphabet, args.n,
                                min_count=args.min_count,
                                seed=int(substream(args.seed, "corpus").integers(2**31)))
    out_path = Path(args.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        for ex in sample:
            f.write(ex.word + "\n")
    _write_config_echo(out_path, args)
    print(f"wrote {len(sample)} corpus words to {out_path}")
    return 0


def cmd_gen_random(args) -> int:
    if args.chars:
        alphabet = data.Alphabet.from_chars(args.chars)
    elif args.labeled:
        alphabet = data.build_alphabet(data.read_labeled(args.labeled))
    else:
        raise ConfigError("gen-random needs --chars or --labeled for the alphabet")
    strings = data.gen_random_strings(
        alphabet, args.n, min_len=args.min_len, max_len=args.max_len,
        seed=int(substream(args.seed, "random-strings").integers(2**31)))
    out_path = Path(args.output)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="\n") as f:
        for ex in strings:
            f.write(ex.word + "\n")
    _write_config_echo(out_path, args)
    print(f"wrote {len(strings)} random strings to {out_path}")
    return 0


def cmd_baseline(args) -> int:
    train = data.read_labeled(args.labeled)
    rules = extract_rules(train)
    if args.rules_out:
        Path(args.rules_out).write_text(format_rules(rules), encoding="utf-8")
    if args.input:
        if not args.output:
            raise ConfigError("baseline --input requires --output")
        rows = _read_prediction_inputs(args.input)
        out_path = Path(args.output)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w", encoding="utf-8", newline="\n") as f:
            for source, tag in rows:
                pred = apply_rules(rules, source, tag)
                f.write(f"{source}\t{','.join(tag)}\t{pred}\n")
        _write_config_echo(out_path, args)
        print(f"wrote {len(rows)} baseline predictions to {out_path}")
    else:
        print(f"extracted {len(rules)} rules from {len(train)} training pairs")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="reinflect",
        description="Semi-supervised character-level morphological reinflection.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a model on labeled (+ unlabeled) data")
    t.add_argument("--labeled", required=True, help="labeled TSV file")
    t.add_argument("--unlabeled", help="unlabeled token file (one word per line)")
    t.add_argument("--ratio", type=float, default=4.0,
                   help="unlabeled:labeled ratio (default 4)")
    t.add_argument("--fraction", help="labeled-data fraction, e.g. 1/32; "
                                      "selects the epoch schedule")
    t.add_argument("--epochs", type=int, help="override the epoch schedule")
    t.add_argument("--dev", help="labeled TSV for per-epoch evaluation")
    t.add_argument("--seed", type=int, default=1)
    t.add_argument("--batch-size", type=int, default=20)
    t.add_argument("--embed-dim", type=int, default=300)
    t.add_argument("--hidden", type=int, default=100)
    t.add_argument("--attn-dim", type=int, default=100)
    t.add_argument("--grad-clip", type=float, default=5.0)
    t.add_argument("--no-grad-clip", action="store_true")
    t.add_argument("--model-selection", choices=["last", "best_dev"], default="last")
    t.add_argument("--model-out", default="model.bin")
    t.add_argument("--log-out", help="per-epoch JSONL log path")
    t.set_defaults(func=cmd_train)

    pr = sub.add_parser("predict", help="decode inputs with a trained model")
    pr.add_argument("--model", required=True)
    pr.add_argument("--input", required=True,
                    help="TSV with source_form and target_tag columns")
    pr.add_argument("--output", required=True)
    pr.add_argument("--beam", type=int, default=1, help="beam width (1 = greedy)")
    pr.add_argument("--max-len", type=int, help="decoding length cap")
    pr.set_defaults(func=cmd_predict)

    ev = sub.add_parser("evaluate", help="accuracy and edit distance")
    ev.add_argument("--gold", required=True)
    ev.add_argument("--pred", required=True)
    ev.set_defaults(func=cmd_evaluate)

    sc = sub.add_parser("sample-corpus", help="sample filtered corpus words")
    sc.add_argument("--tokens", required=True, help="token[<TAB>count] file")
    sc.add_argument("--labeled", required=True, help="labeled TSV defining the alphabet")
    sc.add_argument("--n", type=int, required=True)
    sc.add_argument("--min-count", type=int, default=2)
    sc.add_argument("--seed", type=int, default=1)
    sc.add_argument("--output", required=True)
    sc.set_defaults(func=cmd_sample_corpus)

    gr = sub.add_parser("gen-random", help="generate random alphabet strings")
    gr.add_argument("--chars", help="alphabet as a literal string of characters")
    gr.add_argument("--labeled", help="labeled TSV to derive the alphabet from")
    gr.add_argument("--n", type=int, required=True)
    gr.add_argument("--min-len", type=int, default=3)
    gr.add_argument("--max-len", type=int, default=20)
    gr.add_argument("--seed", type=int, default=1)
    gr.add_argument("--output", required=True)
    gr.set_defaults(func=cmd_gen_random)

    b = sub.add_parser("baseline", help="affix substitution-rule baseline")
    b.add_argument("--labeled", required=True, help="training TSV to extract rules from")
    b.add_argument("--input", help="TSV to predict (source_form, target_tag)")
    b.add_argument("--output", help="predictions TSV")
    b.add_argument("--rules-out", help="write the rule table as text")
    b.set_defaults(func=cmd_baseline)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ReinflectError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
