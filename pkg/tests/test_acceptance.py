"""Acceptance suite: one test per criterion, each printing a PASS line.

The learning-based criteria (2-4) run real training at toy scale and take
minutes each on one CPU core; run with `pytest tests/test_acceptance.py -v`.
"""

import itertools
import logging
import time

import numpy as np
import pytest

from reinflect import autodiff as ad
from reinflect.baseline import apply_rules, extract_rules, format_rules
from reinflect.data import Alphabet, TokenCount, gen_random_strings, sample_corpus
from reinflect.decoding import decode_beam, decode_greedy, edit_distance, evaluate
from reinflect.model import (
    Hyperparams,
    LabeledExample,
    ModelParameters,
    UnlabeledExample,
    Vocabulary,
    batch_loss,
    encode_input,
    load,
    save,
)
from reinflect.trainer import TrainConfig, epochs_for_fraction, train

from conftest import finite_difference_grads

logging.disable(logging.WARNING)


def report(n, text):
    print(f"\nACCEPTANCE {n} PASS: {text}")


# --- criterion 1: full-model gradient correctness ---------------------------

def test_criterion_1_gradient_correctness():
    t0 = time.time()
    vocab = Vocabulary.build("abcdef", ["t=1", "t=2"])
    hp = Hyperparams(embed_dim=8, hidden=8, attn_dim=8)
    model = ModelParameters.init(vocab, hp, np.random.default_rng(11))
    ex = LabeledExample("fade", ("t=1", "t=2"), "bead")
    leaves = model.parameters()

    def loss():
        return batch_loss(model, [ex])

    model.zero_grads()
    root = loss()
    ad.backward(root)
    ad_grads = [p.grad if p.grad is not None else np.zeros_like(p.value)
                for p in leaves]
    fd_grads = finite_difference_grads(loss, leaves, h=1e-5)
    worst = 0.0
    for got, want in zip(ad_grads, fd_grads):
        rel = np.abs(got - want) / np.maximum(1.0, np.abs(want))
        worst = max(worst, float(rel.max()))
    elapsed = time.time() - t0
    assert worst <= 1e-4, f"max relative gradient error {worst:.3g}"
    assert elapsed < 60.0, f"gradient check took {elapsed:.1f}s"
    n_params = sum(p.value.size for p in leaves)
    report(1, f"all {n_params} parameter gradients within 1e-4 of finite "
              f"differences (worst {worst:.2e}, {elapsed:.1f}s)")


# --- criterion 2: copy-task learnability ------------------------------------

COPY_ALPHABET = Alphabet.from_chars("abcdefghij")


def run_copy_seed(seed):
    train_words = gen_random_strings(COPY_ALPHABET, 500, min_len=3, max_len=10,
                                     seed=seed)
    held = gen_random_strings(COPY_ALPHABET, 200, min_len=3, max_len=10,
                              seed=seed + 10_000)
    vocab = Vocabulary.build(COPY_ALPHABET.chars, [])
    hp = Hyperparams(embed_dim=16, hidden=32, attn_dim=32)
    model = ModelParameters.init(vocab, hp, np.random.default_rng(seed))
    cfg = TrainConfig(epochs=50, batch_size=20, seed=seed, grad_clip_norm=None)
    model, _ = train(model, [], train_words, cfg)
    hits = sum(decode_greedy(model, encode_input(vocab, w)) == w.word
               for w in held)
    return hits / len(held)


def test_criterion_2_copy_task_learnability():
    t0 = time.time()
    accs = [run_copy_seed(seed) for seed in (1, 2, 3)]
    elapsed = time.time() - t0
    mean = sum(accs) / len(accs)
    assert mean >= 0.95, f"mean held-out autoencoding accuracy {mean:.3f} < 0.95"
    assert elapsed < 600.0, f"copy-task runs took {elapsed:.0f}s"
    report(2, f"held-out autoencoding accuracy {[f'{a:.3f}' for a in accs]} "
              f"mean {mean:.3f} >= 0.95 in 50 epochs ({elapsed:.0f}s)")


# --- criteria 3 and 4: semi-supervision on a synthetic suffixing language ---

SYNTH_ALPHABET = "aeiobdklmnst"  # 4 vowels, 8 consonants
SYNTH_VOWELS = set("aeio")
# tag -> (suffix after consonant-final stem, allomorph after vowel-final stem)
SYNTH_SUFFIXES = {
    "c=T1": ("ta", "da"),
    "c=T2": ("ne", "sne"),
    "c=T3": ("kko", "ko"),
    "c=T4": ("mi", "lmi"),
}
SYNTH_TAGS = sorted(SYNTH_SUFFIXES)
SYNTH_EPOCHS = 60
SYNTH_SEEDS = (0, 1, 2, 3, 4)


def synth_inflect(stem, tag):
    cons, vow = SYNTH_SUFFIXES[tag]
    return stem + (vow if stem[-1] in SYNTH_VOWELS else cons)


def make_synth_language(seed):
    rng = np.random.default_rng(seed)
    stems = set()
    while len(stems) < 300:
        n = int(rng.integers(3, 8))
        stems.add("".join(SYNTH_ALPHABET[i]
                          for i in rng.integers(0, len(SYNTH_ALPHABET), size=n)))
    stems = sorted(stems)
    rng.shuffle(stems)

    def pair(stem):
        src_tag, tgt_tag = rng.choice(SYNTH_TAGS, size=2, replace=False)
        return LabeledExample(synth_inflect(stem, src_tag), (tgt_tag,),
                              synth_inflect(stem, tgt_tag))

    labeled = [pair(s) for s in stems[:64]]
    test = [pair(s) for s in stems[200:300]]
    unl_idx = rng.choice(300, size=256, replace=False)
    unlabeled = [UnlabeledExample(stems[i]) for i in unl_idx]
    return labeled, unlabeled, test


def run_synth(seed, unlabeled_kind):
    labeled, unl_stems, test = make_synth_language(seed)
    if unlabeled_kind == "none":
        unl = []
    elif unlabeled_kind == "stems":
        unl = unl_stems
    else:
        unl = gen_random_strings(Alphabet.from_chars(SYNTH_ALPHABET), 256,
                                 min_len=3, max_len=20, seed=seed + 5000)
    vocab = Vocabulary.build(SYNTH_ALPHABET, SYNTH_TAGS)
    hp = Hyperparams(embed_dim=16, hidden=32, attn_dim=32)
    model = ModelParameters.init(vocab, hp, np.random.default_rng(seed))
    cfg = TrainConfig(epochs=SYNTH_EPOCHS, batch_size=20, seed=seed,
                      grad_clip_norm=None)
    model, _ = train(model, labeled, unl, cfg)
    preds = [decode_greedy(model, encode_input(vocab, ex)) for ex in test]
    acc, _ = evaluate(preds, [ex.target_form for ex in test])
    return acc


@pytest.fixture(scope="module")
def supervised_accs():
    return {seed: run_synth(seed, "none") for seed in SYNTH_SEEDS}


def test_criterion_3_semi_supervision_never_hurts(supervised_accs):
    t0 = time.time()
    semi = {seed: run_synth(seed, "stems") for seed in SYNTH_SEEDS}
    elapsed = time.time() - t0
    mean_sup = np.mean(list(supervised_accs.values()))
    mean_semi = np.mean(list(semi.values()))
    wins = sum(semi[s] > supervised_accs[s] for s in SYNTH_SEEDS)
    assert mean_semi >= mean_sup - 0.02, (
        f"semi {mean_semi:.3f} < supervised {mean_sup:.3f} - 0.02"
    )
    assert wins >= 3, f"semi-supervised strictly better in only {wins}/5 seeds"
    assert elapsed < 1800.0
    report(3, f"corpus-stem semi-supervision: mean {mean_semi:.3f} vs "
              f"supervised {mean_sup:.3f}, strictly better in {wins}/5 seeds "
              f"({elapsed:.0f}s)")


def test_criterion_4_random_string_variant(supervised_accs):
    t0 = time.time()
    rand = {seed: run_synth(seed, "random") for seed in SYNTH_SEEDS}
    elapsed = time.time() - t0
    mean_sup = np.mean(list(supervised_accs.values()))
    mean_rand = np.mean(list(rand.values()))
    assert mean_rand >= mean_sup - 0.02, (
        f"random-string semi {mean_rand:.3f} < supervised {mean_sup:.3f} - 0.02"
    )
    assert elapsed < 1800.0
    report(4, f"random-string semi-supervision: mean {mean_rand:.3f} vs "
              f"supervised {mean_sup:.3f} ({elapsed:.0f}s)")


# --- criterion 5: joint-objective decomposition -----------------------------

def test_criterion_5_loss_decomposition():
    vocab = Vocabulary.build("abcde", ["t=1", "t=2"])
    hp = Hyperparams(embed_dim=4, hidden=3, attn_dim=3)
    model = ModelParameters.init(vocab, hp, np.random.default_rng(5))
    rng = np.random.default_rng(55)
    chars = list("abcde")

    def word():
        return "".join(rng.choice(chars, size=rng.integers(1, 6)))

    worst = 0.0
    for _ in range(100):
        labeled = [LabeledExample(word(), (rng.choice(["t=1", "t=2"]),), word())
                   for _ in range(int(rng.integers(1, 4)))]
        unlabeled = [UnlabeledExample(word())
                     for _ in range(int(rng.integers(1, 4)))]
        mixed = float(batch_loss(model, labeled + unlabeled).value)
        split = (float(batch_loss(model, labeled).value)
                 + float(batch_loss(model, unlabeled).value))
        worst = max(worst, abs(mixed - split))
    assert worst <= 1e-9, f"max decomposition error {worst:.3g}"
    report(5, f"mixed-batch loss decomposes over 100 random batches "
              f"(max abs err {worst:.2e} <= 1e-9)")


# --- criterion 6: metric oracles --------------------------------------------

def brute_force_levenshtein(a, b):
    if not a:
        return len(b)
    if not b:
        return len(a)
    return min(
        brute_force_levenshtein(a[1:], b) + 1,
        brute_force_levenshtein(a, b[1:]) + 1,
        brute_force_levenshtein(a[1:], b[1:]) + (a[0] != b[0]),
    )


def test_criterion_6_edit_distance_oracles():
    strings = ["".join(t) for n in range(7)
               for t in itertools.product("ab", repeat=n)]
    assert len(strings) == 127
    for a in strings:
        for b in strings:
            assert edit_distance(a, b) == brute_force_levenshtein(a, b)
    rng = np.random.default_rng(6)
    letters = list("abcdef")
    for _ in range(1000):
        x, y, z = ("".join(rng.choice(letters, size=rng.integers(0, 13)))
                   for _ in range(3))
        assert edit_distance(x, x) == 0
        assert edit_distance(x, y) == edit_distance(y, x)
        assert edit_distance(x, z) <= edit_distance(x, y) + edit_distance(y, z)
    assert edit_distance("kitten", "sitting") == 3
    report(6, "edit distance matches the recursive oracle on all 127^2 pairs; "
              "metric axioms hold on 1000 random triples; kitten/sitting = 3")


# --- criterion 7: beam consistency ------------------------------------------

def _tiny_model(chars, seed):
    vocab = Vocabulary.build(chars, ["t=x"])
    hp = Hyperparams(embed_dim=3, hidden=2, attn_dim=2)
    return ModelParameters.init(vocab, hp, np.random.default_rng(seed))


def exhaustive_argmax(model, ids, max_len):
    from reinflect.layers import decoder_step
    from reinflect.model import BOS, encode_sequence

    vocab = model.vocab
    best = (-np.inf, None)
    for length in range(0, max_len + 1):
        for combo in itertools.product(range(1, vocab.n_out), repeat=length):
            h_mat, s = encode_sequence(model, ids)
            y = ad.lookup(model.embed, vocab.index[BOS])
            score = 0.0
            for sym in combo:
                s, dist = decoder_step(model.dec, model.attn, model.out_w,
                                       model.out_b, s, y, h_mat)
                score += float(np.log(dist.value[sym]))
                y = ad.lookup(model.embed, vocab.out_to_in[sym])
            if length < max_len:
                _, dist = decoder_step(model.dec, model.attn, model.out_w,
                                       model.out_b, s, y, h_mat)
                score += float(np.log(dist.value[vocab.eos_out]))
            if score > best[0]:
                best = (score, "".join(vocab.out_symbols[i] for i in combo))
    return best[1]


def test_criterion_7_beam_consistency():
    for seed in range(100):
        model = _tiny_model("abc", seed)
        rng = np.random.default_rng(seed + 7_000)
        word = "".join(rng.choice(list("abc"), size=rng.integers(1, 5)))
        ids = encode_input(model.vocab, UnlabeledExample(word))
        assert decode_beam(model, ids, width=1, max_len=6) == \
            decode_greedy(model, ids, max_len=6)
    for seed, max_len in [(0, 3), (1, 3), (2, 3), (3, 4), (4, 4)]:
        model = _tiny_model("abc", seed + 70)
        ids = encode_input(model.vocab, UnlabeledExample("ab"))
        width = model.vocab.n_out ** max_len
        assert decode_beam(model, ids, width=width, max_len=max_len) == \
            exhaustive_argmax(model, ids, max_len)
    report(7, "width-1 beam equals greedy on 100 random models; saturating "
              "beam recovers the enumerated argmax on 5 tiny instances")


# --- criterion 8: affix baseline fixture ------------------------------------

def test_criterion_8_affix_baseline():
    pairs = [LabeledExample("spielen", ("T",), "gespielt"),
             LabeledExample("lachen", ("T",), "gelacht"),
             LabeledExample("sagen", ("T",), "gesagt")]
    rules = extract_rules(pairs)
    assert apply_rules(rules, "lernen", ("T",)) == "gelernt"
    assert apply_rules(rules, "lernen", ("U",)) == "lernen"
    assert format_rules(rules) == format_rules(extract_rules(list(pairs)))
    report(8, "spielen fixture predicts gelernt; unseen tags copy; "
              "extraction is deterministic")


# --- criterion 9: determinism and persistence -------------------------------

def test_criterion_9_determinism_and_persistence(tmp_path):
    from reinflect.cli import main

    train_file = tmp_path / "train.tsv"
    train_file.write_text(
        "cat\tnum=PL\tcats\ndog\tnum=PL\tdogs\nmat\tnum=PL\tmats\n",
        encoding="utf-8")
    files = []
    for name in ("a.bin", "b.bin"):
        out = tmp_path / name
        rc = main(["train", "--labeled", str(train_file), "--epochs", "3",
                   "--seed", "9", "--embed-dim", "4", "--hidden", "3",
                   "--attn-dim", "3", "--model-out", str(out)])
        assert rc == 0
        files.append(out.read_bytes())
    assert files[0] == files[1], "same-seed training runs differ bitwise"

    model = load(tmp_path / "a.bin")
    rt = tmp_path / "rt.bin"
    save(model, rt)
    reloaded = load(rt)
    for (_, a), (_, b) in zip(model.named_parameters(),
                              reloaded.named_parameters()):
        assert a.value.tobytes() == b.value.tobytes()

    assert epochs_for_fraction("1/4") == 200
    assert epochs_for_fraction("1/16") == 400
    assert epochs_for_fraction("1/32") == 800
    report(9, "same-seed training is bitwise reproducible; save/load is "
              "bitwise lossless; epoch schedule 1/4->200 1/16->400 1/32->800")


# --- criterion 10: data filters ---------------------------------------------

def test_criterion_10_data_filters():
    tokens = [TokenCount("haus", 3), TokenCount("haus7", 5),
              TokenCount("zu", 1), TokenCount("mause", 2),
              TokenCount("ha-s", 4)]
    alphabet = Alphabet.from_chars("ahmsuez")
    sampled = {s.word for s in sample_corpus(tokens, alphabet, 10,
                                             min_count=2, seed=0)}
    assert sampled == {"haus", "mause"}
    strings = gen_random_strings(alphabet, 1000, seed=10)
    assert len(strings) == 1000
    for s in strings:
        assert 3 <= len(s.word) <= 20
        assert alphabet.contains_word(s.word)
    report(10, "corpus sampling drops out-of-alphabet and count-1 tokens; "
               "1000 random strings respect length bounds [3, 20]")
