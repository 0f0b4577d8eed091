import numpy as np
import pytest

from reinflect.data import (
    Alphabet,
    TokenCount,
    apply_ratio,
    build_alphabet,
    collect_subtags,
    gen_random_strings,
    read_labeled,
    read_tokens,
    sample_corpus,
    write_labeled,
)
from reinflect.errors import ConfigError, ParseError
from reinflect.model import LabeledExample, UnlabeledExample


def test_read_labeled(tmp_path):
    p = tmp_path / "train.tsv"
    p.write_text("smiling\tpos=V,tense=PST\tsmiled\n", encoding="utf-8")
    examples = read_labeled(p)
    assert examples == [LabeledExample("smiling", ("pos=V", "tense=PST"), "smiled")]


def test_read_labeled_wrong_columns_names_line(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("good\ttag\tform\nonly\ttwo\n", encoding="utf-8")
    with pytest.raises(ParseError, match=":2"):
        read_labeled(p)


def test_read_labeled_empty_field(tmp_path):
    p = tmp_path / "bad.tsv"
    p.write_text("a\t\tb\n", encoding="utf-8")
    with pytest.raises(ParseError):
        read_labeled(p)


def test_read_labeled_empty_file(tmp_path):
    p = tmp_path / "empty.tsv"
    p.write_text("", encoding="utf-8")
    assert read_labeled(p) == []


def test_labeled_roundtrip(tmp_path):
    examples = [LabeledExample("años", ("num=PL",), "año"),
                LabeledExample("cat", ("t=1", "t=2"), "cats")]
    p = tmp_path / "out.tsv"
    write_labeled(p, examples)
    assert read_labeled(p) == examples


def test_read_labeled_nfc_normalization(tmp_path):
    # decomposed n + combining tilde reads equal to the precomposed form
    p = tmp_path / "nfc.tsv"
    p.write_text("año\tt\taño\n", encoding="utf-8")
    (ex,) = read_labeled(p)
    assert ex.source_form == ex.target_form == "año"


def test_read_tokens(tmp_path):
    p = tmp_path / "tok.txt"
    p.write_text("haus\t3\nzu\n", encoding="utf-8")
    assert read_tokens(p) == [TokenCount("haus", 3), TokenCount("zu", 1)]


def test_build_alphabet():
    examples = [LabeledExample("ab", ("t",), "bc")]
    assert build_alphabet(examples).chars == ("a", "b", "c")


def test_build_alphabet_empty():
    assert len(build_alphabet([])) == 0


def test_build_alphabet_monotone_under_extra_words():
    examples = [LabeledExample("ab", ("t",), "bc")]
    base = set(build_alphabet(examples).chars)
    grown = set(build_alphabet(examples, ["xyz"]).chars)
    assert base <= grown


def test_collect_subtags():
    examples = [LabeledExample("a", ("n=SG", "c=NOM"), "b"),
                LabeledExample("a", ("n=PL",), "b")]
    assert collect_subtags(examples) == ["c=NOM", "n=PL", "n=SG"]


def test_sample_corpus_filters():
    tokens = [TokenCount("Haus", 3), TokenCount("haus7", 5), TokenCount("zu", 1)]
    alphabet = Alphabet.from_chars("Hausz")
    sample = sample_corpus(tokens, alphabet, 10, min_count=2, seed=0)
    assert [s.word for s in sample] == ["Haus"]


def test_sample_corpus_n_zero():
    assert sample_corpus([TokenCount("ab", 5)], Alphabet.from_chars("ab"), 0) == []


def test_sample_corpus_deterministic():
    tokens = [TokenCount(w, 2) for w in
              ("aa", "ab", "ba", "bb", "aab", "abb", "bba", "bab")]
    alphabet = Alphabet.from_chars("ab")
    a = sample_corpus(tokens, alphabet, 4, seed=7)
    b = sample_corpus(tokens, alphabet, 4, seed=7)
    assert a == b
    c = sample_corpus(tokens, alphabet, 4, seed=8)
    assert a != c  # overwhelmingly likely for distinct seeds


def test_sample_corpus_postconditions():
    tokens = [TokenCount(w, c) for w, c in
              [("ab", 2), ("ba", 1), ("abc", 4), ("aa", 9), ("a!", 8)]]
    alphabet = Alphabet.from_chars("ab")
    for s in sample_corpus(tokens, alphabet, 3, min_count=2, seed=1):
        assert alphabet.contains_word(s.word)


def test_gen_random_strings_bounds():
    alphabet = Alphabet.from_chars("abcdefghij")
    out = gen_random_strings(alphabet, 1000, seed=3)
    assert len(out) == 1000
    for s in out:
        assert 3 <= len(s.word) <= 20
        assert alphabet.contains_word(s.word)


def test_gen_random_strings_golden_fixture():
    # frozen output of one seeded run; guards the sampling procedure
    alphabet = Alphabet.from_chars("abc")
    got = [s.word for s in gen_random_strings(alphabet, 3, seed=42)]
    assert got == gen_random_golden()
    assert got == [s.word for s in gen_random_strings(alphabet, 3, seed=42)]


def gen_random_golden():
    from reinflect.data import gen_random_strings as g
    # recorded once from seed 42 over alphabet {a,b,c}
    return ["cbbb", "acaabcccccbacbbbac", "bbcbbbaabcaccabac"]


def test_gen_random_strings_fixed_length():
    alphabet = Alphabet.from_chars("ab")
    out = gen_random_strings(alphabet, 50, min_len=5, max_len=5, seed=0)
    assert all(len(s.word) == 5 for s in out)


def test_gen_random_strings_empty_alphabet():
    with pytest.raises(ConfigError):
        gen_random_strings(Alphabet.from_chars(""), 1)


def test_apply_ratio_default():
    pool = [UnlabeledExample(f"w{i}") for i in range(500)]
    assert len(apply_ratio(50, pool, ratio=4.0, seed=0)) == 200


def test_apply_ratio_zero():
    pool = [UnlabeledExample("w")]
    assert apply_ratio(10, pool, ratio=0.0) == []


def test_apply_ratio_half():
    pool = [UnlabeledExample(f"w{i}") for i in range(100)]
    assert len(apply_ratio(64, pool, ratio=0.5, seed=0)) == 32


def test_apply_ratio_pool_too_small_returns_all():
    pool = [UnlabeledExample(f"w{i}") for i in range(5)]
    assert apply_ratio(10, pool, ratio=4.0) == pool
