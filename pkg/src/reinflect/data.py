"""Dataset ingestion, alphabet construction and unlabeled-data sampling.

File formats:
  labeled TSV    source_form <TAB> target_tag <TAB> target_form (UTF-8, LF)
  token file     token [<TAB> count]  (count defaults to 1)

All text is NFC-normalized on the way in so alphabet membership is exact.
"""

from __future__ import annotations

import logging
import unicodedata
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ParseError
from .model import LabeledExample, UnlabeledExample

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TokenCount:
    token: str
    count: int


@dataclass(frozen=True)
class Alphabet:
    """The character set of the language, in sorted order."""

    chars: tuple[str, ...]

    @classmethod
    def from_chars(cls, chars) -> "Alphabet":
        return cls(tuple(sorted(set(chars))))

    def __contains__(self, ch: str) -> bool:
        return ch in set(self.chars)

    def contains_word(self, word: str) -> bool:
        charset = set(self.chars)
        return all(c in charset for c in word)

    def __len__(self):
        return len(self.chars)


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


def parse_tag(tag: str) -> tuple[str, ...]:
    """Split a comma-delimited tag string into subtag symbols."""
    return tuple(t for t in tag.split(",") if t)


def read_labeled(path) -> list[LabeledExample]:
    examples = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(
                    f"{path}:{lineno}: expected 3 tab-separated columns, got {len(fields)}"
                )
            source, tag, target = (_nfc(x) for x in fields)
            if not source or not tag or not target:
                raise ParseError(f"{path}:{lineno}: empty field")
            subtags = parse_tag(tag)
            if not subtags:
                raise ParseError(f"{path}:{lineno}: tag has no subtags")
            examples.append(LabeledExample(source, subtags, target))
    return examples


def write_labeled(path, examples: list[LabeledExample]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for ex in examples:
            f.write(f"{ex.source_form}\t{','.join(ex.target_tag)}\t{ex.target_form}\n")


def read_tokens(path) -> list[TokenCount]:
    tokens = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) == 1:
                token, count = fields[0], 1
            elif len(fields) == 2:
                token = fields[0]
                try:
                    count = int(fields[1])
                except ValueError:
                    raise ParseError(f"{path}:{lineno}: bad count {fields[1]!r}")
            else:
                raise ParseError(
                    f"{path}:{lineno}: expected 1 or 2 columns, got {len(fields)}"
                )
            if not token or count < 1:
                raise ParseError(f"{path}:{lineno}: empty token or count < 1")
            tokens.append(TokenCount(_nfc(token), count))
    return tokens


def build_alphabet(examples: list[LabeledExample], extra_words=()) -> Alphabet:
    """Union of characters over all forms plus any extra words."""
    chars = set()
    for ex in examples:
        chars.update(_nfc(ex.source_form))
        chars.update(_nfc(ex.target_form))
    for w in extra_words:
        chars.update(_nfc(w))
    return Alphabet.from_chars(chars)


def collect_subtags(examples: list[LabeledExample]) -> list[str]:
    subtags = set()
    for ex in examples:
        subtags.update(ex.target_tag)
    return sorted(subtags)


def sample_corpus(
    tokens: list[TokenCount],
    alphabet: Alphabet,
    n: int,
    min_count: int = 2,
    seed: int = 0,
) -> list[UnlabeledExample]:
    """Sample n distinct corpus words passing the alphabet and count filters.

    Duplicate token entries are merged (counts summed).  Sampling is uniform
    without replacement over distinct types.
    """
    if n < 0:
        raise ConfigError(f"sample_corpus: n must be >= 0, got {n}")
    merged: dict[str, int] = {}
    for t in tokens:
        merged[t.token] = merged.get(t.token, 0) + t.count
    eligible = sorted(
        tok for tok, cnt in merged.items()
        if cnt >= min_count and alphabet.contains_word(tok)
    )
    if len(eligible) <= n:
        if len(eligible) < n:
            logger.warning(
                "sample_corpus: only %d of %d requested tokens pass the filters",
                len(eligible), n,
            )
        return [UnlabeledExample(t) for t in eligible]
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(eligible), size=n, replace=False)
    return [UnlabeledExample(eligible[i]) for i in idx]


def gen_random_strings(
    alphabet: Alphabet,
    n: int,
    min_len: int = 3,
    max_len: int = 20,
    seed: int = 0,
) -> list[UnlabeledExample]:
    """Uniform random strings over the alphabet, lengths in [min_len, max_len]."""
    if len(alphabet) == 0:
        raise ConfigError("gen_random_strings: empty alphabet")
    if not 1 <= min_len <= max_len:
        raise ConfigError(
            f"gen_random_strings: need 1 <= min_len <= max_len, got [{min_len}, {max_len}]"
        )
    rng = np.random.default_rng(seed)
    chars = alphabet.chars
    out = []
    for _ in range(n):
        length = int(rng.integers(min_len, max_len + 1))
        out.append(UnlabeledExample(
            "".join(chars[int(i)] for i in rng.integers(0, len(chars), size=length))
        ))
    return out


def apply_ratio(labeled_count: int, unlabeled: list, ratio: float = 4.0,
                seed: int = 0) -> list:
    """Subsample the unlabeled pool to round(ratio * labeled_count) examples."""
    if ratio < 0:
        raise ConfigError(f"apply_ratio: ratio must be >= 0, got {ratio}")
    target = round(ratio * labeled_count)
    if target >= len(unlabeled):
        if target > len(unlabeled):
            logger.warning(
                "apply_ratio: requested %d unlabeled examples but only %d available",
                target, len(unlabeled),
            )
        return list(unlabeled)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(unlabeled), size=target, replace=False)
    return [unlabeled[i] for i in idx]
