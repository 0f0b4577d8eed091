"""Prefix/suffix substitution-rule baseline.

Each training pair is split into prefix, middle (longest common substring)
and suffix.  The residues define one prefix rule and one suffix rule per
pair, plus longer suffix rules extended into the shared middle.  Prediction
applies the longest matching suffix rule for the tag and the tag's
best-supported prefix rule; with no matching rule the input is copied.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .model import LabeledExample

PREFIX = "prefix"
SUFFIX = "suffix"


@dataclass(frozen=True)
class AffixRule:
    kind: str
    source_affix: str
    target_affix: str
    tag: str
    support: int


def canonical_tag(tag: tuple[str, ...]) -> str:
    return ",".join(tag)


def longest_common_substring(a: str, b: str) -> tuple[int, int, int]:
    """(start_in_a, start_in_b, length) of the longest common substring.

    Ties resolve to the smallest start in `a`, then in `b`.
    """
    best = (0, 0, 0)
    if not a or not b:
        return best
    prev = [0] * (len(b) + 1)
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best[2]:
                    best = (i - cur[j], j - cur[j], cur[j])
        prev = cur
    return best


class RuleTable:
    """Substitution rules keyed by (kind, source_affix, tag).

    Among rules sharing a key, the highest-support target wins (ties go to
    the lexicographically smallest target), so extraction is deterministic.
    """

    def __init__(self, counts: Counter):
        self._rules: dict[tuple[str, str, str], tuple[str, int]] = {}
        for (kind, src, tag, tgt), support in sorted(counts.items()):
            key = (kind, src, tag)
            cur = self._rules.get(key)
            if cur is None or support > cur[1]:
                self._rules[key] = (tgt, support)
        self._by_tag: dict[str, dict[str, list]] = {}
        for (kind, src, tag), (tgt, support) in self._rules.items():
            self._by_tag.setdefault(tag, {PREFIX: [], SUFFIX: []})[kind].append(
                AffixRule(kind, src, tgt, tag, support)
            )

    def __len__(self):
        return len(self._rules)

    def rules(self) -> list[AffixRule]:
        out = [AffixRule(k, s, t, tag, sup)
               for (k, s, tag), (t, sup) in self._rules.items()]
        out.sort(key=lambda r: (r.tag, r.kind, -len(r.source_affix), r.source_affix))
        return out

    def suffix_rules(self, tag: str) -> list[AffixRule]:
        return self._by_tag.get(tag, {}).get(SUFFIX, [])

    def prefix_rules(self, tag: str) -> list[AffixRule]:
        return self._by_tag.get(tag, {}).get(PREFIX, [])


def extract_rules(train: list[LabeledExample]) -> RuleTable:
    counts: Counter = Counter()
    for ex in train:
        src, tgt = ex.source_form, ex.target_form
        tag = canonical_tag(ex.target_tag)
        i, j, length = longest_common_substring(src, tgt)
        if length == 0:
            # no shared middle: the whole-string mapping is the only rule
            counts[(SUFFIX, src, tag, tgt)] += 1
            continue
        counts[(PREFIX, src[:i], tag, tgt[:j])] += 1
        counts[(SUFFIX, src[i + length:], tag, tgt[j + length:])] += 1
        # more specific suffix rules extended into the shared middle
        for k in range(1, length + 1):
            counts[(SUFFIX, src[i + length - k:], tag, tgt[j + length - k:])] += 1
    return RuleTable(counts)


def apply_rules(rules: RuleTable, source_form: str, tag) -> str:
    """Predict a target form; unchanged copy when no rule matches the tag."""
    tag_str = canonical_tag(tag) if not isinstance(tag, str) else tag
    matching = [r for r in rules.suffix_rules(tag_str)
                if source_form.endswith(r.source_affix)]
    prefix_rules = rules.prefix_rules(tag_str)
    if not matching and not prefix_rules:
        return source_form
    result = source_form
    if matching:
        matching.sort(key=lambda r: (-len(r.source_affix), -r.support,
                                     r.source_affix, r.target_affix))
        best = matching[0]
        cut = len(result) - len(best.source_affix)
        result = result[:cut] + best.target_affix
    if prefix_rules:
        best_p = sorted(prefix_rules,
                        key=lambda r: (-r.support, r.source_affix, r.target_affix))[0]
        if best_p.source_affix and result.startswith(best_p.source_affix):
            result = result[len(best_p.source_affix):]
        result = best_p.target_affix + result
    return result


def format_rules(rules: RuleTable) -> str:
    """Human-readable rule table, one rule per line."""
    lines = [f"{r.tag}\t{r.kind}\t{r.source_affix!r}->{r.target_affix!r}\t"
             f"support={r.support}" for r in rules.rules()]
    return "\n".join(lines) + ("\n" if lines else "")
