"""ROUGE-N and ROUGE-L over token sequences.

Scores are fractions in [0, 1]; scaling to percentages is left to reporting.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .errors import BadN


class RougeScore(NamedTuple):
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "RougeScore":
        if precision + recall > 0:
            return cls(precision, recall, 2 * precision * recall / (precision + recall))
        return cls(precision, recall, 0.0)


ZERO = RougeScore(0.0, 0.0, 0.0)


@dataclass(frozen=True)
class NGramCounts:
    n: int
    counts: Counter

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def ngrams(tokens: Sequence[str], n: int) -> NGramCounts:
    if n < 1:
        raise BadN(f"n must be >= 1, got {n}")
    tokens = tuple(tokens)
    return NGramCounts(n, Counter(tokens[i:i + n] for i in range(len(tokens) - n + 1)))


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def rouge_n(candidate: Sequence[str], reference: Sequence[str], n: int = 1) -> RougeScore:
    cand = ngrams(candidate, n)
    ref = ngrams(reference, n)
    overlap = sum((cand.counts & ref.counts).values())
    return RougeScore.from_pr(_ratio(overlap, cand.total), _ratio(overlap, ref.total))


def lcs_length(a: Sequence, b: Sequence) -> int:
    """Length of the longest common subsequence, O(len(a)*len(b)) time."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            if x == y:
                cur.append(prev[j] + 1)
            else:
                cur.append(cur[j] if cur[j] > prev[j + 1] else prev[j + 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate: Sequence[str], reference: Sequence[str]) -> RougeScore:
    lcs = lcs_length(candidate, reference)
    return RougeScore.from_pr(_ratio(lcs, len(candidate)), _ratio(lcs, len(reference)))


def score_tokens(candidate: Sequence[str], reference: Sequence[str]) -> dict[str, RougeScore]:
    return {
        "rouge1": rouge_n(candidate, reference, 1),
        "rouge2": rouge_n(candidate, reference, 2),
        "rougeL": rouge_l(candidate, reference),
    }


def score_candidate(candidate_sentences: Sequence[Sequence[str]],
                    reference: Sequence[str]) -> dict[str, RougeScore]:
    """Score the in-order concatenation of ``candidate_sentences``."""
    candidate = [tok for sent in candidate_sentences for tok in sent]
    return score_tokens(candidate, reference)
