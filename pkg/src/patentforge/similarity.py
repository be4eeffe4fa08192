"""Token-level similarity primitives: term-frequency cosine, BLEU-1 and BLEU-2.

Candidate/reference orientation for scoring a component against a claim
feature: the (short) component name is the candidate, the feature text is
the reference, so the scores measure precision of the name within the
feature. BLEU-2 over a single-token candidate is defined as 0. There is no
stopword removal, no stemming and no smoothing.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .drawings import ComponentPair

TokenSequence = list

_SPLIT_RE = re.compile(r"[\W_]+")


@dataclass(frozen=True)
class SimilarityScore:
    """Per-pair metric bundle; combined is the unweighted mean of the three."""

    cosine: float
    bleu1: float
    bleu2: float
    combined: float

    def to_dict(self) -> dict:
        return {
            "cosine": self.cosine,
            "bleu1": self.bleu1,
            "bleu2": self.bleu2,
            "combined": self.combined,
        }

    @classmethod
    def from_dict(cls, data: dict) -> SimilarityScore:
        return cls(
            cosine=data["cosine"],
            bleu1=data["bleu1"],
            bleu2=data["bleu2"],
            combined=data["combined"],
        )


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character; digits are kept."""
    return [t for t in _SPLIT_RE.split(text.lower()) if t]


def cosine(a: list[str], b: list[str]) -> float:
    """Cosine between term-frequency vectors; 0.0 when either side is empty."""
    if not a or not b:
        return 0.0
    ca, cb = Counter(a), Counter(b)
    dot = sum(ca[t] * cb[t] for t in ca.keys() & cb.keys())
    if dot == 0:
        return 0.0
    norm = math.sqrt(sum(v * v for v in ca.values())) * math.sqrt(sum(v * v for v in cb.values()))
    return dot / norm


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu_n(candidate: list[str], reference: list[str], n: int) -> float:
    """Modified n-gram precision with clipping times a brevity penalty.

    The brevity penalty is exp(1 - |ref|/|cand|) when the candidate is
    shorter than the reference, 1 otherwise. A candidate with fewer than n
    tokens, or with zero clipped matches, scores 0.
    """
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    if len(candidate) < n:
        return 0.0
    cand_counts = _ngrams(candidate, n)
    ref_counts = _ngrams(reference, n)
    clipped = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
    if clipped == 0:
        return 0.0
    precision = clipped / sum(cand_counts.values())
    if len(candidate) < len(reference):
        bp = math.exp(1.0 - len(reference) / len(candidate))
    else:
        bp = 1.0
    return precision * bp


def score_pair(feature_text: str, component: "ComponentPair") -> SimilarityScore:
    """Score one component name against one claim feature text."""
    candidate = tokenize(component.name)
    reference = tokenize(feature_text)
    c = cosine(candidate, reference)
    b1 = bleu_n(candidate, reference, 1)
    b2 = bleu_n(candidate, reference, 2)
    return SimilarityScore(cosine=c, bleu1=b1, bleu2=b2, combined=(c + b1 + b2) / 3.0)
