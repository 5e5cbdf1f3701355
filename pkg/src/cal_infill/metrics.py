"""Evaluation metrics: BLEU-2, ROUGE-L, length-error and search-cost stats.

Tokenization for the text metrics is fixed and documented for
reproducibility: lowercase, split on Unicode whitespace, punctuation kept
attached to its token. BLEU-2 uses no smoothing; a zero modified precision
zeroes the score. When neither side has bigrams (single-token texts) the
bigram precision is vacuously 1 so that identical texts always score 1.0.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import ValidationError
from .types import SearchResult


def metric_tokenize(text: str) -> list[str]:
    return text.lower().split()


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _modified_precision(candidate: Sequence[str], reference: Sequence[str], n: int) -> float:
    cand = _ngram_counts(candidate, n)
    total = sum(cand.values())
    if total == 0:
        ref_total = max(len(reference) - n + 1, 0)
        return 1.0 if ref_total == 0 else 0.0
    ref = _ngram_counts(reference, n)
    clipped = sum(min(count, ref[gram]) for gram, count in cand.items())
    return clipped / total


def bleu2(candidate: str, reference: str) -> float:
    """Sentence BLEU with unigram+bigram precisions and brevity penalty."""
    cand = metric_tokenize(candidate)
    ref = metric_tokenize(reference)
    if not cand:
        return 0.0
    p1 = _modified_precision(cand, ref, 1)
    p2 = _modified_precision(cand, ref, 2)
    if p1 == 0.0 or p2 == 0.0:
        return 0.0
    bp = 1.0 if len(cand) > len(ref) else math.exp(1.0 - len(ref) / len(cand))
    return bp * math.sqrt(p1 * p2)


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # Two-row dynamic program; the test oracle keeps the full table.
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            curr[j] = prev[j - 1] + 1 if x == y else max(prev[j], curr[j - 1])
        prev = curr
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """LCS-based precision/recall/F1 over tokens.

    Empty vs empty scores (1, 1, 1) by convention; empty vs non-empty (0, 0, 0).
    """
    cand = metric_tokenize(candidate)
    ref = metric_tokenize(reference)
    if not cand and not ref:
        return RougeScore(1.0, 1.0, 1.0)
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    lcs = _lcs_length(cand, ref)
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    f1 = 0.0 if precision + recall == 0.0 else 2.0 * precision * recall / (precision + recall)
    return RougeScore(precision, recall, f1)


def length_error_stats(pairs: Sequence[tuple[int, int]], ks: Sequence[int] = (2,)) -> dict[str, float]:
    """Aggregate |l_hat - oracle| statistics over (l_hat, oracle_length) pairs."""
    if not pairs:
        raise ValidationError("length_error_stats needs at least one (l_hat, oracle) pair")
    errors = [abs(l_hat - oracle) for l_hat, oracle in pairs]
    n = len(errors)
    stats = {
        "mean_abs_error": math.fsum(errors) / n,
        "exact_rate": sum(e == 0 for e in errors) / n,
    }
    for k in ks:
        stats[f"within_{k}_rate"] = sum(e <= k for e in errors) / n
    return stats


def search_cost_stats(results: Sequence[SearchResult]) -> dict[str, float]:
    """Mean and max probe counts over search results."""
    if not results:
        raise ValidationError("search_cost_stats needs at least one result")
    counts = [r.probe_count for r in results]
    return {
        "mean_probe_count": math.fsum(counts) / len(counts),
        "max_probe_count": float(max(counts)),
    }
