"""Sentence-level BLEU with multi-reference clipping.

Answers in this domain are short, so only orders 1 and 2 are supported and
scoring is per sentence: corpus-level brevity accounting would let long items
mask truncated ones.
"""

from __future__ import annotations

import math
from typing import Sequence

from .ngrams import ngram_counts

_SUPPORTED_ORDERS = (1, 2)


def bleu_n(candidate: Sequence[str], references: Sequence[Sequence[str]], n: int) -> float:
    if n not in _SUPPORTED_ORDERS:
        raise ValueError(f"n must be one of {_SUPPORTED_ORDERS}, got {n}")
    if not references:
        raise ValueError("at least one reference is required")

    log_precision_sum = 0.0
    for order in range(1, n + 1):
        cand_counts = ngram_counts(candidate, order)
        total = sum(cand_counts.values())
        if total == 0:
            return 0.0
        ref_counts = [ngram_counts(ref, order) for ref in references]
        clipped = sum(
            min(count, max(rc[gram] for rc in ref_counts))
            for gram, count in cand_counts.items()
        )
        if clipped == 0:
            return 0.0
        log_precision_sum += math.log(clipped / total)

    c = len(candidate)
    # Effective reference length: closest to the candidate, ties to the shorter.
    r = len(min(references, key=lambda ref: (abs(len(ref) - c), len(ref))))
    brevity = 1.0 if c >= r else math.exp(1.0 - r / c)
    return brevity * math.exp(log_precision_sum / n)
