"""Consensus scoring via TF-IDF n-gram cosine, orders 1 through 4.

Document frequency is counted over reference sets only, once per corpus; the
per-item score is 10 times the mean over orders of the mean cosine against
each reference. An n-gram outside every reference set gets df clamped to 1
(IDF = log N) rather than a division by zero.
"""

from __future__ import annotations

import math
from typing import Sequence

from .ngrams import ngram_counts, ngrams

MAX_ORDER = 4

Corpus = Sequence[tuple[Sequence[str], Sequence[Sequence[str]]]]


def _document_frequencies(corpus: Corpus) -> list[dict[tuple[str, ...], int]]:
    tables: list[dict[tuple[str, ...], int]] = [{} for _ in range(MAX_ORDER)]
    for _, references in corpus:
        for order in range(1, MAX_ORDER + 1):
            seen = set()
            for ref in references:
                seen.update(ngrams(ref, order))
            table = tables[order - 1]
            for gram in seen:
                table[gram] = table.get(gram, 0) + 1
    return tables


def _tfidf(tokens: Sequence[str], order: int, df: dict, n_items: int) -> dict:
    return {
        gram: count * math.log(n_items / max(1, df.get(gram, 0)))
        for gram, count in ngram_counts(tokens, order).items()
    }


def _cosine(cand_vec: dict, ref_vec: dict, norm_sq_c: float, norm_sq_r: float) -> float:
    if norm_sq_c == 0.0 or norm_sq_r == 0.0:
        return 0.0
    dot = sum(value * ref_vec.get(gram, 0.0) for gram, value in cand_vec.items())
    # All components are non-negative, so squaring loses no sign; dividing the
    # squared quantities keeps identical vectors at exactly 1.0.
    return min(1.0, math.sqrt(dot * dot / (norm_sq_c * norm_sq_r)))


def cider(corpus: Corpus) -> tuple[list[float], float]:
    if not corpus:
        raise ValueError("corpus must be non-empty")
    n_items = len(corpus)
    df_tables = _document_frequencies(corpus)

    per_item = []
    for candidate, references in corpus:
        order_means = []
        for order in range(1, MAX_ORDER + 1):
            df = df_tables[order - 1]
            cand_vec = _tfidf(candidate, order, df, n_items)
            norm_sq_c = sum(v * v for v in cand_vec.values())
            similarities = []
            for ref in references:
                ref_vec = _tfidf(ref, order, df, n_items)
                norm_sq_r = sum(v * v for v in ref_vec.values())
                similarities.append(_cosine(cand_vec, ref_vec, norm_sq_c, norm_sq_r))
            order_means.append(sum(similarities) / len(similarities))
        per_item.append(10.0 * sum(order_means) / MAX_ORDER)
    return per_item, sum(per_item) / n_items
