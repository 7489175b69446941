"""ROUGE-L: longest-common-subsequence F-measure, best reference wins."""

from __future__ import annotations

from typing import Sequence

BETA = 1.2


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for token in a:
        row = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                row.append(prev[j - 1] + 1)
            else:
                row.append(max(prev[j], row[j - 1]))
        prev = row
    return prev[-1]


def rouge_l(candidate: Sequence[str], references: Sequence[Sequence[str]]) -> float:
    if not references:
        raise ValueError("at least one reference is required")
    beta_sq = BETA * BETA
    best = 0.0
    for ref in references:
        lcs = _lcs_length(candidate, ref)
        if lcs == 0:
            continue
        recall = lcs / len(ref)
        precision = lcs / len(candidate)
        f_measure = (1 + beta_sq) * recall * precision / (recall + beta_sq * precision)
        best = max(best, f_measure)
    return best
