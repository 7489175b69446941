"""Exact-match METEOR with the standard fragmentation penalty.

Stemming and synonym stages are deliberately omitted: they pull in external
lexical resources and the scores here only need to be self-consistent. Note
that even a verbatim answer scores slightly below 1.0 because one chunk over
m matches still carries a (1/m)^beta penalty.
"""

from __future__ import annotations

from collections import defaultdict, deque
from typing import Sequence

ALPHA = 0.9
BETA = 3.0
GAMMA = 0.5


def _align(candidate: Sequence[str], reference: Sequence[str]) -> list[tuple[int, int]]:
    """Leftmost-greedy exact matching; each side is used at most once."""
    free = defaultdict(deque)
    for idx, token in enumerate(reference):
        free[token].append(idx)
    pairs = []
    for ci, token in enumerate(candidate):
        slots = free.get(token)
        if slots:
            pairs.append((ci, slots.popleft()))
    return pairs


def _chunk_count(pairs: list[tuple[int, int]]) -> int:
    """Number of maximal runs that are contiguous in both texts."""
    chunks = 0
    prev_ci, prev_ri = None, None
    for ci, ri in pairs:
        if prev_ci is None or ci != prev_ci + 1 or ri != prev_ri + 1:
            chunks += 1
        prev_ci, prev_ri = ci, ri
    return chunks


def meteor(candidate: Sequence[str], references: Sequence[Sequence[str]]) -> float:
    if not references:
        raise ValueError("at least one reference is required")
    best = 0.0
    for ref in references:
        pairs = _align(candidate, ref)
        matches = len(pairs)
        if matches == 0:
            continue
        precision = matches / len(candidate)
        recall = matches / len(ref)
        f_mean = precision * recall / (ALPHA * precision + (1 - ALPHA) * recall)
        penalty = GAMMA * (_chunk_count(pairs) / matches) ** BETA
        best = max(best, f_mean * (1 - penalty))
    return best
