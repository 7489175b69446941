"""Canonical tokenizer shared by every metric.

One rule everywhere so scores are comparable: lowercase, split on whitespace,
strip leading and trailing ASCII punctuation per token, drop empties. Interior
punctuation (contractions, decimals) survives.
"""

from __future__ import annotations

import string

Tokens = list[str]


def tokenize(text: str) -> Tokens:
    tokens = []
    for raw in text.lower().split():
        token = raw.strip(string.punctuation)
        if token:
            tokens.append(token)
    return tokens
