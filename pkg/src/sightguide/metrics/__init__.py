"""From-scratch NLG metrics over the canonical tokenizer.

All functions are pure and deterministic; multi-reference aggregation is max
over references for the sentence metrics and mean for cider.
"""

from .bleu import bleu_n
from .cider import cider
from .meteor import meteor
from .rouge import rouge_l
from .scores import MetricScores, mean_scores, score_all
from .tokenizer import Tokens, tokenize

__all__ = [
    "MetricScores",
    "Tokens",
    "bleu_n",
    "cider",
    "mean_scores",
    "meteor",
    "rouge_l",
    "score_all",
    "tokenize",
]
