"""Bundled scoring of raw-string corpora with all five metric columns."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .bleu import bleu_n
from .cider import cider
from .meteor import meteor
from .rouge import rouge_l
from .tokenizer import tokenize


@dataclass(frozen=True)
class MetricScores:
    """One row of metric values; sentence metrics in [0,1], cider in [0,10]."""

    bleu1: float
    bleu2: float
    meteor: float
    rouge_l: float
    cider: float

    def __post_init__(self) -> None:
        for name in ("bleu1", "bleu2", "meteor", "rouge_l"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name}={value} outside [0, 1]")
        if not 0.0 <= self.cider <= 10.0:
            raise ValueError(f"cider={self.cider} outside [0, 10]")

    def to_dict(self) -> dict[str, float]:
        return {
            "bleu1": self.bleu1,
            "bleu2": self.bleu2,
            "meteor": self.meteor,
            "rouge_l": self.rouge_l,
            "cider": self.cider,
        }


def mean_scores(items: Sequence[MetricScores]) -> MetricScores:
    if not items:
        raise ValueError("cannot average zero score rows")
    n = len(items)
    return MetricScores(
        bleu1=sum(s.bleu1 for s in items) / n,
        bleu2=sum(s.bleu2 for s in items) / n,
        meteor=sum(s.meteor for s in items) / n,
        rouge_l=sum(s.rouge_l for s in items) / n,
        cider=sum(s.cider for s in items) / n,
    )


def score_all(
    corpus: Sequence[tuple[str, Sequence[str]]],
) -> tuple[list[MetricScores], MetricScores]:
    """Score raw (candidate, references) strings; returns per-item rows + means.

    The CIDEr IDF table is built from this whole corpus, so per-item cider
    values are only comparable within one score_all call.
    """
    if not corpus:
        raise ValueError("corpus must be non-empty")
    tokenized = [
        (tokenize(candidate), [tokenize(ref) for ref in references])
        for candidate, references in corpus
    ]
    cider_per_item, _ = cider(tokenized)
    per_item = [
        MetricScores(
            bleu1=bleu_n(cand, refs, 1),
            bleu2=bleu_n(cand, refs, 2),
            meteor=meteor(cand, refs),
            rouge_l=rouge_l(cand, refs),
            cider=item_cider,
        )
        for (cand, refs), item_cider in zip(tokenized, cider_per_item)
    ]
    return per_item, mean_scores(per_item)
