"""Evaluation harness for VQA annotation files with crowd answers.

Reads annotations (JSON array: image, question, ten crowd answers, optional
answer_type/answerable), joins model predictions, buckets questions into the
four answer categories, and builds per-category metric tables with a
count-weighted average row. Also aggregates 0..10 manual helpfulness scores
per task.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

from .domain import ManualScore, TaskHint
from .errors import ConfigError
from .metrics import MetricScores, mean_scores, score_all


class Category(str, Enum):
    UNANSWERABLE = "unanswerable"
    OTHER = "other"
    YES_NO = "yes/no"
    NUMBER = "number"


# Table row order, and also the tie-break priority for majority votes
# (earlier wins a tie).
CATEGORY_ORDER = (
    Category.UNANSWERABLE,
    Category.YES_NO,
    Category.NUMBER,
    Category.OTHER,
)
REPORT_ORDER = (
    Category.UNANSWERABLE,
    Category.OTHER,
    Category.YES_NO,
    Category.NUMBER,
)
CATEGORY_LABELS = {
    Category.UNANSWERABLE: "Unanswerable",
    Category.OTHER: "Other",
    Category.YES_NO: "Yes/No",
    Category.NUMBER: "Number",
}
AVG_LABEL = "Avg."

METRIC_COLUMNS = ("bleu1", "bleu2", "meteor", "rouge_l", "cider")

_NUMBER_RE = re.compile(r"[+-]?\d+(?:[.,]\d+)?")
_UNANSWERABLE_MARKERS = frozenset({"unanswerable", "unsuitable", "unsuitable image"})


@dataclass(frozen=True)
class EvalItem:
    """One evaluation question with its crowd answers and model candidate."""

    image_name: str
    question: str
    references: tuple[str, ...]
    answer_type: Optional[Category] = None
    answerable: Optional[bool] = None
    reference_types: tuple[Optional[Category], ...] = ()
    candidate: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.references:
            raise ValueError(f"item {self.image_name!r} has no usable answers")
        if any(not ref.strip() for ref in self.references):
            raise ValueError(f"item {self.image_name!r} has a blank reference")
        if self.reference_types and len(self.reference_types) != len(self.references):
            raise ValueError("reference_types must align with references")


def infer_answer_category(text: str) -> Category:
    """Best-effort category of one crowd answer, from its text alone."""
    normalized = text.strip().lower()
    if normalized in ("yes", "no"):
        return Category.YES_NO
    if _NUMBER_RE.fullmatch(normalized):
        return Category.NUMBER
    if normalized in _UNANSWERABLE_MARKERS:
        return Category.UNANSWERABLE
    return Category.OTHER


def categorize(item: EvalItem) -> Category:
    """Bucket an item into exactly one of the four answer categories.

    Explicit signals win: answerable == False or an unanswerable answer_type
    forces Unanswerable, any other answer_type maps directly. Without an
    answer_type the per-answer types vote, ties broken by CATEGORY_ORDER.
    """
    if item.answerable is not None and not item.answerable:
        return Category.UNANSWERABLE
    if item.answer_type is not None:
        return item.answer_type
    types = item.reference_types or (None,) * len(item.references)
    votes = Counter(
        explicit if explicit is not None else infer_answer_category(ref)
        for ref, explicit in zip(item.references, types)
    )
    top = max(votes.values())
    return next(cat for cat in CATEGORY_ORDER if votes.get(cat) == top)


def _schema_error(index: int, field: str, problem: str) -> ConfigError:
    return ConfigError(f"annotation {index}, field {field!r}: {problem}")


def _parse_category(raw: object, index: int, field: str) -> Category:
    try:
        return Category(str(raw).lower())
    except ValueError:
        raise _schema_error(index, field, f"unknown category {raw!r}") from None


def _parse_item(entry: object, index: int) -> EvalItem:
    if not isinstance(entry, dict):
        raise _schema_error(index, "", "not an object")
    image = entry.get("image")
    if not isinstance(image, str) or not image:
        raise _schema_error(index, "image", "must be a non-empty string")
    question = entry.get("question")
    if not isinstance(question, str) or not question.strip():
        raise _schema_error(index, "question", "must be a non-empty string")
    answers = entry.get("answers")
    if not isinstance(answers, list) or not answers:
        raise _schema_error(index, "answers", "must be a non-empty array")
    references: list[str] = []
    reference_types: list[Optional[Category]] = []
    for position, answer in enumerate(answers):
        if not isinstance(answer, dict) or not isinstance(answer.get("answer"), str):
            raise _schema_error(
                index, "answers", f"entry {position} must be an object with an 'answer' string"
            )
        text = answer["answer"]
        if not text.strip():
            continue  # blank crowd answers carry no signal
        references.append(text)
        raw_type = answer.get("answer_type")
        reference_types.append(
            None if raw_type is None else _parse_category(raw_type, index, "answers")
        )
    if not references:
        raise _schema_error(index, "answers", "all answers are empty")
    answer_type = entry.get("answer_type")
    answerable = entry.get("answerable")
    if answerable is not None and not isinstance(answerable, (bool, int)):
        raise _schema_error(index, "answerable", "must be a boolean or 0/1")
    return EvalItem(
        image_name=image,
        question=question,
        references=tuple(references),
        answer_type=None if answer_type is None else _parse_category(answer_type, index, "answer_type"),
        answerable=None if answerable is None else bool(answerable),
        reference_types=tuple(reference_types),
    )


def load_annotations(path: Path) -> list[EvalItem]:
    """Parse an annotation file into items, preserving file order."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"annotations file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"annotations file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise ConfigError(f"annotations file {path} must contain a JSON array")
    return [_parse_item(entry, index) for index, entry in enumerate(raw)]


def join_predictions(items: Sequence[EvalItem], path: Path) -> list[EvalItem]:
    """Attach candidates from a predictions file (one JSON object per line).

    Each line carries {"answer": ...} plus either {"image", "question"} or
    {"index"}. Every item must match exactly one prediction; all mismatches
    are reported together.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise ConfigError(f"predictions file not found: {path}") from None
    by_pair: dict[tuple[str, str], str] = {}
    by_index: dict[int, str] = {}
    problems: list[str] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError:
            problems.append(f"line {line_no}: not valid JSON")
            continue
        if not isinstance(row, dict) or not isinstance(row.get("answer"), str):
            problems.append(f"line {line_no}: needs an 'answer' string")
            continue
        if "index" in row:
            key = int(row["index"])
            if key in by_index:
                problems.append(f"line {line_no}: duplicate prediction for index {key}")
            else:
                by_index[key] = row["answer"]
        elif isinstance(row.get("image"), str) and isinstance(row.get("question"), str):
            pair = (row["image"], row["question"])
            if pair in by_pair:
                problems.append(f"line {line_no}: duplicate prediction for {pair!r}")
            else:
                by_pair[pair] = row["answer"]
        else:
            problems.append(f"line {line_no}: needs either 'index' or 'image'+'question'")
    if problems:
        raise ConfigError("bad predictions file: " + "; ".join(problems))

    joined: list[EvalItem] = []
    used_pairs: set[tuple[str, str]] = set()
    used_indexes: set[int] = set()
    unmatched: list[str] = []
    for index, item in enumerate(items):
        pair = (item.image_name, item.question)
        in_pair, in_index = pair in by_pair, index in by_index
        if in_pair and in_index:
            unmatched.append(f"item {index} ({item.image_name!r}) matched twice")
        elif in_pair:
            used_pairs.add(pair)
            joined.append(replace(item, candidate=by_pair[pair]))
        elif in_index:
            used_indexes.add(index)
            joined.append(replace(item, candidate=by_index[index]))
        else:
            unmatched.append(f"item {index} ({item.image_name!r}) has no prediction")
    orphans = [f"orphan prediction for {pair!r}" for pair in by_pair if pair not in used_pairs]
    orphans += [f"orphan prediction for index {i}" for i in by_index if i not in used_indexes]
    if unmatched or orphans:
        raise ConfigError("; ".join(unmatched + orphans))
    return joined


@dataclass(frozen=True)
class CategoryRow:
    """One table row: a category (or the average) with its metric means."""

    label: str
    count: int
    scores: MetricScores

    def to_dict(self) -> dict:
        return {"category": self.label, "count": self.count, **self.scores.to_dict()}


def report(items: Sequence[EvalItem]) -> list[CategoryRow]:
    """Per-category metric means plus a count-weighted average row.

    The CIDEr IDF table is built over the whole corpus in one pass, so cider
    values are consistent across category rows. The average row equals the
    plain mean over items, which is exactly the count-weighted mean of the
    category means.
    """
    if not items:
        raise ValueError("no items to report on")
    missing = [i for i, item in enumerate(items) if item.candidate is None]
    if missing:
        raise ValueError(f"items without candidates: {missing}")
    per_item, _ = score_all([(item.candidate, item.references) for item in items])
    rows = []
    for category in REPORT_ORDER:
        scored = [s for item, s in zip(items, per_item) if categorize(item) is category]
        if not scored:
            continue
        rows.append(CategoryRow(CATEGORY_LABELS[category], len(scored), mean_scores(scored)))
    rows.append(CategoryRow(AVG_LABEL, len(items), mean_scores(per_item)))
    return rows


def render_report(rows: Sequence[CategoryRow], metrics: Sequence[str] = METRIC_COLUMNS) -> str:
    """Plain-text table; metric columns selectable and rendered to 4 digits."""
    unknown = [m for m in metrics if m not in METRIC_COLUMNS]
    if unknown:
        raise ValueError(f"unknown metrics: {unknown}")
    header = ["Category", "Count"] + [m.upper() for m in metrics]
    body = [
        [row.label, str(row.count)] + [f"{row.scores.to_dict()[m]:.4f}" for m in metrics]
        for row in rows
    ]
    widths = [max(len(line[i]) for line in [header] + body) for i in range(len(header))]
    render = lambda line: " | ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip()
    divider = "-+-".join("-" * w for w in widths)
    return "\n".join([render(header), divider] + [render(line) for line in body])


def report_json(rows: Sequence[CategoryRow], metrics: Sequence[str] = METRIC_COLUMNS) -> str:
    keep = set(metrics) | {"category", "count"}
    thinned = [{k: v for k, v in row.to_dict().items() if k in keep} for row in rows]
    return json.dumps({"rows": thinned}, indent=2)


def load_manual_scores(path: Path) -> list[ManualScore]:
    """Parse manual helpfulness scores: JSON array of item_id/task/score."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"manual scores file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"manual scores file {path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise ConfigError(f"manual scores file {path} must contain a JSON array")
    scores = []
    for index, entry in enumerate(raw):
        if not isinstance(entry, dict):
            raise ConfigError(f"manual score {index}: not an object")
        try:
            task = TaskHint(entry.get("task"))
        except ValueError:
            raise ConfigError(f"manual score {index}: unknown task {entry.get('task')!r}") from None
        score = entry.get("score")
        if not isinstance(score, (int, float)):
            raise ConfigError(f"manual score {index}: score must be a number")
        try:
            scores.append(
                ManualScore(item_id=str(entry.get("item_id", index)), task=task, score=float(score))
            )
        except ValueError as exc:
            raise ConfigError(f"manual score {index}: {exc}") from exc
    return scores


def aggregate_manual_scores(scores: Sequence[ManualScore]) -> dict[TaskHint, float]:
    """Arithmetic mean of manual 0..10 scores per task."""
    if not scores:
        raise ValueError("no manual scores to aggregate")
    means: dict[TaskHint, float] = {}
    for task in TaskHint:
        values = [s.score for s in scores if s.task is task]
        if values:
            means[task] = sum(values) / len(values)
    return means


def render_manual_scores(means: dict[TaskHint, float]) -> str:
    label = lambda task: task.value.replace("_", " ").title()
    lines = ["Manual helpfulness (0-10):"]
    lines += [f"  {label(task)}: {mean:.2f}" for task, mean in means.items()]
    return "\n".join(lines)
