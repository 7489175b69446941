"""Prompt composition: recognized tags plus the user query, via text templates.

The tag sentence is a fixed phrase with a strict joining rule, so it lives
here as a constant rather than in the template registry (registry bodies must
carry the query placeholder; the tag sentence has none). Template bodies are
plain UTF-8 files, one per template, filename = template_id.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .domain import PromptBundle, TagSet, TaskHint, UserQuery
from .errors import ConfigError

TAG_SENTENCE_PREFIX = "The image may contain elements of "
PLACEHOLDER = "[user_query]"

_DEFAULT_TEMPLATE_ID = "pblv_assistant"


@dataclass(frozen=True)
class PromptTemplate:
    """One template body with exactly one query placeholder."""

    template_id: str
    body: str
    applicable_tasks: frozenset[TaskHint]

    def __post_init__(self) -> None:
        if not self.body:
            raise ConfigError(f"template {self.template_id!r} has an empty body")
        occurrences = self.body.count(PLACEHOLDER)
        if occurrences != 1:
            raise ConfigError(
                f"template {self.template_id!r} must contain {PLACEHOLDER!r} "
                f"exactly once, found {occurrences}"
            )


def compose_tag_sentence(tags: TagSet) -> str:
    """Render the recognized objects as one sentence; empty tags yield ""."""
    if not tags.tags:
        return ""
    return TAG_SENTENCE_PREFIX + ", ".join(tags.tags) + "."


def compose_prompt(tags: TagSet, query: UserQuery, template: PromptTemplate) -> PromptBundle:
    """Build the final prompt: tag sentence first, then the filled template.

    Substitution is a single left-to-right pass over the template body, so a
    query containing the placeholder text is never re-expanded.
    """
    tag_sentence = compose_tag_sentence(tags)
    filled = template.body.replace(PLACEHOLDER, query.text, 1)
    final_prompt = f"{tag_sentence} {filled}" if tag_sentence else filled
    return PromptBundle(
        tag_sentence=tag_sentence,
        template_id=template.template_id,
        user_query=query.text,
        final_prompt=final_prompt,
    )


class TemplateRegistry:
    """Immutable template lookup with a per-task selection table."""

    def __init__(
        self,
        templates: Iterable[PromptTemplate],
        task_map: Optional[dict[TaskHint, str]] = None,
    ) -> None:
        self._templates = {t.template_id: t for t in templates}
        if not self._templates:
            raise ConfigError("template registry is empty")
        self._task_map = dict(task_map or {})
        fallback = (
            _DEFAULT_TEMPLATE_ID
            if _DEFAULT_TEMPLATE_ID in self._templates
            else min(self._templates)
        )
        for task in TaskHint:
            self._task_map.setdefault(task, fallback)
        for task, template_id in self._task_map.items():
            if template_id not in self._templates:
                raise ConfigError(
                    f"task {task.value!r} maps to unknown template {template_id!r}"
                )

    def get(self, template_id: str) -> PromptTemplate:
        try:
            return self._templates[template_id]
        except KeyError:
            raise ConfigError(f"unknown template {template_id!r}") from None

    def select_template(self, task_hint: Optional[TaskHint]) -> PromptTemplate:
        task = task_hint if task_hint is not None else TaskHint.FREEFORM
        return self._templates[self._task_map[task]]

    def template_ids(self) -> list[str]:
        return sorted(self._templates)

    @classmethod
    def load(cls, directory: Path) -> "TemplateRegistry":
        paths = sorted(Path(directory).glob("*.txt"))
        if not paths:
            raise ConfigError(f"no template files under {directory}")
        templates = []
        for path in paths:
            body = path.read_text(encoding="utf-8")
            # Files conventionally end with one newline that is not template text.
            if body.endswith("\n"):
                body = body[:-1]
            templates.append(
                PromptTemplate(
                    template_id=path.stem,
                    body=body,
                    applicable_tasks=frozenset(TaskHint),
                )
            )
        return cls(templates)


def default_registry() -> TemplateRegistry:
    """Registry built from the template files shipped with the package."""
    root = importlib.resources.files("sightguide") / "templates"
    return TemplateRegistry.load(Path(str(root)))
