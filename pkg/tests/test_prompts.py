"""Tag sentence rendering, template substitution, and registry behavior."""

import random

import pytest

from sightguide.domain import Modality, TagSet, TaskHint, UserQuery, monotonic_ms, new_id
from sightguide.errors import ConfigError
from sightguide.prompts import (
    PLACEHOLDER,
    TAG_SENTENCE_PREFIX,
    PromptTemplate,
    TemplateRegistry,
    compose_prompt,
    compose_tag_sentence,
    default_registry,
)

ASSISTANT_OPENING = (
    "I am visually disabled. You are an assistant for individuals with visual disability"
)


def make_tags(*names) -> TagSet:
    return TagSet(tags=tuple(names), source_frame=new_id(), latency_ms=1.0)


def make_query(text: str, task_hint=None) -> UserQuery:
    return UserQuery(
        query_id=new_id(),
        session_id=new_id(),
        received_at=monotonic_ms(),
        modality=Modality.TEXT,
        text=text,
        task_hint=task_hint,
    )


class TestComposeTagSentence:
    def test_multi_tag_join(self):
        got = compose_tag_sentence(make_tags("giraffe", "tree", "grass"))
        assert got == "The image may contain elements of giraffe, tree, grass."

    def test_empty_tags_yield_empty_string(self):
        assert compose_tag_sentence(make_tags()) == ""

    def test_singleton_has_no_separator(self):
        assert compose_tag_sentence(make_tags("cat")) == "The image may contain elements of cat."


class TestComposePrompt:
    def test_full_assistant_prompt_shape(self):
        registry = default_registry()
        template = registry.select_template(TaskHint.RISK_ASSESSMENT)
        query = make_query("Is there a risk for me to continue moving forward?")
        bundle = compose_prompt(make_tags("street", "people", "shop"), query, template)
        assert bundle.final_prompt.startswith(
            "The image may contain elements of street, people, shop. "
            + ASSISTANT_OPENING
        )
        assert query.text in bundle.final_prompt
        assert PLACEHOLDER not in bundle.final_prompt

    def test_empty_tags_add_no_leading_space(self):
        template = PromptTemplate(
            template_id="t", body="X [user_query] Y", applicable_tasks=frozenset(TaskHint)
        )
        bundle = compose_prompt(make_tags(), make_query("q"), template)
        assert bundle.final_prompt == "X q Y"
        assert bundle.tag_sentence == ""

    def test_placeholder_in_query_is_not_reexpanded(self):
        template = PromptTemplate(
            template_id="t",
            body="Before [user_query] after",
            applicable_tasks=frozenset(TaskHint),
        )
        query = make_query("literal [user_query] inside")
        bundle = compose_prompt(make_tags("cat"), query, template)
        assert bundle.final_prompt.count("Before") == 1
        assert "literal [user_query] inside" in bundle.final_prompt
        # Exactly the one placeholder occurrence the query itself carries.
        assert bundle.final_prompt.count(PLACEHOLDER) == 1

    def test_every_tag_appears_exactly_once(self):
        rng = random.Random(31)
        words = ["stairs", "door", "bus", "curb", "lamp", "dog", "bench", "bin"]
        template = default_registry().select_template(None)
        for _ in range(50):
            rng.shuffle(words)
            count = rng.randint(1, len(words))
            tags = make_tags(*words[:count])
            bundle = compose_prompt(tags, make_query("what is ahead of me"), template)
            for tag in tags.tags:
                assert bundle.final_prompt.count(tag) == 1
                assert tag in bundle.tag_sentence

    def test_pure_function_identical_bytes(self):
        template = default_registry().select_template(TaskHint.SCENE_UNDERSTANDING)
        tags = make_tags("street", "people")
        query = make_query("Can you describe the environment around?")
        first = compose_prompt(tags, query, template)
        second = compose_prompt(tags, query, template)
        assert first.final_prompt == second.final_prompt
        assert first.final_prompt.encode() == second.final_prompt.encode()


class TestPromptTemplate:
    def test_missing_placeholder_rejected(self):
        with pytest.raises(ConfigError):
            PromptTemplate(template_id="bad", body="no slot here", applicable_tasks=frozenset())

    def test_double_placeholder_rejected(self):
        with pytest.raises(ConfigError):
            PromptTemplate(
                template_id="bad",
                body="[user_query] twice [user_query]",
                applicable_tasks=frozenset(),
            )

    def test_empty_body_rejected(self):
        with pytest.raises(ConfigError):
            PromptTemplate(template_id="bad", body="", applicable_tasks=frozenset())


class TestTemplateRegistry:
    def test_all_tasks_map_to_assistant_template(self):
        registry = default_registry()
        for task in TaskHint:
            assert registry.select_template(task).template_id == "pblv_assistant"
        assert registry.select_template(None).template_id == "pblv_assistant"

    def test_loading_is_idempotent(self):
        first = default_registry()
        second = default_registry()
        assert first.template_ids() == second.template_ids()
        for template_id in first.template_ids():
            assert first.get(template_id) == second.get(template_id)

    def test_shipped_template_text_is_loaded_verbatim(self):
        body = default_registry().get("pblv_assistant").body
        assert body.startswith(ASSISTANT_OPENING)
        assert body.endswith("Your answer should be like a daily conversation with me.")
        assert "Now, please answer my questions: [user_query]." in body
        assert not body.endswith("\n")

    def test_unknown_template_id_rejected(self):
        with pytest.raises(ConfigError):
            default_registry().get("nope")

    def test_task_map_to_missing_template_rejected(self):
        template = PromptTemplate(
            template_id="only", body="[user_query]", applicable_tasks=frozenset(TaskHint)
        )
        with pytest.raises(ConfigError):
            TemplateRegistry([template], task_map={TaskHint.FREEFORM: "absent"})

    def test_empty_directory_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            TemplateRegistry.load(tmp_path)

    def test_load_from_directory_strips_single_trailing_newline(self, tmp_path):
        (tmp_path / "custom.txt").write_text("Ask: [user_query]\n", encoding="utf-8")
        registry = TemplateRegistry.load(tmp_path)
        assert registry.get("custom").body == "Ask: [user_query]"
