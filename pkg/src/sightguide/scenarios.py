"""Deterministic walk-through scenarios for driving the mock backends.

A scenario is an ordered list of steps, each pairing a stored image with a
question, the tags the mock tagger must emit, and the answer the mock
generator must stream. Loading a scenario into a FixtureSet keys the
generation script by the exact prompt the gateway is expected to compose,
so a replay doubles as an end-to-end check of prompt assembly: a gateway
that builds even a slightly different prompt finds no scripted answer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from .backends import AsrFixture, FixtureSet, GenerationFixture, TagFixture, audio_payload_for_text
from .domain import Modality, StreamStatus, TagSet, TaskHint, UserQuery, monotonic_ms, new_id
from .errors import ConfigError
from .gateway import Gateway
from .prompts import TemplateRegistry, compose_prompt, compose_tag_sentence, default_registry


@dataclass(frozen=True)
class ScenarioStep:
    """One frame/question exchange within a scenario."""

    frame_ref: str
    image: bytes
    content_type: str
    query_text: str
    expected_tags: tuple[str, ...]
    scripted_answer: str
    task: TaskHint
    tag_delay_ms: float = 0.0
    first_token_delay_ms: float = 0.0
    inter_chunk_delay_ms: float = 0.0

    def __post_init__(self) -> None:
        if not self.image:
            raise ConfigError(f"step {self.frame_ref!r} resolved to an empty image")
        if not self.expected_tags:
            raise ConfigError(f"step {self.frame_ref!r} has no expected tags")
        if not self.query_text.strip():
            raise ConfigError(f"step {self.frame_ref!r} has an empty query")
        if not self.scripted_answer:
            raise ConfigError(f"step {self.frame_ref!r} has an empty answer")


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    steps: tuple[ScenarioStep, ...]
    notes: str = ""

    def __post_init__(self) -> None:
        if not self.scenario_id:
            raise ConfigError("scenario_id must be non-empty")
        if not self.steps:
            raise ConfigError(f"scenario {self.scenario_id!r} has no steps")


@dataclass(frozen=True)
class StepResult:
    """Replay outcome of one step, for transcripts and assertions."""

    step_index: int
    query_id: str
    question: str
    answer: str
    final_prompt: str
    tags: tuple[str, ...]
    timings: dict

    def to_dict(self) -> dict:
        return {
            "step": self.step_index,
            "query_id": self.query_id,
            "question": self.question,
            "answer": self.answer,
            "tags": list(self.tags),
            "timings": self.timings,
        }


_STEP_FIELDS = {
    "frame_ref",
    "query",
    "tags",
    "answer",
    "task",
    "tag_delay_ms",
    "first_token_delay_ms",
    "inter_chunk_delay_ms",
    "content_type",
}

_SUFFIX_TYPES = {".jpg": "image/jpeg", ".jpeg": "image/jpeg", ".png": "image/png"}


def _parse_step(raw: dict, index: int, base_dir: Path) -> ScenarioStep:
    if not isinstance(raw, dict):
        raise ConfigError(f"step {index} must be a mapping")
    unknown = set(raw) - _STEP_FIELDS
    if unknown:
        raise ConfigError(f"step {index} has unknown fields: {sorted(unknown)}")
    for required in ("frame_ref", "query", "tags", "answer"):
        if required not in raw:
            raise ConfigError(f"step {index} is missing {required!r}")
    frame_ref = str(raw["frame_ref"])
    image_path = base_dir / frame_ref
    if not image_path.is_file():
        raise ConfigError(f"step {index}: frame_ref {frame_ref!r} does not resolve to a file")
    tags = raw["tags"]
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise ConfigError(f"step {index}: tags must be a list of strings")
    task_name = raw.get("task", TaskHint.FREEFORM.value)
    try:
        task = TaskHint(task_name)
    except ValueError:
        raise ConfigError(f"step {index}: unknown task {task_name!r}") from None
    content_type = raw.get(
        "content_type", _SUFFIX_TYPES.get(image_path.suffix.lower(), "application/octet-stream")
    )
    return ScenarioStep(
        frame_ref=frame_ref,
        image=image_path.read_bytes(),
        content_type=content_type,
        query_text=str(raw["query"]),
        expected_tags=tuple(tags),
        scripted_answer=str(raw["answer"]),
        task=task,
        tag_delay_ms=float(raw.get("tag_delay_ms", 0.0)),
        first_token_delay_ms=float(raw.get("first_token_delay_ms", 0.0)),
        inter_chunk_delay_ms=float(raw.get("inter_chunk_delay_ms", 0.0)),
    )


def load_scenario(path: Path) -> Scenario:
    """Parse one scenario file; frame_refs resolve relative to the file."""
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"scenario file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid scenario file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"scenario file {path} must contain a mapping")
    steps_raw = raw.get("steps")
    if not isinstance(steps_raw, list) or not steps_raw:
        raise ConfigError(f"scenario file {path} must define a non-empty steps list")
    steps = tuple(
        _parse_step(step, index, path.parent) for index, step in enumerate(steps_raw)
    )
    return Scenario(
        scenario_id=str(raw.get("scenario_id", path.stem)),
        steps=steps,
        notes=str(raw.get("notes", "")),
    )


def load_scenarios(directory: Path) -> list[Scenario]:
    directory = Path(directory)
    paths = sorted(directory.glob("*.yaml")) + sorted(directory.glob("*.yml"))
    if not paths:
        raise ConfigError(f"no scenario files under {directory}")
    return [load_scenario(path) for path in paths]


def predicted_prompt(step: ScenarioStep, registry: TemplateRegistry) -> str:
    """The final prompt the gateway should compose for this step."""
    query = UserQuery(
        query_id=new_id(),
        session_id="scenario",
        received_at=monotonic_ms(),
        modality=Modality.TEXT,
        text=step.query_text,
        task_hint=step.task,
    )
    template = registry.select_template(step.task)
    tags = TagSet(tags=step.expected_tags, source_frame="scenario", latency_ms=0.0)
    return compose_prompt(tags, query, template).final_prompt


def build_fixture_set(
    scenarios: list[Scenario], registry: Optional[TemplateRegistry] = None
) -> FixtureSet:
    """Script mock backends so every scenario step can be replayed.

    Generation entries are keyed by (image, predicted final prompt); the
    spoken form of each question is registered for the transcriber so the
    same steps work over the audio modality.
    """
    registry = registry or default_registry()
    fixtures = FixtureSet()
    for scenario in scenarios:
        for step in scenario.steps:
            fixtures.add_tags(
                step.image, TagFixture(tags=step.expected_tags, delay_ms=step.tag_delay_ms)
            )
            fixtures.add_generation(
                step.image,
                GenerationFixture(
                    answer=step.scripted_answer,
                    first_token_delay_ms=step.first_token_delay_ms,
                    inter_chunk_delay_ms=step.inter_chunk_delay_ms,
                ),
                prompt=predicted_prompt(step, registry),
            )
            fixtures.add_transcript(
                audio_payload_for_text(step.query_text), AsrFixture(text=step.query_text)
            )
    return fixtures


@dataclass
class ReplayError(AssertionError):
    """A step broke one of the replay guarantees."""

    scenario_id: str
    step_index: int
    reason: str

    def __str__(self) -> str:
        return f"scenario {self.scenario_id!r} step {self.step_index}: {self.reason}"


def replay(scenario: Scenario, gateway: Gateway, modality: Modality = Modality.TEXT) -> list[StepResult]:
    """Run every step through a gateway and verify the relay guarantees.

    Asserts, per step: the stream ends with "done", the relayed chunk
    concatenation equals the scripted answer, and the composed prompt embeds
    both the tag sentence and the question verbatim.
    """
    session_id = gateway.create_session()
    results = []
    for index, step in enumerate(scenario.steps):

        def fail(reason: str) -> ReplayError:
            return ReplayError(scenario.scenario_id, index, reason)

        gateway.ingest_frame(session_id, step.content_type, step.image)
        if modality is Modality.TEXT:
            payload, content_type = step.query_text.encode(), "text/plain"
        else:
            payload, content_type = audio_payload_for_text(step.query_text), "audio/wav"
        events = list(
            gateway.handle_query(session_id, modality, payload, content_type, task_hint=step.task)
        )
        if not events or events[-1][0] != "done":
            raise fail(f"stream did not complete: {events[-1] if events else 'no events'}")
        relayed = "".join(data["text"] for name, data in events if name == "chunk")
        if relayed != step.scripted_answer:
            raise fail(f"relayed answer {relayed!r} != scripted {step.scripted_answer!r}")
        query_id = events[-1][1]["query_id"]
        record = gateway.query_record(session_id, query_id)
        if record.answer.status is not StreamStatus.COMPLETE:
            raise fail(f"record status is {record.answer.status}")
        prompt = record.prompt
        expected_sentence = compose_tag_sentence(
            TagSet(tags=step.expected_tags, source_frame="scenario", latency_ms=0.0)
        )
        if prompt.tag_sentence != expected_sentence:
            raise fail(f"tag sentence {prompt.tag_sentence!r} != {expected_sentence!r}")
        if prompt.tag_sentence not in prompt.final_prompt:
            raise fail("tag sentence missing from final prompt")
        if step.query_text not in prompt.final_prompt:
            raise fail("question missing from final prompt")
        results.append(
            StepResult(
                step_index=index,
                query_id=query_id,
                question=step.query_text,
                answer=relayed,
                final_prompt=prompt.final_prompt,
                tags=step.expected_tags,
                timings=events[-1][1]["timings"],
            )
        )
    return results


def transcript_lines(scenario: Scenario, results: list[StepResult]) -> list[str]:
    """Human-readable replay transcript, one Q/A pair per step."""
    lines = [f"# {scenario.scenario_id}"]
    for result in results:
        lines.append(f"[{result.step_index}] Q: {result.question}")
        lines.append(f"[{result.step_index}] A: {result.answer}")
    return lines


def transcript_json(scenario: Scenario, results: list[StepResult]) -> str:
    return json.dumps(
        {"scenario_id": scenario.scenario_id, "steps": [r.to_dict() for r in results]},
        indent=2,
    )
