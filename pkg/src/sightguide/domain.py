"""Core data types shared by the pipeline, backend clients, and evaluation harness.

Timestamps are server-monotonic milliseconds (floats anchored at process
start), never wall clock, so latency arithmetic is immune to clock jumps.
Identifiers are opaque 128-bit values rendered as lowercase hex. All values
here are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import base64
import time
import uuid
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

_MONOTONIC_ANCHOR = time.monotonic()


def new_id() -> str:
    """Return a fresh 128-bit identifier as lowercase hex."""
    return uuid.uuid4().hex


def monotonic_ms() -> float:
    """Milliseconds since process start, from the monotonic clock."""
    return (time.monotonic() - _MONOTONIC_ANCHOR) * 1000.0


class Modality(str, Enum):
    TEXT = "text"
    AUDIO = "audio"


class TaskHint(str, Enum):
    SCENE_UNDERSTANDING = "scene_understanding"
    OBJECT_LOCALIZATION = "object_localization"
    RISK_ASSESSMENT = "risk_assessment"
    FREEFORM = "freeform"


class StreamStatus(str, Enum):
    STREAMING = "streaming"
    COMPLETE = "complete"
    FAILED = "failed"


@dataclass(frozen=True)
class Frame:
    """One captured image: opaque bytes plus capture metadata."""

    frame_id: str
    session_id: str
    captured_at: float
    content_type: str
    data: bytes

    def __post_init__(self) -> None:
        if not self.data:
            raise ValueError("frame payload must be non-empty")
        if not self.content_type:
            raise ValueError("frame content_type must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "frame_id": self.frame_id,
            "session_id": self.session_id,
            "captured_at": self.captured_at,
            "content_type": self.content_type,
            "data_b64": base64.b64encode(self.data).decode("ascii"),
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "Frame":
        return cls(
            frame_id=raw["frame_id"],
            session_id=raw["session_id"],
            captured_at=raw["captured_at"],
            content_type=raw["content_type"],
            data=base64.b64decode(raw["data_b64"]),
        )


@dataclass(frozen=True)
class UserQuery:
    """A user question, after transcription when it arrived as audio."""

    query_id: str
    session_id: str
    received_at: float
    modality: Modality
    text: str
    task_hint: Optional[TaskHint] = None

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("query text must be non-empty")

    def to_dict(self) -> dict[str, Any]:
        return {
            "query_id": self.query_id,
            "session_id": self.session_id,
            "received_at": self.received_at,
            "modality": self.modality.value,
            "text": self.text,
            "task_hint": self.task_hint.value if self.task_hint else None,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "UserQuery":
        return cls(
            query_id=raw["query_id"],
            session_id=raw["session_id"],
            received_at=raw["received_at"],
            modality=Modality(raw["modality"]),
            text=raw["text"],
            task_hint=TaskHint(raw["task_hint"]) if raw.get("task_hint") else None,
        )


@dataclass(frozen=True)
class TagSet:
    """Objects recognized in one frame, in the tagger backend's stable order."""

    tags: tuple[str, ...]
    source_frame: str
    latency_ms: float

    def __post_init__(self) -> None:
        seen = set()
        for tag in self.tags:
            if not tag or tag != tag.strip():
                raise ValueError(f"malformed tag {tag!r}")
            if tag in seen:
                raise ValueError(f"duplicate tag {tag!r}")
            seen.add(tag)
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return {
            "tags": list(self.tags),
            "source_frame": self.source_frame,
            "latency_ms": self.latency_ms,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "TagSet":
        return cls(
            tags=tuple(raw["tags"]),
            source_frame=raw["source_frame"],
            latency_ms=raw["latency_ms"],
        )


@dataclass(frozen=True)
class PromptBundle:
    """The fully composed prompt and the provenance of each part."""

    tag_sentence: str
    template_id: str
    user_query: str
    final_prompt: str

    def __post_init__(self) -> None:
        if not self.final_prompt.startswith(self.tag_sentence):
            raise ValueError("final_prompt must start with the tag sentence")
        if self.user_query not in self.final_prompt:
            raise ValueError("final_prompt must contain the user query verbatim")

    def to_dict(self) -> dict[str, Any]:
        return {
            "tag_sentence": self.tag_sentence,
            "template_id": self.template_id,
            "user_query": self.user_query,
            "final_prompt": self.final_prompt,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "PromptBundle":
        return cls(
            tag_sentence=raw["tag_sentence"],
            template_id=raw["template_id"],
            user_query=raw["user_query"],
            final_prompt=raw["final_prompt"],
        )


@dataclass(frozen=True)
class GenerationParams:
    """Decoding settings forwarded to the vision-language backend."""

    min_length: int = 1
    max_length: int = 200
    beam_width: int = 5
    length_penalty: float = 1.0
    repetition_penalty: float = 3.0
    temperature: float = 1.0

    def __post_init__(self) -> None:
        if not 1 <= self.min_length <= self.max_length:
            raise ValueError("need 1 <= min_length <= max_length")
        if self.beam_width < 1:
            raise ValueError("beam_width must be >= 1")
        if self.length_penalty <= 0 or self.repetition_penalty <= 0:
            raise ValueError("penalties must be > 0")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")

    def to_dict(self) -> dict[str, Any]:
        return {
            "min_length": self.min_length,
            "max_length": self.max_length,
            "beam_width": self.beam_width,
            "length_penalty": self.length_penalty,
            "repetition_penalty": self.repetition_penalty,
            "temperature": self.temperature,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "GenerationParams":
        return cls(**{k: raw[k] for k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class StageTimings:
    """Per-stage durations in milliseconds; None where a stage was skipped."""

    asr_ms: Optional[float] = None
    tagging_ms: Optional[float] = None
    first_token_ms: Optional[float] = None
    total_generation_ms: Optional[float] = None
    tts_ms: Optional[float] = None

    def __post_init__(self) -> None:
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ValueError(f"{name} must be >= 0")
        if (
            self.first_token_ms is not None
            and self.total_generation_ms is not None
            and self.first_token_ms > self.total_generation_ms
        ):
            raise ValueError("first_token_ms must not exceed total_generation_ms")

    def to_dict(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "StageTimings":
        return cls(**{k: raw.get(k) for k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class Chunk:
    """One streamed answer fragment with its arrival timestamp."""

    seq_no: int
    text: str
    at: float

    def to_dict(self) -> dict[str, Any]:
        return {"seq_no": self.seq_no, "text": self.text, "at": self.at}

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "Chunk":
        return cls(seq_no=raw["seq_no"], text=raw["text"], at=raw["at"])


@dataclass(frozen=True)
class AnswerStream:
    """The ordered chunk record of one generated answer."""

    query_id: str
    chunks: tuple[Chunk, ...]
    final_text: str
    timings: StageTimings
    status: StreamStatus

    def __post_init__(self) -> None:
        for i, chunk in enumerate(self.chunks):
            if chunk.seq_no != i:
                raise ValueError("chunk sequence numbers must be dense from 0")
        if self.status is StreamStatus.COMPLETE:
            joined = "".join(c.text for c in self.chunks)
            if joined != self.final_text:
                raise ValueError("chunk concatenation must equal final_text")

    def to_dict(self) -> dict[str, Any]:
        return {
            "query_id": self.query_id,
            "chunks": [c.to_dict() for c in self.chunks],
            "final_text": self.final_text,
            "timings": self.timings.to_dict(),
            "status": self.status.value,
        }

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "AnswerStream":
        return cls(
            query_id=raw["query_id"],
            chunks=tuple(Chunk.from_dict(c) for c in raw["chunks"]),
            final_text=raw["final_text"],
            timings=StageTimings.from_dict(raw["timings"]),
            status=StreamStatus(raw["status"]),
        )


@dataclass(frozen=True)
class ManualScore:
    """One externally supplied helpfulness score on the 0..10 scale."""

    item_id: str
    task: TaskHint
    score: float

    def __post_init__(self) -> None:
        if not 0 <= self.score <= 10:
            raise ValueError(f"score {self.score} outside [0, 10]")

    def to_dict(self) -> dict[str, Any]:
        return {"item_id": self.item_id, "task": self.task.value, "score": self.score}

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "ManualScore":
        return cls(item_id=raw["item_id"], task=TaskHint(raw["task"]), score=raw["score"])
