"""Backend roles, wire-level event types, and the client interfaces.

Every model role (tagger, vision-language generator, speech-to-text,
text-to-speech) is a swappable service behind a small structural interface,
so the orchestrator never knows whether it is talking to a real model server
or a scripted mock.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Optional, Protocol, runtime_checkable

from ..domain import AnswerStream, Frame, GenerationParams, TagSet


class BackendRole(str, Enum):
    TAGGER = "tagger"
    VLM = "vlm"
    ASR = "asr"
    TTS = "tts"


@dataclass(frozen=True)
class BackendEndpoint:
    """Where one backend role lives and how long to wait for it."""

    role: BackendRole
    base_url: str
    timeout_ms: float
    auth_token: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.base_url:
            raise ValueError("base_url must be non-empty")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be > 0")

    def url(self, path: str) -> str:
        return self.base_url.rstrip("/") + path


@dataclass(frozen=True)
class TokenEvent:
    """One server-sent generation event; the stream ends at is_last."""

    seq_no: int
    text: str
    is_last: bool

    def __post_init__(self) -> None:
        if self.seq_no < 0:
            raise ValueError("seq_no must be >= 0")

    def to_dict(self) -> dict[str, Any]:
        return {"seq": self.seq_no, "text": self.text, "last": self.is_last}

    @classmethod
    def from_dict(cls, raw: dict[str, Any]) -> "TokenEvent":
        return cls(seq_no=raw["seq"], text=raw["text"], is_last=raw["last"])


@dataclass(frozen=True)
class Transcription:
    text: str
    asr_ms: float


@dataclass(frozen=True)
class Synthesis:
    audio: bytes
    content_type: str
    tts_ms: float


OnEvent = Callable[[TokenEvent], None]


@runtime_checkable
class Tagger(Protocol):
    def tag_image(self, frame: Frame) -> TagSet: ...

    def ping(self) -> bool: ...


@runtime_checkable
class Generator(Protocol):
    def generate_stream(
        self,
        frame: Frame,
        prompt: str,
        params: GenerationParams,
        on_event: OnEvent,
        *,
        query_id: str = "",
        cancel: Optional[threading.Event] = None,
    ) -> AnswerStream: ...

    def ping(self) -> bool: ...


@runtime_checkable
class Transcriber(Protocol):
    def transcribe(self, audio: bytes, content_type: str) -> Transcription: ...

    def ping(self) -> bool: ...


@runtime_checkable
class Synthesizer(Protocol):
    def synthesize(self, text: str) -> Synthesis: ...

    def ping(self) -> bool: ...
