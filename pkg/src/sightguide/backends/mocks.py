"""Deterministic scripted backends keyed by input digest.

Each mock is a pure function of (fixture set, input bytes): the same image
always yields the same tags in the same order, the same prompt the same
chunk-for-chunk stream. Delays are injected with real sleeps so latency
instrumentation can be tested against known floors.
"""

from __future__ import annotations

import hashlib
import io
import math
import re
import threading
import time
import wave
from dataclasses import dataclass, field
from typing import Optional

from ..domain import (
    AnswerStream,
    Chunk,
    Frame,
    GenerationParams,
    StageTimings,
    StreamStatus,
    TagSet,
    monotonic_ms,
)
from ..errors import ProtocolError
from .base import OnEvent, Synthesis, TokenEvent, Transcription

SAMPLE_RATE = 16_000
MS_PER_CHAR = 50
MAX_WAV_MS = 10_000


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def generation_key(image: bytes, prompt: str) -> str:
    """Key binding an answer to a specific (frame, prompt) pair."""
    return digest(image + b"\x00" + prompt.encode("utf-8"))


def audio_payload_for_text(text: str) -> bytes:
    """Stand-in microphone payload whose digest identifies the utterance."""
    return b"pcm:" + text.encode("utf-8")


def default_chunks(answer: str) -> tuple[str, ...]:
    """Word-at-a-time chunking whose concatenation is exactly the answer."""
    if not answer:
        return ()
    pieces = re.findall(r"\s*\S+\s*", answer)
    if "".join(pieces) != answer:
        # Whitespace-only answers have no words to split on.
        return (answer,)
    return tuple(pieces)


@dataclass(frozen=True)
class TagFixture:
    tags: tuple[str, ...]
    delay_ms: float = 0.0


@dataclass(frozen=True)
class GenerationFixture:
    answer: str
    chunks: tuple[str, ...] = ()
    first_token_delay_ms: float = 0.0
    inter_chunk_delay_ms: float = 0.0
    fail_after_chunks: int = -1

    def __post_init__(self) -> None:
        if self.chunks and "".join(self.chunks) != self.answer:
            raise ValueError("scripted chunks must concatenate to the answer")

    def effective_chunks(self) -> tuple[str, ...]:
        return self.chunks if self.chunks else default_chunks(self.answer)


@dataclass(frozen=True)
class AsrFixture:
    text: str
    delay_ms: float = 0.0


@dataclass
class FixtureSet:
    """Digest-keyed scripts for all four roles."""

    tag_entries: dict[str, TagFixture] = field(default_factory=dict)
    gen_entries: dict[str, GenerationFixture] = field(default_factory=dict)
    asr_entries: dict[str, AsrFixture] = field(default_factory=dict)

    def add_tags(self, image: bytes, fixture: TagFixture) -> None:
        self.tag_entries[digest(image)] = fixture

    def add_generation(
        self, image: bytes, fixture: GenerationFixture, prompt: Optional[str] = None
    ) -> None:
        """Register under the frame digest, or the (frame, prompt) pair key."""
        key = generation_key(image, prompt) if prompt is not None else digest(image)
        self.gen_entries[key] = fixture

    def add_transcript(self, audio: bytes, fixture: AsrFixture) -> None:
        self.asr_entries[digest(audio)] = fixture


def _sleep_ms(duration_ms: float) -> None:
    if duration_ms > 0:
        time.sleep(duration_ms / 1000.0)


class MockTagger:
    def __init__(self, fixtures: FixtureSet) -> None:
        self._fixtures = fixtures

    def tag_image(self, frame: Frame) -> TagSet:
        if not frame.data:
            raise ProtocolError("refusing to tag an empty image payload")
        started = monotonic_ms()
        entry = self._fixtures.tag_entries.get(digest(frame.data))
        if entry is None:
            raise ProtocolError(f"no tag fixture for frame {frame.frame_id}")
        _sleep_ms(entry.delay_ms)
        return TagSet(
            tags=entry.tags,
            source_frame=frame.frame_id,
            latency_ms=monotonic_ms() - started,
        )

    def ping(self) -> bool:
        return True


class MockGenerator:
    def __init__(self, fixtures: FixtureSet) -> None:
        self._fixtures = fixtures

    def _lookup(self, frame: Frame, prompt: str) -> GenerationFixture:
        entries = self._fixtures.gen_entries
        entry = entries.get(generation_key(frame.data, prompt))
        if entry is None:
            entry = entries.get(digest(frame.data))
        if entry is None:
            raise ProtocolError(f"no generation fixture for frame {frame.frame_id}")
        return entry

    def generate_stream(
        self,
        frame: Frame,
        prompt: str,
        params: GenerationParams,
        on_event: OnEvent,
        *,
        query_id: str = "",
        cancel: Optional[threading.Event] = None,
    ) -> AnswerStream:
        if not prompt:
            raise ValueError("prompt must be non-empty")
        entry = self._lookup(frame, prompt)
        started = monotonic_ms()
        chunks = entry.effective_chunks()
        _sleep_ms(entry.first_token_delay_ms)

        received: list[Chunk] = []

        def deliver(event: TokenEvent) -> None:
            received.append(Chunk(seq_no=event.seq_no, text=event.text, at=monotonic_ms()))
            on_event(event)

        status = StreamStatus.COMPLETE
        if not chunks:
            deliver(TokenEvent(seq_no=0, text="", is_last=True))
        else:
            stop_after = (
                entry.fail_after_chunks
                if 0 <= entry.fail_after_chunks < len(chunks)
                else len(chunks)
            )
            for i in range(stop_after):
                if cancel is not None and cancel.is_set():
                    status = StreamStatus.FAILED
                    break
                if i > 0:
                    _sleep_ms(entry.inter_chunk_delay_ms)
                is_last = i == len(chunks) - 1
                deliver(TokenEvent(seq_no=i, text=chunks[i], is_last=is_last))
            else:
                if stop_after < len(chunks):
                    # Scripted mid-stream disconnect: no terminal event arrives.
                    status = StreamStatus.FAILED

        ended = monotonic_ms()
        timings = StageTimings(
            first_token_ms=(received[0].at - started) if received else None,
            total_generation_ms=ended - started,
        )
        return AnswerStream(
            query_id=query_id,
            chunks=tuple(received),
            final_text="".join(c.text for c in received),
            timings=timings,
            status=status,
        )

    def ping(self) -> bool:
        return True


class MockTranscriber:
    def __init__(self, fixtures: FixtureSet) -> None:
        self._fixtures = fixtures

    def transcribe(self, audio: bytes, content_type: str) -> Transcription:
        if not audio:
            raise ValueError("audio payload must be non-empty")
        if not content_type.startswith("audio/") and content_type != "application/octet-stream":
            raise ProtocolError(f"unsupported audio content type {content_type!r}")
        started = monotonic_ms()
        entry = self._fixtures.asr_entries.get(digest(audio))
        if entry is None:
            raise ProtocolError("transcription failed: unknown audio payload")
        _sleep_ms(entry.delay_ms)
        return Transcription(text=entry.text, asr_ms=monotonic_ms() - started)

    def ping(self) -> bool:
        return True


class MockSynthesizer:
    """Emits a real WAV file: 16 kHz mono sine, 50 ms per character, 10 s cap."""

    def synthesize(self, text: str) -> Synthesis:
        if not text:
            raise ValueError("text must be non-empty")
        started = monotonic_ms()
        duration_ms = min(MS_PER_CHAR * len(text), MAX_WAV_MS)
        n_samples = SAMPLE_RATE * duration_ms // 1000
        buffer = io.BytesIO()
        with wave.open(buffer, "wb") as wav:
            wav.setnchannels(1)
            wav.setsampwidth(2)
            wav.setframerate(SAMPLE_RATE)
            tone = bytearray()
            for i in range(n_samples):
                sample = int(12_000 * math.sin(2 * math.pi * 440 * i / SAMPLE_RATE))
                tone += sample.to_bytes(2, "little", signed=True)
            wav.writeframes(bytes(tone))
        return Synthesis(
            audio=buffer.getvalue(),
            content_type="audio/wav",
            tts_ms=monotonic_ms() - started,
        )

    def ping(self) -> bool:
        return True
