"""Clients and mocks for the four model roles behind the gateway."""

from .base import (
    BackendEndpoint,
    BackendRole,
    Generator,
    OnEvent,
    Synthesis,
    Synthesizer,
    Tagger,
    TokenEvent,
    Transcriber,
    Transcription,
)
from .http import HttpGenerator, HttpSynthesizer, HttpTagger, HttpTranscriber
from .mocks import (
    AsrFixture,
    FixtureSet,
    GenerationFixture,
    MockGenerator,
    MockSynthesizer,
    MockTagger,
    MockTranscriber,
    TagFixture,
    audio_payload_for_text,
    default_chunks,
    digest,
    generation_key,
)

__all__ = [
    "AsrFixture",
    "BackendEndpoint",
    "BackendRole",
    "FixtureSet",
    "GenerationFixture",
    "Generator",
    "HttpGenerator",
    "HttpSynthesizer",
    "HttpTagger",
    "HttpTranscriber",
    "MockGenerator",
    "MockSynthesizer",
    "MockTagger",
    "MockTranscriber",
    "OnEvent",
    "Synthesis",
    "Synthesizer",
    "TagFixture",
    "Tagger",
    "TokenEvent",
    "Transcriber",
    "Transcription",
    "audio_payload_for_text",
    "default_chunks",
    "digest",
    "generation_key",
]
