"""Scripted mock backends: determinism, delays, streaming, and error paths."""

import io
import threading
import wave
from dataclasses import dataclass

import pytest

from sightguide.backends import (
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
)
from sightguide.domain import Frame, GenerationParams, StreamStatus, monotonic_ms, new_id
from sightguide.errors import ProtocolError

STREET_IMAGE = b"\xff\xd8\xff\xe0street-fixture-bytes"
RISK_ANSWER = "No, it is not risky for you to go ahead."


def make_frame(data=STREET_IMAGE) -> Frame:
    return Frame(
        frame_id=new_id(),
        session_id=new_id(),
        captured_at=monotonic_ms(),
        content_type="image/jpeg",
        data=data,
    )


@pytest.fixture
def fixtures() -> FixtureSet:
    fs = FixtureSet()
    fs.add_tags(STREET_IMAGE, TagFixture(tags=("street", "people", "shop")))
    fs.add_generation(STREET_IMAGE, GenerationFixture(answer=RISK_ANSWER))
    fs.add_transcript(
        audio_payload_for_text("Can you describe the environment around?"),
        AsrFixture(text="Can you describe the environment around?"),
    )
    return fs


class TestMockTagger:
    def test_scripted_tags_in_order(self, fixtures):
        tags = MockTagger(fixtures).tag_image(make_frame())
        assert tags.tags == ("street", "people", "shop")

    def test_deterministic_across_calls(self, fixtures):
        tagger = MockTagger(fixtures)
        assert tagger.tag_image(make_frame()).tags == tagger.tag_image(make_frame()).tags

    def test_unknown_image_is_protocol_error(self, fixtures):
        with pytest.raises(ProtocolError):
            MockTagger(fixtures).tag_image(make_frame(data=b"never-registered"))

    def test_empty_payload_rejected_before_lookup(self, fixtures):
        @dataclass
        class HollowFrame:
            frame_id: str = "stub"
            session_id: str = "stub"
            captured_at: float = 0.0
            content_type: str = "image/jpeg"
            data: bytes = b""

        with pytest.raises(ProtocolError):
            MockTagger(fixtures).tag_image(HollowFrame())

    def test_latency_covers_injected_delay(self):
        fs = FixtureSet()
        fs.add_tags(STREET_IMAGE, TagFixture(tags=("street",), delay_ms=40.0))
        tags = MockTagger(fs).tag_image(make_frame())
        assert 40.0 <= tags.latency_ms < 60.0


class TestMockGenerator:
    def run(self, fixtures, frame=None, prompt="describe the scene", cancel=None):
        events = []
        stream = MockGenerator(fixtures).generate_stream(
            frame or make_frame(),
            prompt,
            GenerationParams(),
            events.append,
            query_id="q1",
            cancel=cancel,
        )
        return events, stream

    def test_concatenation_equals_answer(self, fixtures):
        events, stream = self.run(fixtures)
        assert stream.final_text == RISK_ANSWER
        assert "".join(e.text for e in events) == RISK_ANSWER
        assert stream.status is StreamStatus.COMPLETE

    def test_exactly_one_last_event_and_dense_seq(self, fixtures):
        events, _ = self.run(fixtures)
        assert [e.seq_no for e in events] == list(range(len(events)))
        assert sum(1 for e in events if e.is_last) == 1
        assert events[-1].is_last

    def test_scripted_three_chunk_stream(self):
        fs = FixtureSet()
        fs.add_generation(
            STREET_IMAGE,
            GenerationFixture(
                answer=RISK_ANSWER,
                chunks=("No, it is not ", "risky for you ", "to go ahead."),
            ),
        )
        events, stream = self.run(fs)
        assert len(events) == 3
        assert stream.final_text == RISK_ANSWER

    def test_empty_answer_is_single_terminal_event(self):
        fs = FixtureSet()
        fs.add_generation(STREET_IMAGE, GenerationFixture(answer=""))
        events, stream = self.run(fs)
        assert [(e.seq_no, e.text, e.is_last) for e in events] == [(0, "", True)]
        assert stream.final_text == ""
        assert stream.status is StreamStatus.COMPLETE

    def test_inter_chunk_delays_accumulate(self):
        answer = "one two three four five six seven eight nine ten"
        fs = FixtureSet()
        fs.add_generation(
            STREET_IMAGE,
            GenerationFixture(answer=answer, inter_chunk_delay_ms=20.0),
        )
        events, stream = self.run(fs)
        assert len(events) == 10
        assert stream.timings.total_generation_ms >= 9 * 20.0
        assert stream.timings.first_token_ms < stream.timings.total_generation_ms

    def test_first_token_delay_floors_first_token_ms(self):
        fs = FixtureSet()
        fs.add_generation(
            STREET_IMAGE,
            GenerationFixture(answer=RISK_ANSWER, first_token_delay_ms=50.0),
        )
        _, stream = self.run(fs)
        assert stream.timings.first_token_ms >= 50.0

    def test_scripted_failure_keeps_partial_chunks(self):
        fs = FixtureSet()
        fs.add_generation(
            STREET_IMAGE,
            GenerationFixture(answer=RISK_ANSWER, fail_after_chunks=3),
        )
        events, stream = self.run(fs)
        assert stream.status is StreamStatus.FAILED
        assert len(stream.chunks) == 3
        assert not any(e.is_last for e in events)
        assert RISK_ANSWER.startswith(stream.final_text)

    def test_cancel_stops_within_one_event(self):
        fs = FixtureSet()
        fs.add_generation(
            STREET_IMAGE,
            GenerationFixture(answer=RISK_ANSWER, inter_chunk_delay_ms=5.0),
        )
        cancel = threading.Event()
        events = []

        def on_event(event):
            events.append(event)
            if len(events) == 2:
                cancel.set()

        stream = MockGenerator(fs).generate_stream(
            make_frame(), "p", GenerationParams(), on_event, cancel=cancel
        )
        assert stream.status is StreamStatus.FAILED
        # Cancellation lands before the next event; nothing more is delivered.
        assert len(events) == 2

    def test_prompt_keyed_fixture_wins_over_frame_keyed(self):
        fs = FixtureSet()
        fs.add_generation(STREET_IMAGE, GenerationFixture(answer="frame level"))
        fs.add_generation(
            STREET_IMAGE, GenerationFixture(answer="prompt level"), prompt="special"
        )
        _, generic = self.run(fs, prompt="anything else")
        _, specific = self.run(fs, prompt="special")
        assert generic.final_text == "frame level"
        assert specific.final_text == "prompt level"

    def test_unknown_frame_is_protocol_error(self, fixtures):
        with pytest.raises(ProtocolError):
            self.run(fixtures, frame=make_frame(data=b"unregistered"))

    def test_chunks_must_concatenate_to_answer(self):
        with pytest.raises(ValueError):
            GenerationFixture(answer="abc", chunks=("a", "x"))


class TestMockTranscriber:
    def test_fixture_mapping(self, fixtures):
        audio = audio_payload_for_text("Can you describe the environment around?")
        result = MockTranscriber(fixtures).transcribe(audio, "audio/wav")
        assert result.text == "Can you describe the environment around?"
        assert result.asr_ms >= 0.0

    def test_empty_audio_rejected(self, fixtures):
        with pytest.raises(ValueError):
            MockTranscriber(fixtures).transcribe(b"", "audio/wav")

    def test_unknown_audio_is_protocol_error(self, fixtures):
        with pytest.raises(ProtocolError):
            MockTranscriber(fixtures).transcribe(b"pcm:unheard of", "audio/wav")

    def test_non_audio_content_type_rejected(self, fixtures):
        audio = audio_payload_for_text("Can you describe the environment around?")
        with pytest.raises(ProtocolError):
            MockTranscriber(fixtures).transcribe(audio, "text/plain")


class TestMockSynthesizer:
    def wav_duration_ms(self, payload: bytes) -> float:
        with wave.open(io.BytesIO(payload)) as wav:
            return wav.getnframes() / wav.getframerate() * 1000.0

    def test_duration_is_50ms_per_character(self):
        result = MockSynthesizer().synthesize("hello")
        assert result.content_type == "audio/wav"
        assert self.wav_duration_ms(result.audio) == pytest.approx(250.0)

    def test_duration_caps_at_ten_seconds(self):
        result = MockSynthesizer().synthesize("x" * 1000)
        assert self.wav_duration_ms(result.audio) == pytest.approx(10_000.0)

    def test_empty_text_rejected(self):
        with pytest.raises(ValueError):
            MockSynthesizer().synthesize("")

    def test_byte_identical_for_identical_text(self):
        synth = MockSynthesizer()
        assert synth.synthesize("stairs ahead").audio == synth.synthesize("stairs ahead").audio


class TestDefaultChunks:
    def test_concatenation_is_identity(self):
        for text in [RISK_ANSWER, "one", "  leading spaces", "trailing  ", ""]:
            assert "".join(default_chunks(text)) == text

    def test_words_keep_their_trailing_whitespace(self):
        assert default_chunks("be careful ahead") == ("be ", "careful ", "ahead")
