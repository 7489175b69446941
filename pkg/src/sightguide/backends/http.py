"""HTTP clients for the four backend roles.

Request bodies are JSON with binary payloads base64-encoded; generation
arrives as server-sent events. Tagger, ASR, and TTS calls retry once on
timeout; generation never retries after bytes may have been delivered, so a
listening user cannot hear a duplicated partial answer.
"""

from __future__ import annotations

import base64
import json
import threading
from typing import Optional

import httpx

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
from ..errors import BackendTimeout, ProtocolError
from .base import BackendEndpoint, OnEvent, Synthesis, TokenEvent, Transcription

_DATA_PREFIX = "data:"


class _HttpClientBase:
    def __init__(self, endpoint: BackendEndpoint, client: Optional[httpx.Client] = None):
        self._endpoint = endpoint
        self._client = client or httpx.Client(timeout=endpoint.timeout_ms / 1000.0)

    def _headers(self) -> dict[str, str]:
        if self._endpoint.auth_token:
            return {"Authorization": f"Bearer {self._endpoint.auth_token}"}
        return {}

    def _post_json(self, path: str, payload: dict, *, retries: int = 1) -> httpx.Response:
        url = self._endpoint.url(path)
        attempts = retries + 1
        for attempt in range(attempts):
            try:
                response = self._client.post(url, json=payload, headers=self._headers())
            except httpx.TimeoutException as exc:
                if attempt + 1 == attempts:
                    raise BackendTimeout(f"{url} timed out after {attempts} attempts") from exc
                continue
            except httpx.HTTPError as exc:
                raise ProtocolError(f"{url} failed: {exc}") from exc
            if response.status_code != 200:
                raise ProtocolError(f"{url} returned {response.status_code}: {response.text}")
            return response
        raise AssertionError("unreachable")

    def ping(self) -> bool:
        try:
            response = self._client.get(self._endpoint.url("/healthz"), headers=self._headers())
        except httpx.HTTPError:
            return False
        return response.status_code == 200

    def close(self) -> None:
        self._client.close()


class HttpTagger(_HttpClientBase):
    def tag_image(self, frame: Frame) -> TagSet:
        if not frame.data:
            raise ProtocolError("refusing to dispatch an empty image payload")
        started = monotonic_ms()
        response = self._post_json(
            "/v1/tag",
            {
                "image_b64": base64.b64encode(frame.data).decode("ascii"),
                "content_type": frame.content_type,
            },
        )
        try:
            body = response.json()
            tags = tuple(body["tags"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ProtocolError(f"malformed tagger response: {exc}") from exc
        return TagSet(tags=tags, source_frame=frame.frame_id, latency_ms=monotonic_ms() - started)


class HttpGenerator(_HttpClientBase):
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
        payload = {
            "image_b64": base64.b64encode(frame.data).decode("ascii"),
            "content_type": frame.content_type,
            "prompt": prompt,
            "params": params.to_dict(),
        }
        url = self._endpoint.url("/v1/generate")
        started = monotonic_ms()
        received: list[Chunk] = []
        status = StreamStatus.COMPLETE
        saw_last = False
        try:
            with self._client.stream(
                "POST", url, json=payload, headers=self._headers()
            ) as response:
                if response.status_code != 200:
                    response.read()
                    raise ProtocolError(
                        f"{url} returned {response.status_code}: {response.text}"
                    )
                for line in response.iter_lines():
                    if cancel is not None and cancel.is_set():
                        status = StreamStatus.FAILED
                        break
                    if not line.startswith(_DATA_PREFIX):
                        continue
                    try:
                        event = TokenEvent.from_dict(
                            json.loads(line[len(_DATA_PREFIX) :].strip())
                        )
                    except (ValueError, KeyError) as exc:
                        raise ProtocolError(f"malformed stream event: {line!r}") from exc
                    received.append(
                        Chunk(seq_no=event.seq_no, text=event.text, at=monotonic_ms())
                    )
                    on_event(event)
                    if event.is_last:
                        saw_last = True
                        break
        except httpx.TimeoutException as exc:
            if not received:
                raise BackendTimeout(f"{url}: no first token within timeout") from exc
            status = StreamStatus.FAILED
        except httpx.HTTPError as exc:
            if not received:
                raise ProtocolError(f"{url} failed before any token: {exc}") from exc
            status = StreamStatus.FAILED
        if status is StreamStatus.COMPLETE and not saw_last:
            # Server closed the stream without a terminal event.
            status = StreamStatus.FAILED

        timings = StageTimings(
            first_token_ms=(received[0].at - started) if received else None,
            total_generation_ms=monotonic_ms() - started,
        )
        return AnswerStream(
            query_id=query_id,
            chunks=tuple(received),
            final_text="".join(chunk.text for chunk in received),
            timings=timings,
            status=status,
        )


class HttpTranscriber(_HttpClientBase):
    def transcribe(self, audio: bytes, content_type: str) -> Transcription:
        if not audio:
            raise ValueError("audio payload must be non-empty")
        started = monotonic_ms()
        response = self._post_json(
            "/v1/transcribe",
            {
                "audio_b64": base64.b64encode(audio).decode("ascii"),
                "content_type": content_type,
            },
        )
        try:
            text = response.json()["text"]
        except (ValueError, KeyError) as exc:
            raise ProtocolError(f"malformed transcription response: {exc}") from exc
        return Transcription(text=text, asr_ms=monotonic_ms() - started)


class HttpSynthesizer(_HttpClientBase):
    def synthesize(self, text: str) -> Synthesis:
        if not text:
            raise ValueError("text must be non-empty")
        started = monotonic_ms()
        response = self._post_json("/v1/synthesize", {"text": text})
        content_type = response.headers.get("content-type", "")
        if not content_type.startswith("audio/"):
            raise ProtocolError(f"synthesizer returned non-audio content: {content_type!r}")
        return Synthesis(
            audio=response.content,
            content_type=content_type,
            tts_ms=monotonic_ms() - started,
        )
