"""HTTP facade over a FixtureSet, speaking the real backend wire protocol.

Lets the HTTP clients be tested against a live server with scripted behavior,
and powers fully offline gateway runs. One app serves all four roles.
"""

from __future__ import annotations

import base64
import json
import time
from typing import Iterator, Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, StreamingResponse

from ..domain import Frame, new_id
from ..errors import ProtocolError
from .base import TokenEvent
from .mocks import (
    FixtureSet,
    MockSynthesizer,
    MockTagger,
    MockTranscriber,
    digest,
    generation_key,
)

MODEL_NAME = "mock-backend"


def build_mock_backend_app(fixtures: FixtureSet, auth_token: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="mock model backends")
    tagger = MockTagger(fixtures)
    transcriber = MockTranscriber(fixtures)
    synthesizer = MockSynthesizer()

    def check_auth(request: Request) -> Optional[Response]:
        if auth_token is None:
            return None
        if request.headers.get("authorization") != f"Bearer {auth_token}":
            return JSONResponse({"detail": "missing or wrong token"}, status_code=401)
        return None

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/v1/tag")
    async def tag(request: Request) -> Response:
        denied = check_auth(request)
        if denied:
            return denied
        body = await request.json()
        frame = Frame(
            frame_id=new_id(),
            session_id="wire",
            captured_at=0.0,
            content_type=body.get("content_type", "image/jpeg"),
            data=base64.b64decode(body["image_b64"]),
        )
        try:
            tags = tagger.tag_image(frame)
        except ProtocolError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=422)
        return JSONResponse({"tags": list(tags.tags), "model": MODEL_NAME})

    @app.post("/v1/generate")
    async def generate(request: Request) -> Response:
        denied = check_auth(request)
        if denied:
            return denied
        body = await request.json()
        image = base64.b64decode(body["image_b64"])
        prompt = body["prompt"]
        entry = fixtures.gen_entries.get(generation_key(image, prompt))
        if entry is None:
            entry = fixtures.gen_entries.get(digest(image))
        if entry is None:
            return JSONResponse({"detail": "no generation fixture"}, status_code=422)

        def sse() -> Iterator[bytes]:
            chunks = entry.effective_chunks()
            if entry.first_token_delay_ms > 0:
                time.sleep(entry.first_token_delay_ms / 1000.0)
            if not chunks:
                event = TokenEvent(seq_no=0, text="", is_last=True)
                yield f"data: {json.dumps(event.to_dict())}\n\n".encode()
                return
            stop_after = (
                entry.fail_after_chunks
                if 0 <= entry.fail_after_chunks < len(chunks)
                else len(chunks)
            )
            for i in range(stop_after):
                if i > 0 and entry.inter_chunk_delay_ms > 0:
                    time.sleep(entry.inter_chunk_delay_ms / 1000.0)
                event = TokenEvent(seq_no=i, text=chunks[i], is_last=i == len(chunks) - 1)
                yield f"data: {json.dumps(event.to_dict())}\n\n".encode()
            # A scripted failure simply cuts the stream before the last event.

        return StreamingResponse(sse(), media_type="text/event-stream")

    @app.post("/v1/transcribe")
    async def transcribe(request: Request) -> Response:
        denied = check_auth(request)
        if denied:
            return denied
        body = await request.json()
        audio = base64.b64decode(body["audio_b64"])
        try:
            result = transcriber.transcribe(audio, body.get("content_type", "audio/wav"))
        except (ProtocolError, ValueError) as exc:
            return JSONResponse({"detail": str(exc)}, status_code=422)
        return JSONResponse({"text": result.text})

    @app.post("/v1/synthesize")
    async def synthesize(request: Request) -> Response:
        denied = check_auth(request)
        if denied:
            return denied
        body = await request.json()
        try:
            result = synthesizer.synthesize(body.get("text", ""))
        except ValueError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=422)
        return Response(content=result.audio, media_type=result.content_type)

    return app
