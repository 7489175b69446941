"""HTTP surface of the gateway: sessions, frames, query streaming, audio.

Query answers stream as server-sent events named "chunk", then exactly one
terminal "done" or "error" event. Protocol-level failures (unknown session,
busy session, bad payload) are plain JSON errors with a matching status code
raised before the stream starts.
"""

from __future__ import annotations

import json
from typing import Iterator, Optional

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse
from starlette.concurrency import run_in_threadpool

from .domain import Modality, TaskHint
from .errors import GatewayError
from .gateway import Gateway, StreamEvent, render_timings_table

_STATUS_BY_CODE = {
    "not_found": 404,
    "busy": 409,
    "not_ready": 409,
    "query_failed": 409,
    "no_frame": 409,
    "empty_report": 404,
    "config": 500,
    "protocol": 502,
    "timeout": 504,
    "internal": 500,
}


def _error_response(code: str, message: str, status: Optional[int] = None) -> JSONResponse:
    return JSONResponse(
        {"code": code, "message": message},
        status_code=status or _STATUS_BY_CODE.get(code, 500),
    )


def _sse(events: Iterator[StreamEvent]) -> Iterator[bytes]:
    for name, data in events:
        yield f"event: {name}\ndata: {json.dumps(data)}\n\n".encode()


def build_app(gateway: Gateway) -> FastAPI:
    app = FastAPI(title="assistive perception gateway")
    # The companion web client is served separately from the gateway.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(GatewayError)
    async def on_gateway_error(request: Request, exc: GatewayError) -> JSONResponse:
        return _error_response(exc.code, str(exc))

    @app.get("/healthz")
    async def healthz() -> Response:
        health = await run_in_threadpool(gateway.healthcheck)
        status = 200 if all(health.values()) else 503
        return JSONResponse({"status": "ok" if status == 200 else "degraded", "backends": health},
                            status_code=status)

    @app.post("/v1/sessions")
    async def create_session() -> dict:
        session_id = await run_in_threadpool(gateway.create_session)
        return {"session_id": session_id}

    @app.post("/v1/sessions/{session_id}/frames")
    async def ingest_frame(session_id: str, request: Request) -> Response:
        data = await request.body()
        content_type = request.headers.get("content-type", "application/octet-stream")
        try:
            frame = await run_in_threadpool(gateway.ingest_frame, session_id, content_type, data)
        except ValueError as exc:
            return _error_response("bad_request", str(exc), status=400)
        return JSONResponse({"frame_id": frame.frame_id, "captured_at": frame.captured_at})

    @app.post("/v1/sessions/{session_id}/queries")
    async def run_query(
        session_id: str,
        request: Request,
        modality: str,
        task: Optional[str] = None,
    ) -> Response:
        try:
            parsed_modality = Modality(modality)
        except ValueError:
            return _error_response(
                "bad_request", f"modality must be one of text, audio; got {modality!r}", 400
            )
        task_hint: Optional[TaskHint] = None
        if task is not None:
            try:
                task_hint = TaskHint(task)
            except ValueError:
                return _error_response("bad_request", f"unknown task {task!r}", 400)
        payload = await request.body()
        content_type = request.headers.get("content-type", "")
        try:
            events = await run_in_threadpool(
                gateway.handle_query,
                session_id,
                parsed_modality,
                payload,
                content_type,
                task_hint,
            )
        except ValueError as exc:
            return _error_response("bad_request", str(exc), status=400)
        return StreamingResponse(
            _sse(events),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-store"},
        )

    @app.get("/v1/sessions/{session_id}/queries/{query_id}/audio")
    async def answer_audio(session_id: str, query_id: str) -> Response:
        synthesis = await run_in_threadpool(gateway.get_answer_audio, session_id, query_id)
        return Response(content=synthesis.audio, media_type=synthesis.content_type)

    @app.get("/v1/report/timings")
    async def timings_report() -> dict:
        rows = await run_in_threadpool(gateway.stage_report)
        return {"rows": [row.to_dict() for row in rows], "table": render_timings_table(rows)}

    return app
