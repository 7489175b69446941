"""Session lifecycle and the query pipeline behind the HTTP surface.

One gateway hosts many sessions; each session owns a bounded frame ring and
at most one in-flight query. A query runs the strict pipeline transcribe ->
select frame -> tag -> compose prompt -> generate, and its answer chunks are
relayed through a bounded queue: the pipeline thread produces, the caller's
iterator consumes, and a full queue blocks the producer rather than dropping
chunks. Abandoned consumers cancel the backend stream within one event.
"""

from __future__ import annotations

import dataclasses
import json
import queue as queue_module
import threading
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterator, Optional

from .backends.base import (
    Generator,
    Synthesis,
    Synthesizer,
    Tagger,
    TokenEvent,
    Transcriber,
)
from .domain import (
    AnswerStream,
    Frame,
    GenerationParams,
    Modality,
    PromptBundle,
    StageTimings,
    StreamStatus,
    TagSet,
    TaskHint,
    UserQuery,
    monotonic_ms,
    new_id,
)
from .errors import (
    BusyError,
    EmptyReportError,
    GatewayError,
    NoFrameError,
    NotFoundError,
    NotReadyError,
    QueryFailedError,
)
from .prompts import TemplateRegistry, compose_prompt, default_registry

DEFAULT_FRAME_BUFFER_CAPACITY = 32
DEFAULT_SESSION_TTL_MS = 30 * 60 * 1000.0
DEFAULT_RELAY_BUFFER = 64
_PUT_POLL_S = 0.05

# Report rows follow the task order of the published timing table.
TASK_ORDER = (
    TaskHint.SCENE_UNDERSTANDING,
    TaskHint.OBJECT_LOCALIZATION,
    TaskHint.RISK_ASSESSMENT,
    TaskHint.FREEFORM,
)

StreamEvent = tuple[str, dict[str, Any]]


@dataclass(frozen=True)
class QueryRecord:
    """Everything retained about one answered (or failed) query."""

    query: UserQuery
    selected_frame: str
    prompt: PromptBundle
    answer: AnswerStream
    audio_ref: Optional[str] = None

    def task(self) -> TaskHint:
        return self.query.task_hint or TaskHint.FREEFORM

    def to_log_dict(self, session_id: str) -> dict[str, Any]:
        return {
            "session_id": session_id,
            "query_id": self.query.query_id,
            "task": self.task().value,
            "image": self.selected_frame,
            "question": self.query.text,
            "answer": self.answer.final_text,
            "status": self.answer.status.value,
            "timings": self.answer.timings.to_dict(),
        }


class SessionState:
    """Mutable per-session state; all mutation happens under `lock`."""

    def __init__(self, session_id: str, frame_capacity: int) -> None:
        now = monotonic_ms()
        self.session_id = session_id
        self.created_at = now
        self.last_activity_at = now
        self.frames: deque[Frame] = deque(maxlen=frame_capacity)
        self.queries: dict[str, QueryRecord] = {}
        self.busy = False
        self.lock = threading.Lock()

    def touch(self) -> None:
        self.last_activity_at = monotonic_ms()


def select_frame(frames: list[Frame], query_received_at: float) -> Frame:
    """Frame with the greatest captured_at <= query time, else the earliest."""
    if not frames:
        raise NoFrameError("no frames captured in this session")
    best: Optional[Frame] = None
    for frame in frames:
        if frame.captured_at <= query_received_at:
            if best is None or frame.captured_at > best.captured_at:
                best = frame
    if best is not None:
        return best
    return min(frames, key=lambda f: f.captured_at)


@dataclass(frozen=True)
class StageReportRow:
    """Mean stage timings (ms) for one task; None where no query hit a stage."""

    task: TaskHint
    count: int
    asr_ms: Optional[float]
    tagging_ms: Optional[float]
    first_token_ms: Optional[float]
    total_generation_ms: Optional[float]
    tts_ms: Optional[float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "task": self.task.value,
            "count": self.count,
            "asr_ms": self.asr_ms,
            "tagging_ms": self.tagging_ms,
            "first_token_ms": self.first_token_ms,
            "total_generation_ms": self.total_generation_ms,
            "tts_ms": self.tts_ms,
        }


def render_timings_table(rows: list[StageReportRow]) -> str:
    """Three-column text table, seconds to four decimals."""

    def seconds(value: Optional[float]) -> str:
        return f"{value / 1000.0:.4f}" if value is not None else "-"

    header = ("Task", "Image Tagging (s)", "Vision-Language First Token (s)")
    body = [
        (
            row.task.value.replace("_", " ").title(),
            seconds(row.tagging_ms),
            seconds(row.first_token_ms),
        )
        for row in rows
    ]
    widths = [max(len(line[i]) for line in [header, *body]) for i in range(3)]
    lines = ["  ".join(col.ljust(widths[i]) for i, col in enumerate(line)) for line in [header, *body]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


class Gateway:
    """The orchestrator: sessions, frames, queries, audio, and reports."""

    def __init__(
        self,
        *,
        tagger: Tagger,
        generator: Generator,
        transcriber: Transcriber,
        synthesizer: Synthesizer,
        template_registry: Optional[TemplateRegistry] = None,
        generation: GenerationParams = GenerationParams(),
        frame_buffer_capacity: int = DEFAULT_FRAME_BUFFER_CAPACITY,
        session_ttl_ms: float = DEFAULT_SESSION_TTL_MS,
        session_log: Optional[Path] = None,
        relay_buffer_size: int = DEFAULT_RELAY_BUFFER,
    ) -> None:
        if frame_buffer_capacity < 1:
            raise ValueError("frame_buffer_capacity must be >= 1")
        if session_ttl_ms <= 0:
            raise ValueError("session_ttl_ms must be > 0")
        if relay_buffer_size < 1:
            raise ValueError("relay_buffer_size must be >= 1")
        self._tagger = tagger
        self._generator = generator
        self._transcriber = transcriber
        self._synthesizer = synthesizer
        self._templates = template_registry or default_registry()
        self._generation = generation
        self._frame_capacity = frame_buffer_capacity
        self._ttl_ms = session_ttl_ms
        self._session_log = session_log
        self._relay_buffer_size = relay_buffer_size
        self._sessions: dict[str, SessionState] = {}
        self._sessions_lock = threading.Lock()
        self._audio_store: dict[str, Synthesis] = {}
        self._log_lock = threading.Lock()

    # -- session lifecycle --------------------------------------------------

    def create_session(self) -> str:
        self.expire_idle_sessions()
        session = SessionState(new_id(), self._frame_capacity)
        with self._sessions_lock:
            self._sessions[session.session_id] = session
        return session.session_id

    def _get_session(self, session_id: str) -> SessionState:
        self.expire_idle_sessions()
        with self._sessions_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"unknown session {session_id}")
        return session

    def expire_idle_sessions(self, now_ms: Optional[float] = None) -> list[str]:
        now = now_ms if now_ms is not None else monotonic_ms()
        expired: list[SessionState] = []
        with self._sessions_lock:
            for session_id in list(self._sessions):
                session = self._sessions[session_id]
                if session.busy:
                    continue
                if now - session.last_activity_at > self._ttl_ms:
                    expired.append(self._sessions.pop(session_id))
        for session in expired:
            self._write_session_log(session)
            with session.lock:
                for record in session.queries.values():
                    if record.audio_ref:
                        self._audio_store.pop(record.audio_ref, None)
        return [s.session_id for s in expired]

    def _write_session_log(self, session: SessionState) -> None:
        if self._session_log is None:
            return
        with session.lock:
            lines = [
                json.dumps(record.to_log_dict(session.session_id))
                for record in session.queries.values()
            ]
        if not lines:
            return
        with self._log_lock:
            with open(self._session_log, "a", encoding="utf-8") as fh:
                for line in lines:
                    fh.write(line + "\n")

    # -- frames ---------------------------------------------------------------

    def ingest_frame(self, session_id: str, content_type: str, data: bytes) -> Frame:
        if not data:
            raise ValueError("frame payload must be non-empty")
        session = self._get_session(session_id)
        with session.lock:
            captured_at = monotonic_ms()
            if session.frames:
                # Keep capture times strictly increasing so frame selection
                # is total even when ingests land within one clock tick.
                captured_at = max(captured_at, session.frames[-1].captured_at + 0.001)
            frame = Frame(
                frame_id=new_id(),
                session_id=session_id,
                captured_at=captured_at,
                content_type=content_type or "application/octet-stream",
                data=data,
            )
            session.frames.append(frame)
            session.touch()
        return frame

    # -- queries ----------------------------------------------------------------

    def handle_query(
        self,
        session_id: str,
        modality: Modality,
        payload: bytes,
        content_type: str = "",
        task_hint: Optional[TaskHint] = None,
    ) -> Iterator[StreamEvent]:
        """Run the pipeline; returns an iterator of (event, payload) pairs.

        Session lookup, payload validation, and the busy check happen before
        this returns, so protocol-level failures surface as exceptions rather
        than stream events.
        """
        if not payload:
            raise ValueError("query payload must be non-empty")
        text: Optional[str] = None
        if modality is Modality.TEXT:
            try:
                text = payload.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise ValueError("text query payload must be valid UTF-8") from exc
            if not text.strip():
                raise ValueError("text query must be non-empty")
        session = self._get_session(session_id)
        with session.lock:
            if session.busy:
                raise BusyError("a query is already in flight on this session")
            session.busy = True
            session.touch()

        received_at = monotonic_ms()
        relay: queue_module.Queue = queue_module.Queue(maxsize=self._relay_buffer_size)
        cancel = threading.Event()
        query_id = new_id()

        producer = threading.Thread(
            target=self._run_pipeline,
            args=(session, query_id, modality, payload, content_type, task_hint,
                  text, received_at, relay, cancel),
            name=f"query-{query_id[:8]}",
            daemon=True,
        )
        producer.start()
        return self._consume(relay, cancel)

    def _consume(self, relay: queue_module.Queue, cancel: threading.Event) -> Iterator[StreamEvent]:
        try:
            while True:
                item = relay.get()
                if item is None:
                    break
                yield item
        finally:
            # Reached on sentinel, on consumer abandonment, and on errors;
            # idempotent and unblocks a producer stuck on a full queue.
            cancel.set()

    def _put(self, relay: queue_module.Queue, cancel: threading.Event, item: Optional[StreamEvent]) -> bool:
        """Blocking put with backpressure that still honors cancellation."""
        while not cancel.is_set():
            try:
                relay.put(item, timeout=_PUT_POLL_S)
                return True
            except queue_module.Full:
                continue
        return False

    def _run_pipeline(
        self,
        session: SessionState,
        query_id: str,
        modality: Modality,
        payload: bytes,
        content_type: str,
        task_hint: Optional[TaskHint],
        text: Optional[str],
        received_at: float,
        relay: queue_module.Queue,
        cancel: threading.Event,
    ) -> None:
        try:
            self._pipeline_stages(
                session, query_id, modality, payload, content_type,
                task_hint, text, received_at, relay, cancel,
            )
        finally:
            with session.lock:
                session.busy = False
                session.touch()
            # Sentinel wakes the consumer even after an error event.
            try:
                relay.put_nowait(None)
            except queue_module.Full:
                self._put(relay, cancel, None)

    def _pipeline_stages(
        self,
        session: SessionState,
        query_id: str,
        modality: Modality,
        payload: bytes,
        content_type: str,
        task_hint: Optional[TaskHint],
        text: Optional[str],
        received_at: float,
        relay: queue_module.Queue,
        cancel: threading.Event,
    ) -> None:
        def fail(stage: str, message: str) -> None:
            self._put(relay, cancel, ("error", {"stage": stage, "message": message}))

        asr_ms: Optional[float] = None
        if modality is Modality.AUDIO:
            try:
                transcription = self._transcriber.transcribe(
                    payload, content_type or "application/octet-stream"
                )
            except (GatewayError, ValueError) as exc:
                fail("asr", str(exc))
                return
            text = transcription.text
            asr_ms = transcription.asr_ms
            if not text.strip():
                fail("asr", "transcription produced empty text")
                return
        assert text is not None

        query = UserQuery(
            query_id=query_id,
            session_id=session.session_id,
            received_at=received_at,
            modality=modality,
            text=text,
            task_hint=task_hint,
        )

        try:
            with session.lock:
                frame = select_frame(list(session.frames), received_at)
        except NoFrameError as exc:
            fail("frame_selection", str(exc))
            return

        try:
            tags = self._tagger.tag_image(frame)
        except GatewayError as exc:
            fail("tagging", str(exc))
            return

        try:
            template = self._templates.select_template(task_hint)
            prompt = compose_prompt(tags, query, template)
        except GatewayError as exc:
            fail("prompt", str(exc))
            return

        provisional = QueryRecord(
            query=query,
            selected_frame=frame.frame_id,
            prompt=prompt,
            answer=AnswerStream(
                query_id=query_id,
                chunks=(),
                final_text="",
                timings=StageTimings(asr_ms=asr_ms, tagging_ms=tags.latency_ms),
                status=StreamStatus.STREAMING,
            ),
        )
        with session.lock:
            session.queries[query_id] = provisional

        def on_event(event: TokenEvent) -> None:
            self._put(relay, cancel, ("chunk", {"seq": event.seq_no, "text": event.text}))

        try:
            stream = self._generator.generate_stream(
                frame,
                prompt.final_prompt,
                self._generation,
                on_event,
                query_id=query_id,
                cancel=cancel,
            )
        except GatewayError as exc:
            self._finalize(session, query_id, provisional, None, asr_ms, tags)
            fail("generation", str(exc))
            return

        merged = self._finalize(session, query_id, provisional, stream, asr_ms, tags)
        if stream.status is StreamStatus.COMPLETE:
            self._put(
                relay,
                cancel,
                ("done", {"query_id": query_id, "timings": merged.to_dict()}),
            )
        else:
            fail("generation", "generation ended before completion")

    def _finalize(
        self,
        session: SessionState,
        query_id: str,
        provisional: QueryRecord,
        stream: Optional[AnswerStream],
        asr_ms: Optional[float],
        tags: TagSet,
    ) -> StageTimings:
        """Merge stage timings into the final record; returns the timings."""
        if stream is None:
            stream = AnswerStream(
                query_id=query_id,
                chunks=(),
                final_text="",
                timings=StageTimings(),
                status=StreamStatus.FAILED,
            )
        merged = StageTimings(
            asr_ms=asr_ms,
            tagging_ms=tags.latency_ms,
            first_token_ms=stream.timings.first_token_ms,
            total_generation_ms=stream.timings.total_generation_ms,
            tts_ms=None,
        )
        final_answer = dataclasses.replace(stream, query_id=query_id, timings=merged)
        with session.lock:
            session.queries[query_id] = dataclasses.replace(
                provisional, answer=final_answer
            )
        return merged

    # -- answer audio -------------------------------------------------------

    def get_answer_audio(self, session_id: str, query_id: str) -> Synthesis:
        session = self._get_session(session_id)
        with session.lock:
            record = session.queries.get(query_id)
            if record is None:
                raise NotFoundError(f"unknown query {query_id}")
            if record.answer.status is StreamStatus.STREAMING:
                raise NotReadyError("answer is still streaming")
            if record.answer.status is StreamStatus.FAILED:
                raise QueryFailedError("query failed; no answer to synthesize")
            if record.audio_ref is not None:
                cached = self._audio_store.get(record.audio_ref)
                if cached is not None:
                    session.touch()
                    return cached
            final_text = record.answer.final_text
        if not final_text:
            raise QueryFailedError("completed answer is empty; nothing to synthesize")

        synthesis = self._synthesizer.synthesize(final_text)

        audio_ref = new_id()
        with session.lock:
            record = session.queries[query_id]
            if record.audio_ref is not None:
                # Another caller synthesized concurrently; keep the first.
                cached = self._audio_store.get(record.audio_ref)
                if cached is not None:
                    return cached
            self._audio_store[audio_ref] = synthesis
            timings = dataclasses.replace(record.answer.timings, tts_ms=synthesis.tts_ms)
            answer = dataclasses.replace(record.answer, timings=timings)
            session.queries[query_id] = dataclasses.replace(
                record, answer=answer, audio_ref=audio_ref
            )
            session.touch()
        return synthesis

    # -- reporting ------------------------------------------------------------

    def _completed_records(self, session_id: Optional[str]) -> list[QueryRecord]:
        with self._sessions_lock:
            if session_id is None:
                sessions = list(self._sessions.values())
            else:
                if session_id not in self._sessions:
                    raise NotFoundError(f"unknown session {session_id}")
                sessions = [self._sessions[session_id]]
        records = []
        for session in sessions:
            with session.lock:
                records.extend(
                    r
                    for r in session.queries.values()
                    if r.answer.status is StreamStatus.COMPLETE
                )
        return records

    def stage_report(self, session_id: Optional[str] = None) -> list[StageReportRow]:
        records = self._completed_records(session_id)
        if not records:
            raise EmptyReportError("no completed queries to report on")
        rows = []
        for task in TASK_ORDER:
            group = [r for r in records if r.task() is task]
            if not group:
                continue

            def mean_of(field: str) -> Optional[float]:
                values = [
                    getattr(r.answer.timings, field)
                    for r in group
                    if getattr(r.answer.timings, field) is not None
                ]
                return sum(values) / len(values) if values else None

            rows.append(
                StageReportRow(
                    task=task,
                    count=len(group),
                    asr_ms=mean_of("asr_ms"),
                    tagging_ms=mean_of("tagging_ms"),
                    first_token_ms=mean_of("first_token_ms"),
                    total_generation_ms=mean_of("total_generation_ms"),
                    tts_ms=mean_of("tts_ms"),
                )
            )
        return rows

    # -- health ----------------------------------------------------------------

    def healthcheck(self) -> dict[str, bool]:
        return {
            "tagger": self._tagger.ping(),
            "vlm": self._generator.ping(),
            "asr": self._transcriber.ping(),
            "tts": self._synthesizer.ping(),
        }

    # -- introspection helpers (used by the HTTP layer and tests) -----------

    def session_frames(self, session_id: str) -> list[Frame]:
        session = self._get_session(session_id)
        with session.lock:
            return list(session.frames)

    def query_record(self, session_id: str, query_id: str) -> QueryRecord:
        session = self._get_session(session_id)
        with session.lock:
            record = session.queries.get(query_id)
        if record is None:
            raise NotFoundError(f"unknown query {query_id}")
        return record

    def session_query_ids(self, session_id: str) -> list[str]:
        session = self._get_session(session_id)
        with session.lock:
            return list(session.queries)
