"""HTTP facade over the orchestrator, consumed by the CLI's serve mode and
the browser client.

All bodies are JSON.  The event stream endpoint emits one JSON event per
line; `follow=0` dumps the current log and closes (polling fallback), the
default keeps the connection open until the session closes.
"""

from __future__ import annotations

import json
import os
import queue

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse, StreamingResponse

from .core import AblationConfig, Phase
from .errors import ConfigError, LawluoError, NotFound, PhaseError, UsageError
from .orchestrator import Orchestrator
from .secretary import ConsultationReport, render_text

ENV_LISTEN = "LAWLUO_LISTEN"
ENV_DATA_DIR = "LAWLUO_DATA_DIR"
DEFAULT_LISTEN = "127.0.0.1:8750"

EVENT_STREAM_POLL_SECONDS = 1.0


def _http_error(exc: LawluoError) -> HTTPException:
    if isinstance(exc, NotFound):
        return HTTPException(status_code=404, detail=str(exc))
    if isinstance(exc, (PhaseError, UsageError, ConfigError)):
        return HTTPException(status_code=409, detail=str(exc))
    return HTTPException(status_code=500, detail=str(exc))


def create_app(orchestrator: Orchestrator) -> FastAPI:
    app = FastAPI(title="lawluo", docs_url=None, redoc_url=None)

    @app.post("/sessions")
    def create_session(body: dict | None = None):
        body = body or {}
        config = AblationConfig.from_dict(body.get("config", {}))
        try:
            session = orchestrator.create_session(
                config,
                initial_state=body.get("initial_state", ""),
                seed=body.get("seed", 0),
                created_date=body.get("created_date", ""),
            )
        except LawluoError as exc:
            raise _http_error(exc)
        return {"session_id": session.session_id}

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: dict):
        try:
            result = orchestrator.handle_user_message(session_id, body["text"])
        except LawluoError as exc:
            raise _http_error(exc)
        if result.kind == "awaiting_marks":
            return {"kind": "awaiting_marks", "tree": result.tree}
        return {"kind": "response", "text": result.text}

    @app.get("/sessions/{session_id}/tree")
    def get_tree(session_id: str):
        try:
            session = orchestrator.get_session(session_id)
        except LawluoError as exc:
            raise _http_error(exc)
        if session.pending_tree is None:
            raise HTTPException(status_code=404, detail="no clarification tree pending")
        return session.pending_tree

    @app.post("/sessions/{session_id}/marks")
    def post_marks(session_id: str, body: dict):
        try:
            text = orchestrator.submit_marks(session_id, body.get("marks", {}))
        except LawluoError as exc:
            raise _http_error(exc)
        return {"text": text}

    @app.post("/sessions/{session_id}/close")
    def close_session(session_id: str):
        try:
            report = orchestrator.close_session(session_id)
        except LawluoError as exc:
            raise _http_error(exc)
        return report.to_dict()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        try:
            session = orchestrator.get_session(session_id)
        except LawluoError as exc:
            raise _http_error(exc)
        return {
            "session_id": session.session_id,
            "phase": session.phase.value,
            "domain": (
                {"id": session.domain.id, "name": session.domain.name} if session.domain else None
            ),
            "transcript": [
                {
                    "index": t.index,
                    "speaker": t.speaker.value,
                    "text": t.text,
                    "clarification_used": t.clarification_used,
                }
                for t in session.transcript
            ],
            "report": session.report,
        }

    @app.get("/sessions/{session_id}/report.txt", response_class=PlainTextResponse)
    def get_report_text(session_id: str):
        try:
            session = orchestrator.get_session(session_id)
        except LawluoError as exc:
            raise _http_error(exc)
        if session.report is None:
            raise HTTPException(status_code=404, detail="no report yet")
        return render_text(ConsultationReport.from_dict(session.report))

    @app.get("/sessions/{session_id}/events")
    def get_events(session_id: str, follow: int = 1):
        try:
            records = orchestrator.store.read_log(session_id)
        except LawluoError as exc:
            raise _http_error(exc)

        def stream():
            for record in records:
                yield json.dumps(record, ensure_ascii=False) + "\n"
            if not follow:
                return
            q = orchestrator.store.subscribe(session_id)
            try:
                while True:
                    session = orchestrator.get_session(session_id)
                    if session.phase is Phase.CLOSED:
                        break
                    try:
                        record = q.get(timeout=EVENT_STREAM_POLL_SECONDS)
                    except queue.Empty:
                        continue
                    yield json.dumps(record, ensure_ascii=False) + "\n"
            finally:
                orchestrator.store.unsubscribe(session_id, q)

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    return app


def listen_address() -> tuple[str, int]:
    raw = os.environ.get(ENV_LISTEN, DEFAULT_LISTEN)
    host, _, port = raw.partition(":")
    return host or "127.0.0.1", int(port or 8750)
