"""REST API tying the summarizer backends to the summary store.

Endpoints:
  POST /api/v1/summarize   run a backend, persist the result, return it
  GET  /api/v1/history     newest-first listing of stored summaries
  GET  /api/v1/health      liveness plus dependency status

The summarize flow is persist-then-respond: a summary is only returned after
the store has durably confirmed the insert.
"""

from __future__ import annotations

import json
import logging
import os
import time

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .backends import (
    BackendError,
    DegenerateOutput,
    ExtractiveBackend,
    SummarizeRequest,
)
from .corpus import TaskKind
from .store import StorageError, SummaryStore

ENV_ADDR = "MEDSUM_ADDR"
ENV_CORS_ORIGIN = "MEDSUM_CORS_ORIGIN"
DEFAULT_ADDR = "127.0.0.1:8080"
MAX_TEXT_BYTES = 1 << 20

log = logging.getLogger("medsum.service")

_ERROR_STATUS = {
    "invalid_request": 400,
    "backend_unavailable": 503,
    "storage_error": 500,
    "not_found": 404,
}


def _error(code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=_ERROR_STATUS[code],
        content={"code": code, "message": message},
    )


def create_app(store: SummaryStore, backend=None) -> FastAPI:
    """Build the app. ``backend=None`` means no backend is configured; the
    health endpoint reports it and summarize requests fail with 503."""
    app = FastAPI(title="medsum", docs_url=None, redoc_url=None)

    origin = os.environ.get(ENV_CORS_ORIGIN, "*")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.middleware("http")
    async def request_log(request: Request, call_next):
        start = time.monotonic()
        response = await call_next(request)
        millis = (time.monotonic() - start) * 1000
        log.info(
            "%s %s %s %d %.1fms",
            time.strftime("%Y-%m-%dT%H:%M:%S"),
            request.method,
            request.url.path,
            response.status_code,
            millis,
        )
        return response

    @app.post("/api/v1/summarize")
    async def handle_summarize(request: Request):
        try:
            body = json.loads(await request.body())
        except (json.JSONDecodeError, UnicodeDecodeError):
            return _error("invalid_request", "body is not valid JSON")
        if not isinstance(body, dict):
            return _error("invalid_request", "body must be a JSON object")
        model = body.get("model")
        text = body.get("text")
        try:
            task = TaskKind(model)
        except (ValueError, TypeError):
            return _error("invalid_request", f"unknown model {model!r}")
        if not isinstance(text, str) or not text.strip():
            return _error("invalid_request", "text must be a non-empty string")
        if len(text.encode("utf-8")) > MAX_TEXT_BYTES:
            return _error("invalid_request", "text exceeds maximum size")
        if backend is None:
            return _error("backend_unavailable", "no backend configured")
        try:
            output = backend.summarize(SummarizeRequest(task=task, text=text))
        except DegenerateOutput as exc:
            return _error("backend_unavailable", f"backend produced no summary: {exc}")
        except (BackendError, ValueError) as exc:
            return _error("backend_unavailable", str(exc))
        try:
            record = store.insert_summary(text, output.summary)
        except StorageError as exc:
            return _error("storage_error", str(exc))
        return {
            "id": record.id,
            "model": task.value,
            "summary": record.summarized,
            "created_at": record.created_time.isoformat(),
            "truncated_input": output.truncated_input,
        }

    @app.get("/api/v1/history")
    async def handle_history(request: Request):
        params = request.query_params
        try:
            limit = int(params.get("limit", "20"))
            offset = int(params.get("offset", "0"))
        except ValueError:
            return _error("invalid_request", "limit and offset must be integers")
        if limit < 1 or offset < 0:
            return _error("invalid_request", "limit must be >= 1 and offset >= 0")
        try:
            records = store.list_summaries(limit=limit, offset=offset)
            total = store.count()
        except StorageError as exc:
            return _error("storage_error", str(exc))
        return {
            "items": [
                {
                    "id": r.id,
                    "input": r.input,
                    "summary": r.summarized,
                    "created_at": r.created_time.isoformat(),
                }
                for r in records
            ],
            "total": total,
        }

    @app.get("/api/v1/health")
    async def handle_health():
        try:
            store.count()
            store_status = "ok"
        except StorageError:
            store_status = "down"
        if backend is None:
            backend_status = "unconfigured"
        elif getattr(backend, "healthy", None) is not None and not backend.healthy():
            backend_status = "down"
        else:
            backend_status = "ok"
        return {"status": "ok", "store": store_status, "backend": backend_status}

    return app


def serve(store: SummaryStore, backend=None, addr: str | None = None) -> None:
    import uvicorn

    if backend is None:
        backend = ExtractiveBackend()
    addr = addr or os.environ.get(ENV_ADDR, DEFAULT_ADDR)
    host, _, port = addr.partition(":")
    uvicorn.run(create_app(store, backend), host=host, port=int(port or 8080))
