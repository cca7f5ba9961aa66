"""HTTP API: the /v1 JSON contract shared by the web UI and eval clients.

Blocked answers are domain results, not transport errors: they come back
as HTTP 200 with compliance.decision == "blocked".
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field

from ..errors import EvalInputError, GatewayError, IngestError, SessionNotFoundError, StorageError
from ..evals import load_eval_records
from .engine import Engine


class QueryBody(BaseModel):
    text: str


class IngestBody(BaseModel):
    documents: list[dict] = Field(default_factory=list)
    strict: bool = False


class EvalBody(BaseModel):
    records: list[dict] | None = None
    dataset_path: str | None = None
    k: int = 5


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="nyaya", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.engine = engine

    @app.post("/v1/sessions", status_code=201)
    def create_session() -> dict:
        try:
            return {"session_id": engine.create_session()}
        except StorageError as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc

    @app.post("/v1/sessions/{session_id}/query")
    def query(session_id: str, body: QueryBody) -> dict:
        if not body.text or not body.text.strip():
            raise HTTPException(status_code=400, detail="text must be non-empty")
        try:
            return engine.query(session_id, body.text)
        except SessionNotFoundError as exc:
            raise HTTPException(status_code=404, detail=f"unknown session {exc}") from exc
        except GatewayError as exc:
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        except StorageError as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc

    @app.get("/v1/sessions/{session_id}/history")
    def history(session_id: str, last_n: int | None = None) -> dict:
        try:
            return {"session_id": session_id, "turns": engine.history(session_id, last_n)}
        except SessionNotFoundError as exc:
            raise HTTPException(status_code=404, detail=f"unknown session {exc}") from exc
        except StorageError as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc

    @app.post("/v1/corpus/documents")
    def ingest(body: IngestBody) -> dict:
        lines = [json.dumps(doc) for doc in body.documents]
        try:
            result = engine.ingest(lines, strict=body.strict)
        except IngestError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return {
            "ingested": result.count,
            "corpus_docs": engine.corpus_size(),
            "errors": [{"line": i.line_no, "reason": i.reason} for i in result.issues],
        }

    @app.post("/v1/corpus/reindex")
    def reindex() -> dict:
        return engine.reindex()

    @app.get("/v1/health")
    def health() -> dict:
        return engine.health()

    @app.post("/v1/eval/run")
    def eval_run(body: EvalBody) -> dict:
        try:
            if body.records is not None:
                records = load_eval_records(json.dumps(r) for r in body.records)
            elif body.dataset_path:
                records = load_eval_records(body.dataset_path)
            else:
                raise HTTPException(status_code=400, detail="provide records or dataset_path")
            report = engine.run_eval(records, k=body.k)
        except EvalInputError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return report.to_dict()

    return app
