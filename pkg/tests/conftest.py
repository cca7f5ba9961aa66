from __future__ import annotations

import json
from pathlib import Path

import pytest

from nyaya.config import EngineConfig, data_path
from nyaya.service.engine import Engine

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture()
def sample_corpus_lines() -> list[str]:
    return data_path("sample_corpus.jsonl").read_text(encoding="utf-8").splitlines()


@pytest.fixture()
def engine(tmp_path, sample_corpus_lines) -> Engine:
    """Fully wired engine: sample corpus ingested and indexed, scripted
    gateway, local embedder, fresh session dir."""
    config = EngineConfig(data_dir=tmp_path / "data")
    eng = Engine(config)
    eng.ingest(sample_corpus_lines)
    eng.reindex()
    return eng


@pytest.fixture()
def empty_engine(tmp_path) -> Engine:
    config = EngineConfig(data_dir=tmp_path / "data")
    return Engine(config)


def make_doc_record(doc_id: str, body: str, domain: str | None = None, **extra) -> str:
    record = {
        "id": doc_id,
        "title": f"Title of {doc_id}",
        "body": body,
        "doc_kind": "statute",
    }
    if domain:
        record["domain"] = domain
    record.update(extra)
    return json.dumps(record)
