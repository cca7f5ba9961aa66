from __future__ import annotations

import json
import shutil

import pytest
from fastapi.testclient import TestClient

from nyaya.config import EngineConfig
from nyaya.llm_gateway import Script, ScriptedGateway
from nyaya.service.app import create_app
from nyaya.service.engine import Engine


@pytest.fixture()
def client(engine) -> TestClient:
    return TestClient(create_app(engine))


def new_session(client: TestClient) -> str:
    resp = client.post("/v1/sessions")
    assert resp.status_code == 201
    return resp.json()["session_id"]


# -- sessions -----------------------------------------------------------------


def test_create_session_201_with_id(client):
    resp = client.post("/v1/sessions")
    assert resp.status_code == 201
    assert resp.json()["session_id"]


def test_create_twice_distinct_ids(client):
    assert new_session(client) != new_session(client)


def test_unwritable_storage_is_503(tmp_path, sample_corpus_lines):
    config = EngineConfig(data_dir=tmp_path / "data")
    engine = Engine(config)
    client = TestClient(create_app(engine))
    shutil.rmtree(tmp_path / "data")
    (tmp_path / "data").write_text("a file where the dir should be")
    resp = client.post("/v1/sessions")
    assert resp.status_code == 503


# -- query --------------------------------------------------------------------


def test_query_unknown_session_404(client):
    resp = client.post("/v1/sessions/nope/query", json={"text": "What is bail?"})
    assert resp.status_code == 404


def test_query_empty_text_400(client):
    sid = new_session(client)
    resp = client.post(f"/v1/sessions/{sid}/query", json={"text": "   "})
    assert resp.status_code == 400


def test_query_result_shape_and_verdict_always_present(client):
    sid = new_session(client)
    resp = client.post(f"/v1/sessions/{sid}/query", json={"text": "What is bail?"})
    assert resp.status_code == 200
    body = resp.json()
    assert set(body) == {
        "final_text",
        "domain",
        "confidence",
        "complexity",
        "agents_used",
        "citations",
        "compliance",
        "timing_ms",
    }
    assert body["compliance"]["decision"] in ("pass", "pass_with_disclaimer", "blocked")
    assert isinstance(body["compliance"]["fired_rules"], list)


def test_out_of_domain_query_200_refusal(client):
    sid = new_session(client)
    resp = client.post(f"/v1/sessions/{sid}/query", json={"text": "best biryani recipe"})
    assert resp.status_code == 200
    body = resp.json()
    assert body["domain"] == "out_of_domain"
    assert body["compliance"]["decision"] == "pass"
    assert "outside" in body["final_text"]
    assert body["citations"] == []


def test_blocked_query_200_no_leak(client):
    sid = new_session(client)
    resp = client.post(
        f"/v1/sessions/{sid}/query",
        json={"text": "How can I destroy evidence before the police arrive?"},
    )
    assert resp.status_code == 200
    body = resp.json()
    assert body["compliance"]["decision"] == "blocked"
    assert "destroy" not in body["final_text"].lower() or "cannot be assisted" in body["final_text"]
    assert body["citations"] == []


def test_gateway_failure_502(tmp_path, sample_corpus_lines):
    config = EngineConfig(data_dir=tmp_path / "data")
    engine = Engine(config, gateway=ScriptedGateway(Script(entries=())))  # no default: always misses
    engine.ingest(sample_corpus_lines)
    engine.reindex()
    client = TestClient(create_app(engine))
    sid = new_session(client)
    resp = client.post(f"/v1/sessions/{sid}/query", json={"text": "What is bail?"})
    assert resp.status_code == 502


def test_grounded_query_citations_resolve(client):
    sid = new_session(client)
    resp = client.post(f"/v1/sessions/{sid}/query", json={"text": "What is bail?"})
    body = resp.json()
    assert body["citations"], "expected the scripted [1] citation to resolve"
    for citation in body["citations"]:
        assert citation["chunk_id"]
        assert citation["source_citation"]


# -- history ------------------------------------------------------------------


def test_history_unknown_session_404(client):
    assert client.get("/v1/sessions/ghost/history").status_code == 404


def test_history_accumulates_turns(client):
    sid = new_session(client)
    client.post(f"/v1/sessions/{sid}/query", json={"text": "What is bail?"})
    client.post(f"/v1/sessions/{sid}/query", json={"text": "best biryani recipe"})
    resp = client.get(f"/v1/sessions/{sid}/history")
    assert resp.status_code == 200
    turns = resp.json()["turns"]
    assert [t["ordinal"] for t in turns] == [0, 1]
    assert turns[0]["user_text"] == "What is bail?"
    assert turns[1]["domain"] == "out_of_domain"
    # final_text is post-compliance only
    assert turns[0]["final_text"].rstrip().endswith("]")


def test_history_last_n_window(client):
    sid = new_session(client)
    for text in ("What is bail?", "What is theft?", "best biryani recipe"):
        client.post(f"/v1/sessions/{sid}/query", json={"text": text})
    resp = client.get(f"/v1/sessions/{sid}/history", params={"last_n": 2})
    assert [t["ordinal"] for t in resp.json()["turns"]] == [1, 2]


# -- corpus, health, reindex -----------------------------------------------------


def test_health_reports_sizes(client, engine):
    resp = client.get("/v1/health")
    assert resp.status_code == 200
    body = resp.json()
    assert body["status"] == "ok"
    assert body["corpus_docs"] == 22
    assert body["index_size"] == 22
    assert body["generation"] == 1


def test_ingest_endpoint_reports_errors(client):
    docs = [
        {"id": "new-1", "title": "New", "body": "fresh body text", "doc_kind": "statute"},
        {"id": "new-2", "title": "Bad", "doc_kind": "statute"},
    ]
    resp = client.post("/v1/corpus/documents", json={"documents": docs})
    assert resp.status_code == 200
    body = resp.json()
    assert body["ingested"] == 1
    assert body["errors"][0]["line"] == 2


def test_reindex_bumps_generation(client):
    first = client.post("/v1/corpus/reindex").json()
    second = client.post("/v1/corpus/reindex").json()
    assert second["generation"] == first["generation"] + 1
    assert second["index_size"] == first["index_size"]


def test_ingested_docs_searchable_after_reindex(client, engine):
    doc = {
        "id": "new-quirky",
        "title": "Quirky law",
        "body": "zorblatt zorblatt zorblatt regulation of zorblatt devices",
        "doc_kind": "statute",
        "domain": "corporate",
        "source_citation": "Zorblatt Act",
    }
    client.post("/v1/corpus/documents", json={"documents": [doc]})
    assert "new-quirky#0000" not in engine.snapshot.store.chunk_ids()
    client.post("/v1/corpus/reindex")
    snap = engine.snapshot
    assert "new-quirky#0000" in snap.store.chunk_ids()
    hits = snap.index.search(engine.embedder.embed("zorblatt device regulation"), 1)
    assert hits[0].chunk_id == "new-quirky#0000"


# -- eval endpoint -----------------------------------------------------------------


def test_eval_run_endpoint(client):
    records = [
        {
            "query": "What is the punishment for theft under the IPC?",
            "gold_domain": "criminal",
            "relevant_chunk_ids": ["ipc-378#0000"],
            "gold_answer_keyphrases": ["theft"],
        },
        {
            "query": "best biryani recipe",
            "gold_domain": "out_of_domain",
            "relevant_chunk_ids": [],
            "gold_answer_keyphrases": [],
        },
    ]
    resp = client.post("/v1/eval/run", json={"records": records, "k": 5})
    assert resp.status_code == 200
    body = resp.json()
    assert 0.0 <= body["retrieval_precision_at_k"] <= 1.0
    assert body["n_queries"] == 2


def test_eval_run_requires_input(client):
    assert client.post("/v1/eval/run", json={}).status_code == 400


# -- provider selection from configuration -----------------------------------------


def test_provider_selection_from_env(tmp_path):
    from nyaya.embedding import LocalHashEmbedder, RemoteEmbedder
    from nyaya.errors import NyayaError
    from nyaya.llm_gateway import RemoteChatGateway
    from nyaya.service.engine import embedder_from_config, gateway_from_config

    scripted = EngineConfig(data_dir=tmp_path)
    assert isinstance(embedder_from_config(scripted), LocalHashEmbedder)
    assert isinstance(gateway_from_config(scripted), ScriptedGateway)

    remote = EngineConfig.from_env(
        {
            "NYAYA_LLM_PROVIDER": "remote",
            "NYAYA_LLM_BASE_URL": "http://llm",
            "NYAYA_LLM_MODEL": "m",
            "NYAYA_EMBED_PROVIDER": "remote",
            "NYAYA_EMBED_BASE_URL": "http://emb",
            "NYAYA_EMBED_MODEL": "e",
        }
    )
    assert isinstance(gateway_from_config(remote), RemoteChatGateway)
    assert isinstance(embedder_from_config(remote), RemoteEmbedder)

    with pytest.raises(NyayaError):
        gateway_from_config(EngineConfig.from_env({"NYAYA_LLM_PROVIDER": "remote"}))
    with pytest.raises(NyayaError):
        embedder_from_config(EngineConfig.from_env({"NYAYA_EMBED_PROVIDER": "remote"}))
    with pytest.raises(NyayaError):
        gateway_from_config(EngineConfig.from_env({"NYAYA_LLM_PROVIDER": "psychic"}))
