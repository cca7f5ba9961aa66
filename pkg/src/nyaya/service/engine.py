"""Engine: wires corpus, index, classifier, retrieval, agents, compliance,
sessions, and evals into one process.

Queries read an immutable snapshot (index, chunk store, classifier,
generation counter) taken once at the start of the request; reindex builds
a complete new snapshot and swaps the reference atomically, so a query
never sees a partially built index and its citations always resolve
within a single generation. Query handling is serialized per session;
different sessions run concurrently.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from .. import corpus as corpus_mod
from ..agents import Orchestrator, load_marker_table
from ..classifier import (
    DomainClassifier,
    DomainLabel,
    LexiconEntry,
    build_centroids,
    load_lexicon,
)
from ..compliance import RuleEngine, load_rules
from ..config import EngineConfig, data_path
from ..embedding import Embedder, LocalHashEmbedder, RemoteEmbedder
from ..errors import NyayaError, SessionNotFoundError
from ..evals import EvalRecord, EvalReport, build_report
from ..index import VectorIndex
from ..llm_gateway import ChatGateway, RemoteChatGateway, ScriptedGateway
from ..retrieval import ChunkStore, Retriever
from ..session import SessionStore, Turn, utc_now_iso


def gateway_from_config(config: EngineConfig) -> ChatGateway:
    if config.llm_provider == "remote":
        if not config.llm_base_url or not config.llm_model:
            raise NyayaError("remote chat provider needs NYAYA_LLM_BASE_URL and NYAYA_LLM_MODEL")
        return RemoteChatGateway(
            config.llm_base_url, config.llm_model, api_key=config.llm_api_key
        )
    if config.llm_provider != "scripted":
        raise NyayaError(f"unknown chat provider '{config.llm_provider}'")
    return ScriptedGateway.from_file(config.llm_script or str(data_path("demo_script.json")))


def embedder_from_config(config: EngineConfig) -> Embedder:
    if config.embed_provider == "remote":
        if not config.embed_base_url or not config.embed_model:
            raise NyayaError(
                "remote embedder needs NYAYA_EMBED_BASE_URL and NYAYA_EMBED_MODEL"
            )
        return RemoteEmbedder(
            config.embed_base_url,
            config.embed_model,
            dimension=config.dimension,
            api_key=config.embed_api_key,
        )
    if config.embed_provider != "local":
        raise NyayaError(f"unknown embedding provider '{config.embed_provider}'")
    return LocalHashEmbedder(dimension=config.dimension)

@dataclass(frozen=True)
class Snapshot:
    """One consistent generation of searchable state."""

    generation: int
    index: VectorIndex | None
    store: ChunkStore | None
    classifier: DomainClassifier
    retriever: Retriever

def load_prompts() -> dict[str, str]:
    names = ("general", "research", "case_analysis", "summarization", "drafting", "refusal")
    return {
        name: data_path(f"prompts/{name}.txt").read_text(encoding="utf-8").strip()
        for name in names
    }

class Engine:
    def __init__(
        self,
        config: EngineConfig,
        gateway: ChatGateway | None = None,
        embedder: Embedder | None = None,
        lexicon: Sequence[LexiconEntry] | None = None,
        rules_path: str | None = None,
    ):
        self.config = config
        self.embedder = embedder if embedder is not None else embedder_from_config(config)
        self.gateway = gateway if gateway is not None else gateway_from_config(config)
        self.lexicon = list(lexicon) if lexicon is not None else load_lexicon(data_path("lexicon.jsonl"))
        self.markers = load_marker_table(data_path("markers.json"))
        self.prompts = load_prompts()
        self.rule_engine = RuleEngine(
            load_rules(rules_path or config.rules_path or data_path("rules.jsonl"))
        )
        self.sessions = SessionStore(config.data_dir)

        self._corpus = corpus_mod.Corpus()
        self._corpus_lock = threading.Lock()
        self._snapshot_lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}
        self._session_locks_guard = threading.Lock()
        self._snapshot = self._build_snapshot(generation=0, index=None, store=None)

    # -- snapshot plumbing ------------------------------------------------

    def _classifier_for(self, centroids) -> DomainClassifier:
        return DomainClassifier(
            self.lexicon,
            embedder=self.embedder,
            centroids=centroids,
            w_lex=self.config.w_lex,
            w_emb=self.config.w_emb,
            threshold=self.config.classify_threshold,
        )

    def _build_snapshot(self, generation: int, index, store, centroids=None) -> Snapshot:
        classifier = self._classifier_for(centroids)
        retriever = Retriever(
            self.embedder,
            index,
            store,
            k=self.config.retrieval_k,
            min_score=self.config.min_score,
            token_budget=self.config.context_budget,
        )
        return Snapshot(
            generation=generation,
            index=index,
            store=store,
            classifier=classifier,
            retriever=retriever,
        )

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    def _orchestrator(self, snap: Snapshot) -> Orchestrator:
        return Orchestrator(
            classifier=snap.classifier,
            retriever=snap.retriever,
            gateway=self.gateway,
            prompts=self.prompts,
            markers=self.markers,
            refusal_text=self.prompts["refusal"],
            session_window=self.config.session_window,
        )

    # -- corpus and index --------------------------------------------------

    def ingest(self, lines: Iterable[str], strict: bool = False) -> corpus_mod.IngestResult:
        with self._corpus_lock:
            return corpus_mod.ingest(lines, strict=strict, corpus=self._corpus)

    def corpus_size(self) -> int:
        return len(self._corpus)

    def reindex(self) -> dict:
        """Build a full new generation off the current corpus, then swap."""
        with self._corpus_lock:
            docs = self._corpus.documents()
        chunks = []
        for doc in docs:
            chunks.extend(
                corpus_mod.chunk_document(
                    doc, self.config.chunk_tokens, self.config.overlap_tokens
                )
            )
        index = VectorIndex(self.embedder.dimension)
        for chunk in chunks:
            index.add(chunk.chunk_id, self.embedder.embed(chunk.text))
        snapshot_corpus = corpus_mod.Corpus()
        for doc in docs:
            snapshot_corpus.add(doc)
        store = ChunkStore(snapshot_corpus, chunks)
        centroids = build_centroids(
            snapshot_corpus,
            self.embedder,
            self.config.chunk_tokens,
            self.config.overlap_tokens,
        )
        with self._snapshot_lock:
            generation = self._snapshot.generation + 1
            self._snapshot = self._build_snapshot(generation, index, store, centroids)
        return {"generation": generation, "index_size": len(index)}

    # -- sessions and queries ----------------------------------------------

    def create_session(self) -> str:
        return self.sessions.create_session().session_id

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._session_locks_guard:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def query(self, session_id: str, text: str) -> dict:
        if not text or not text.strip():
            raise ValueError("query text must be non-empty")
        if not self.sessions.exists(session_id):
            raise SessionNotFoundError(session_id)
        with self._session_lock(session_id):
            started = time.perf_counter()
            snap = self._snapshot
            history = [
                (t.user_text, t.final_text)
                for t in self.sessions.get_history(session_id, self.config.session_window)
            ]
            draft = self._orchestrator(snap).orchestrate(text, history)
            verdict = self.rule_engine.validate(draft)
            blocked = verdict.decision == "blocked"
            citations = [] if blocked else [
                {"chunk_id": c.chunk_id, "source_citation": c.source_citation}
                for c in draft.citations
            ]
            result = {
                "final_text": verdict.final_text,
                "domain": draft.classification.label.value,
                "confidence": round(draft.classification.confidence, 6),
                "complexity": draft.routing.complexity,
                "agents_used": [k.value for k in draft.routing.selected_agents],
                "citations": citations,
                "compliance": {
                    "decision": verdict.decision,
                    "fired_rules": list(verdict.fired_rules),
                },
                "timing_ms": int((time.perf_counter() - started) * 1000),
            }
            ordinal = len(self.sessions.get_history(session_id))
            self.sessions.append_turn(
                session_id,
                Turn(
                    ordinal=ordinal,
                    user_text=text,
                    final_text=verdict.final_text,
                    domain=result["domain"],
                    confidence=result["confidence"],
                    complexity=result["complexity"],
                    agents_used=tuple(result["agents_used"]),
                    decision=verdict.decision,
                    fired_rules=tuple(verdict.fired_rules),
                    citations=tuple(citations),
                    created_at=utc_now_iso(),
                ),
            )
            return result

    def history(self, session_id: str, last_n: int | None = None) -> list[dict]:
        turns = self.sessions.get_history(session_id, last_n)
        return [turn.to_payload() for turn in turns]

    def health(self) -> dict:
        snap = self._snapshot
        return {
            "status": "ok",
            "corpus_docs": self.corpus_size(),
            "index_size": len(snap.index) if snap.index is not None else 0,
            "generation": snap.generation,
        }

    # -- evaluation ---------------------------------------------------------

    def run_eval(self, records: Sequence[EvalRecord], k: int = 5) -> EvalReport:
        """Run the full pipeline per record (no session persistence) and
        score it with the metric harness."""
        snap = self._snapshot
        orchestrator = self._orchestrator(snap)
        predictions: list[DomainLabel] = []
        retrieved: list[list[str]] = []
        answers: list[str] = []
        for record in records:
            draft = orchestrator.orchestrate(record.query)
            verdict = self.rule_engine.validate(draft)
            predictions.append(draft.classification.label)
            if snap.index is not None and draft.classification.label != DomainLabel.OUT_OF_DOMAIN:
                hits = snap.index.search(self.embedder.embed(record.query), k)
                retrieved.append([h.chunk_id for h in hits])
            else:
                retrieved.append([])
            answers.append(verdict.final_text)
        golds = [r.gold_domain for r in records]
        relevant = [r.relevant_chunk_ids for r in records]
        return build_report(predictions, golds, retrieved, relevant, answers, records, k)
