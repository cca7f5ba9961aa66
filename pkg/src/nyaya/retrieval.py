"""Query to grounded context: embed, k-NN search, threshold, budget-packed passages.

Passages are packed greedily in score order and the block stops at the
first passage that would overflow the whitespace-token budget, so the
numbering [1]..[n] in the context text is always contiguous.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .corpus import Chunk, Corpus, tokenize
from .embedding import Embedder
from .errors import RetrievalUnavailableError
from .index import VectorIndex

DEFAULT_K = 5
DEFAULT_MIN_SCORE = 0.25
DEFAULT_CONTEXT_BUDGET = 3000


@dataclass(frozen=True)
class Passage:
    chunk_id: str
    doc_id: str
    source_citation: str
    score: float
    text: str


@dataclass(frozen=True)
class RetrievedContext:
    passages: tuple[Passage, ...]
    context_text: str
    token_budget_used: int


EMPTY_CONTEXT = RetrievedContext(passages=(), context_text="", token_budget_used=0)


class ChunkStore:
    """Chunk lookup plus the owning document's citation metadata."""

    def __init__(self, corpus: Corpus, chunks: Iterable[Chunk]):
        self._chunks: dict[str, Chunk] = {}
        for chunk in chunks:
            self._chunks[chunk.chunk_id] = chunk
        self._corpus = corpus

    def __len__(self) -> int:
        return len(self._chunks)

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._chunks

    def chunk_ids(self) -> list[str]:
        return list(self._chunks)

    def get(self, chunk_id: str) -> Chunk:
        return self._chunks[chunk_id]

    def citation_for(self, chunk_id: str) -> str:
        doc = self._corpus.get(self._chunks[chunk_id].doc_id)
        return doc.source_citation or doc.title


class Retriever:
    """Stateless over an immutable index/store pair; safe to share."""

    def __init__(
        self,
        embedder: Embedder,
        index: VectorIndex | None,
        store: ChunkStore | None,
        k: int = DEFAULT_K,
        min_score: float = DEFAULT_MIN_SCORE,
        token_budget: int = DEFAULT_CONTEXT_BUDGET,
    ):
        self._embedder = embedder
        self._index = index
        self._store = store
        self.k = k
        self.min_score = min_score
        self.token_budget = token_budget

    def retrieve(
        self,
        query: str,
        k: int | None = None,
        min_score: float | None = None,
    ) -> RetrievedContext:
        if self._index is None or self._store is None:
            raise RetrievalUnavailableError("no index has been built")
        if not query or not query.strip():
            raise ValueError("query must be non-empty")
        k = self.k if k is None else k
        min_score = self.min_score if min_score is None else min_score
        if k < 1:
            raise ValueError("k must be >= 1")

        hits = self._index.search(self._embedder.embed(query), k)
        hits = [h for h in hits if h.score >= min_score]

        passages: list[Passage] = []
        blocks: list[str] = []
        used = 0
        for n, hit in enumerate(hits, start=1):
            chunk = self._store.get(hit.chunk_id)
            citation = self._store.citation_for(hit.chunk_id)
            block = f"[{n}] {citation}\n{chunk.text}"
            cost = len(tokenize(block))
            if used + cost > self.token_budget:
                break
            passages.append(
                Passage(
                    chunk_id=chunk.chunk_id,
                    doc_id=chunk.doc_id,
                    source_citation=citation,
                    score=hit.score,
                    text=chunk.text,
                )
            )
            blocks.append(block)
            used += cost
        return RetrievedContext(
            passages=tuple(passages),
            context_text="\n\n".join(blocks),
            token_budget_used=used,
        )
