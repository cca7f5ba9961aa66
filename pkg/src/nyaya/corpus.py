"""Legal corpus: document/chunk types, line-delimited ingestion, window chunking.

Corpus files are UTF-8, one JSON record per line with fields
id/title/body/doc_kind plus optional domain/jurisdiction/source_citation.
Unknown fields are ignored. Tokenization everywhere is whitespace splitting.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import IO, Iterable, Iterator

from .errors import ChunkingError, IngestError

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_TOKENS = 1000
DEFAULT_OVERLAP_TOKENS = 200

LAW_DOMAIN_NAMES = ("constitutional", "criminal", "civil", "family", "corporate")


class DocKind(str, Enum):
    CONSTITUTIONAL_PROVISION = "constitutional_provision"
    STATUTE = "statute"
    CASE_LAW = "case_law"
    PRECEDENT = "precedent"


@dataclass(frozen=True)
class LegalDocument:
    id: str
    title: str
    body: str
    doc_kind: DocKind
    domain: str | None = None
    jurisdiction: str = "IN"
    source_citation: str = ""
    ingested_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    doc_id: str
    ordinal: int
    text: str
    token_start: int
    token_end: int


@dataclass(frozen=True)
class LineIssue:
    line_no: int
    reason: str


class Corpus:
    """Insertion-ordered document collection with unique ids.

    Built by a single writer during ingestion; safe for concurrent reads
    once handed out.
    """

    def __init__(self) -> None:
        self._docs: dict[str, LegalDocument] = {}

    def add(self, doc: LegalDocument) -> None:
        if doc.id in self._docs:
            raise ValueError(f"duplicate document id: {doc.id}")
        self._docs[doc.id] = doc

    def get(self, doc_id: str) -> LegalDocument:
        return self._docs[doc_id]

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def __len__(self) -> int:
        return len(self._docs)

    def __iter__(self) -> Iterator[LegalDocument]:
        return iter(self._docs.values())

    def documents(self) -> list[LegalDocument]:
        return list(self._docs.values())


@dataclass(frozen=True)
class IngestResult:
    count: int
    corpus: Corpus
    issues: tuple[LineIssue, ...]


def parse_record(obj: dict, line_no: int, now: datetime | None = None) -> LegalDocument:
    """Validate one corpus record; raises IngestError with the offending line number."""
    if not isinstance(obj, dict):
        raise IngestError(line_no, "record is not an object")
    for key in ("id", "title", "body", "doc_kind"):
        if key not in obj:
            raise IngestError(line_no, f"missing required field '{key}'")
        if not isinstance(obj[key], str):
            raise IngestError(line_no, f"field '{key}' must be a string")
    if not obj["id"]:
        raise IngestError(line_no, "id is empty")
    if not obj["body"].strip():
        raise IngestError(line_no, "body is empty")
    try:
        kind = DocKind(obj["doc_kind"])
    except ValueError:
        raise IngestError(line_no, f"unknown doc_kind '{obj['doc_kind']}'") from None
    domain = obj.get("domain")
    if domain is not None:
        if domain not in LAW_DOMAIN_NAMES:
            raise IngestError(line_no, f"unknown domain '{domain}'")
    return LegalDocument(
        id=obj["id"],
        title=obj["title"],
        body=obj["body"],
        doc_kind=kind,
        domain=domain,
        jurisdiction=obj.get("jurisdiction", "IN"),
        source_citation=obj.get("source_citation", ""),
        ingested_at=now or datetime.now(timezone.utc),
    )


def ingest(
    stream: Iterable[str] | IO[str],
    strict: bool = False,
    corpus: Corpus | None = None,
) -> IngestResult:
    """Ingest line-delimited records into a corpus.

    Malformed lines and duplicate ids are reported per line and skipped;
    in strict mode the first problem aborts with IngestError. Blank lines
    are ignored.
    """
    corpus = corpus if corpus is not None else Corpus()
    issues: list[LineIssue] = []
    count = 0
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise IngestError(line_no, f"invalid JSON: {exc.msg}") from None
            doc = parse_record(obj, line_no)
            if doc.id in corpus:
                raise IngestError(line_no, f"duplicate id '{doc.id}'")
        except IngestError as exc:
            if strict:
                raise
            issues.append(LineIssue(exc.line_no, exc.reason))
            logger.warning("ingest: skipped line %d: %s", exc.line_no, exc.reason)
            continue
        corpus.add(doc)
        count += 1
    return IngestResult(count=count, corpus=corpus, issues=tuple(issues))


def tokenize(text: str) -> list[str]:
    return text.split()


def chunk_document(
    doc: LegalDocument,
    chunk_tokens: int = DEFAULT_CHUNK_TOKENS,
    overlap_tokens: int = DEFAULT_OVERLAP_TOKENS,
) -> list[Chunk]:
    """Slide a window of `chunk_tokens` whitespace tokens with stride
    `chunk_tokens - overlap_tokens`; the last window is truncated at the
    document end so every token is covered.
    """
    if chunk_tokens < 1:
        raise ChunkingError("chunk_tokens must be >= 1")
    if overlap_tokens < 0 or overlap_tokens >= chunk_tokens:
        raise ChunkingError("need chunk_tokens > overlap_tokens >= 0")
    tokens = tokenize(doc.body)
    if not tokens:
        raise ChunkingError(f"document {doc.id} has an empty body")

    stride = chunk_tokens - overlap_tokens
    chunks: list[Chunk] = []
    start = 0
    ordinal = 0
    while True:
        end = min(start + chunk_tokens, len(tokens))
        chunks.append(
            Chunk(
                chunk_id=f"{doc.id}#{ordinal:04d}",
                doc_id=doc.id,
                ordinal=ordinal,
                text=" ".join(tokens[start:end]),
                token_start=start,
                token_end=end,
            )
        )
        if end >= len(tokens):
            break
        start += stride
        ordinal += 1
    return chunks


def chunk_corpus(
    corpus: Corpus,
    chunk_tokens: int = DEFAULT_CHUNK_TOKENS,
    overlap_tokens: int = DEFAULT_OVERLAP_TOKENS,
) -> list[Chunk]:
    """Chunk every document, in corpus order."""
    out: list[Chunk] = []
    for doc in corpus:
        out.extend(chunk_document(doc, chunk_tokens, overlap_tokens))
    return out
