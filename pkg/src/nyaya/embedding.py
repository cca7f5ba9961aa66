"""Text to unit vectors: a deterministic hashed-bag embedder and a remote client.

The local embedder exists so every pipeline stage can run offline and
byte-reproducibly: each whitespace token is canonicalized (lowercased,
leading/trailing punctuation stripped so "Bail," and "bail" agree), hashed
with 64-bit FNV-1a (seed XORed into the offset basis) into one of
`dimension` buckets, bucket counts are accumulated, and the vector is
L2-normalized. Remote vectors are re-normalized locally because cosine
search assumes unit vectors.
"""

from __future__ import annotations

import threading
from typing import Protocol, Sequence

import httpx
import numpy as np

from .errors import EmbeddingError, TransportError

DEFAULT_DIMENSION = 256

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

_EDGE_PUNCT = "\"'`.,;:!?()[]{}<>…—-"


def canonical_token(token: str) -> str:
    """Lowercase and trim edge punctuation; internal characters survive, so
    "non-bailable" and "Section 378." keep their identity."""
    return token.lower().strip(_EDGE_PUNCT)


def fnv1a_64(data: bytes, seed: int = 0) -> int:
    h = _FNV_OFFSET ^ (seed & _MASK64)
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def normalize(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """L2-normalize to a float32 unit vector; rejects zero or non-finite input."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise EmbeddingError("embedding must be a 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise EmbeddingError("embedding contains non-finite components")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0:
        raise EmbeddingError("cannot normalize a zero vector")
    return (arr / norm).astype(np.float32)


class Embedder(Protocol):
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]: ...


def _require_nonempty(texts: Sequence[str]) -> None:
    for i, text in enumerate(texts):
        if not text or not text.strip():
            raise EmbeddingError(f"text at position {i} is empty")


class LocalHashEmbedder:
    """Deterministic, dependency-free embedder for tests and offline runs.

    Identical text always yields an identical vector, on every platform,
    because the hash is fixed FNV-1a with an explicit seed.
    """

    def __init__(self, dimension: int = DEFAULT_DIMENSION, seed: int = 0):
        if dimension < 1:
            raise EmbeddingError("dimension must be >= 1")
        self.dimension = dimension
        self.seed = seed

    def embed(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise EmbeddingError("cannot embed empty text")
        counts = np.zeros(self.dimension, dtype=np.float64)
        hashed = 0
        for raw in text.split():
            token = canonical_token(raw)
            if not token:
                continue
            bucket = fnv1a_64(token.encode("utf-8"), self.seed) % self.dimension
            counts[bucket] += 1.0
            hashed += 1
        if hashed == 0:
            raise EmbeddingError("text has no hashable tokens")
        return normalize(counts)

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        _require_nonempty(texts)
        return [self.embed(t) for t in texts]


class RemoteEmbedder:
    """Client for a generic JSON-over-HTTP embeddings endpoint.

    POSTs {model, input: [...]} to `{base_url}/embeddings` and expects
    {"data": [{"embedding": [...]}, ...]} in input order.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        dimension: int,
        api_key: str = "",
        timeout: float = 30.0,
        max_in_flight: int = 4,
        client: httpx.Client | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.dimension = dimension
        self._headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = client or httpx.Client(timeout=timeout)
        self._slots = threading.Semaphore(max_in_flight)

    def embed(self, text: str) -> np.ndarray:
        return self.embed_batch([text])[0]

    def embed_batch(self, texts: Sequence[str]) -> list[np.ndarray]:
        # reject the whole batch before any provider call
        _require_nonempty(texts)
        if not texts:
            return []
        with self._slots:
            try:
                resp = self._client.post(
                    f"{self.base_url}/embeddings",
                    json={"model": self.model, "input": list(texts)},
                    headers=self._headers,
                )
            except httpx.HTTPError as exc:
                raise TransportError(f"embeddings request failed: {exc}") from exc
        if resp.status_code != 200:
            raise TransportError(
                f"embeddings provider returned {resp.status_code}: {resp.text[:200]}",
                retryable=resp.status_code >= 500,
            )
        try:
            rows = resp.json()["data"]
            vectors = [normalize(row["embedding"]) for row in rows]
        except (KeyError, TypeError, ValueError) as exc:
            raise EmbeddingError(f"malformed embeddings payload: {exc}") from exc
        if len(vectors) != len(texts):
            raise EmbeddingError(
                f"provider returned {len(vectors)} vectors for {len(texts)} inputs"
            )
        for v in vectors:
            if v.shape[0] != self.dimension:
                raise EmbeddingError(
                    f"provider vector has dimension {v.shape[0]}, expected {self.dimension}"
                )
        return vectors
