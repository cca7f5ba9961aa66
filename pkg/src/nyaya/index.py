"""Exact k-nearest-neighbor cosine search over unit vectors, with binary save/load.

A flat scan is exact, trivially testable against a brute-force oracle, and
fast enough at desk scale; an ANN backend can replace it later behind the
same contract. Ties in score break by ascending chunk_id so results are
deterministic.

On-disk layout (little-endian):
    magic "NYIX" | version u8 (=1) | dimension u32 | count u64
    then per entry: id_len u16 | id bytes (UTF-8) | dimension * f32
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorruptIndexError, DimensionMismatchError, DuplicateChunkIdError, VectorIndexError

MAGIC = b"NYIX"
VERSION = 1

_HEADER = struct.Struct("<4sBIQ")
_ID_LEN = struct.Struct("<H")


@dataclass(frozen=True)
class SearchHit:
    chunk_id: str
    score: float


class VectorIndex:
    """Append-only flat index. Build single-writer, then share for reads."""

    def __init__(self, dimension: int):
        if dimension < 1:
            raise VectorIndexError("dimension must be >= 1")
        self.dimension = dimension
        self._ids: list[str] = []
        self._vectors: list[np.ndarray] = []
        self._id_set: set[str] = set()
        self._matrix: np.ndarray | None = None  # float64 cache for search

    def __len__(self) -> int:
        return len(self._ids)

    def chunk_ids(self) -> list[str]:
        return list(self._ids)

    def add(self, chunk_id: str, vector: np.ndarray) -> None:
        arr = np.asarray(vector, dtype=np.float32)
        if arr.ndim != 1 or arr.shape[0] != self.dimension:
            raise DimensionMismatchError(
                f"vector has shape {arr.shape}, index dimension is {self.dimension}"
            )
        if chunk_id in self._id_set:
            raise DuplicateChunkIdError(f"chunk_id already indexed: {chunk_id}")
        self._ids.append(chunk_id)
        self._vectors.append(arr)
        self._id_set.add(chunk_id)
        self._matrix = None

    def _scan_matrix(self) -> np.ndarray:
        if self._matrix is None:
            self._matrix = np.stack(self._vectors).astype(np.float64)
        return self._matrix

    def search(self, query: np.ndarray, k: int) -> list[SearchHit]:
        """Top-k entries by dot product (cosine for unit vectors), score
        descending, ties by ascending chunk_id. Empty index yields []."""
        if k < 1:
            raise VectorIndexError("k must be >= 1")
        q = np.asarray(query, dtype=np.float64)
        if q.ndim != 1 or q.shape[0] != self.dimension:
            raise DimensionMismatchError(
                f"query has shape {q.shape}, index dimension is {self.dimension}"
            )
        if not self._ids:
            return []
        scores = self._scan_matrix() @ q
        order = sorted(range(len(self._ids)), key=lambda i: (-scores[i], self._ids[i]))
        return [SearchHit(self._ids[i], float(scores[i])) for i in order[:k]]

    def save(self, path: str | Path) -> None:
        path = Path(path)
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, VERSION, self.dimension, len(self._ids)))
            for chunk_id, vec in zip(self._ids, self._vectors):
                id_bytes = chunk_id.encode("utf-8")
                if len(id_bytes) > 0xFFFF:
                    raise VectorIndexError(f"chunk_id too long to persist: {chunk_id[:40]}...")
                fh.write(_ID_LEN.pack(len(id_bytes)))
                fh.write(id_bytes)
                fh.write(np.ascontiguousarray(vec, dtype="<f4").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "VectorIndex":
        data = Path(path).read_bytes()
        offset = 0

        def take(n: int, what: str) -> bytes:
            nonlocal offset
            if offset + n > len(data):
                raise CorruptIndexError(f"index file truncated while reading {what}", offset)
            piece = data[offset : offset + n]
            offset += n
            return piece

        magic, version, dimension, count = _HEADER.unpack(take(_HEADER.size, "header"))
        if magic != MAGIC:
            raise CorruptIndexError(f"bad magic {magic!r}", 0)
        if version != VERSION:
            raise CorruptIndexError(f"unsupported version {version}", 4)
        if dimension == 0:
            raise CorruptIndexError("dimension is zero", 5)

        index = cls(dimension)
        vec_bytes = dimension * 4
        for _ in range(count):
            (id_len,) = _ID_LEN.unpack(take(_ID_LEN.size, "id length"))
            chunk_id = take(id_len, "id bytes").decode("utf-8")
            vec = np.frombuffer(take(vec_bytes, f"vector for {chunk_id}"), dtype="<f4")
            index.add(chunk_id, vec.astype(np.float32))
        if offset != len(data):
            raise CorruptIndexError("trailing bytes after last entry", offset)
        return index
