"""Session persistence: one append-only, checksummed record log per session.

Record framing, one record per line:

    <payload_len> <crc32_hex> <payload JSON>\n

JSON escapes newlines, so a record never spans lines. Appends write the
whole line, flush, and fsync before returning. On load, a record whose
length or checksum does not verify ends the readable log: everything
before it is recovered, the torn tail is dropped, and exactly one
truncation warning is reported. That gives all-or-nothing turns across
crashes without a database.
"""

from __future__ import annotations

import json
import logging
import os
import secrets
import threading
import zlib
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import SessionNotFoundError, StorageError

logger = logging.getLogger(__name__)


def utc_now_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True)
class Turn:
    ordinal: int
    user_text: str
    final_text: str  # post-compliance text only
    domain: str
    confidence: float
    complexity: str
    agents_used: tuple[str, ...]
    decision: str
    fired_rules: tuple[str, ...]
    citations: tuple[dict, ...]  # {"chunk_id", "source_citation"}
    created_at: str

    def to_payload(self) -> dict:
        return {
            "kind": "turn",
            "ordinal": self.ordinal,
            "user_text": self.user_text,
            "final_text": self.final_text,
            "domain": self.domain,
            "confidence": self.confidence,
            "complexity": self.complexity,
            "agents_used": list(self.agents_used),
            "decision": self.decision,
            "fired_rules": list(self.fired_rules),
            "citations": list(self.citations),
            "created_at": self.created_at,
        }

    @classmethod
    def from_payload(cls, obj: dict) -> "Turn":
        return cls(
            ordinal=int(obj["ordinal"]),
            user_text=obj["user_text"],
            final_text=obj["final_text"],
            domain=obj["domain"],
            confidence=float(obj["confidence"]),
            complexity=obj["complexity"],
            agents_used=tuple(obj["agents_used"]),
            decision=obj["decision"],
            fired_rules=tuple(obj["fired_rules"]),
            citations=tuple(obj["citations"]),
            created_at=obj["created_at"],
        )


@dataclass
class Session:
    session_id: str
    created_at: str
    turns: list[Turn] = field(default_factory=list)


def encode_record(payload: dict) -> bytes:
    body = json.dumps(payload, separators=(",", ":"), sort_keys=True).encode("utf-8")
    crc = zlib.crc32(body) & 0xFFFFFFFF
    return f"{len(body)} {crc:08x} ".encode("ascii") + body + b"\n"


def decode_record(line: bytes) -> dict:
    """Raises ValueError when the framing, length, or checksum is wrong."""
    head, sep, rest = line.partition(b" ")
    if not sep:
        raise ValueError("missing length field")
    crc_hex, sep, body = rest.partition(b" ")
    if not sep:
        raise ValueError("missing checksum field")
    declared = int(head)
    if len(body) != declared:
        raise ValueError(f"length mismatch: declared {declared}, got {len(body)}")
    if zlib.crc32(body) & 0xFFFFFFFF != int(crc_hex, 16):
        raise ValueError("checksum mismatch")
    return json.loads(body.decode("utf-8"))


class SessionStore:
    """Per-session writes are serialized; reads may run concurrently."""

    def __init__(self, data_dir: str | Path):
        self._dir = Path(data_dir)
        try:
            self._dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create data dir {self._dir}: {exc}") from exc
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _path(self, session_id: str) -> Path:
        return self._dir / f"{session_id}.log"

    def create_session(self) -> Session:
        session_id = secrets.token_urlsafe(12)
        created_at = utc_now_iso()
        record = encode_record(
            {"kind": "session", "session_id": session_id, "created_at": created_at}
        )
        path = self._path(session_id)
        try:
            with open(path, "xb") as fh:
                fh.write(record)
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageError(f"cannot create session file: {exc}", retryable=True) from exc
        return Session(session_id=session_id, created_at=created_at)

    def exists(self, session_id: str) -> bool:
        return self._path(session_id).exists()

    def append_turn(self, session_id: str, turn: Turn) -> None:
        path = self._path(session_id)
        if not path.exists():
            raise SessionNotFoundError(session_id)
        record = encode_record(turn.to_payload())
        with self._lock_for(session_id):
            session, _ = self._load(path)
            expected = len(session.turns)
            if turn.ordinal != expected:
                raise StorageError(
                    f"turn ordinal {turn.ordinal} breaks contiguity (expected {expected})"
                )
            try:
                with open(path, "ab") as fh:
                    fh.write(record)
                    fh.flush()
                    os.fsync(fh.fileno())
            except OSError as exc:
                raise StorageError(f"append failed: {exc}", retryable=True) from exc

    def read_session(self, session_id: str) -> tuple[Session, list[str]]:
        """Load a session plus any recovery warnings (at most one)."""
        path = self._path(session_id)
        if not path.exists():
            raise SessionNotFoundError(session_id)
        return self._load(path)

    def get_session(self, session_id: str) -> Session:
        session, warnings = self.read_session(session_id)
        for message in warnings:
            logger.warning("session %s: %s", session_id, message)
        return session

    def get_history(self, session_id: str, last_n: int | None = None) -> list[Turn]:
        turns = self.get_session(session_id).turns
        if last_n is None:
            return list(turns)
        if last_n <= 0:
            return []
        return list(turns[-last_n:])

    def list_sessions(self) -> list[str]:
        return sorted(p.stem for p in self._dir.glob("*.log"))

    def _load(self, path: Path) -> tuple[Session, list[str]]:
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise StorageError(f"cannot read {path}: {exc}", retryable=True) from exc

        payloads: list[dict] = []
        warnings: list[str] = []
        lines = data.split(b"\n")
        # a properly terminated log ends with an empty split tail
        for i, line in enumerate(lines):
            if not line:
                continue
            try:
                payloads.append(decode_record(line))
            except (ValueError, json.JSONDecodeError) as exc:
                warnings.append(
                    f"recovered truncated log: dropped torn record ({exc}); "
                    f"{len(payloads)} records kept"
                )
                break

        if not payloads or payloads[0].get("kind") != "session":
            raise StorageError(f"{path}: missing session header record")
        meta = payloads[0]
        turns = []
        for payload in payloads[1:]:
            if payload.get("kind") != "turn":
                raise StorageError(f"{path}: unexpected record kind {payload.get('kind')!r}")
            turns.append(Turn.from_payload(payload))
        for expected, turn in enumerate(turns):
            if turn.ordinal != expected:
                raise StorageError(
                    f"{path}: turn ordinals not contiguous at position {expected}"
                )
        session = Session(
            session_id=meta["session_id"], created_at=meta["created_at"], turns=turns
        )
        return session, warnings
