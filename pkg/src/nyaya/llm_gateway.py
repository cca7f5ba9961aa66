"""Provider-agnostic chat completion: a remote HTTP client and a scripted double.

The scripted gateway is a pure function of (script, request); golden
end-to-end transcripts depend on that. Script files are JSON:

    {"entries": [{"role": "...", "pattern": "...", "response": "..."}, ...],
     "default": "optional fallback text"}

Entries are tried in order; one matches when its role equals the request's
agent_role and its pattern occurs (case-insensitive substring) in the last
user message. First match wins, otherwise the default; a miss with no
default is an error.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

import httpx

from .errors import GatewayError, RuleFileError, ScriptMissError

logger = logging.getLogger(__name__)

DEFAULT_TIMEOUT = 60.0
DEFAULT_MAX_RETRIES = 2
DEFAULT_MAX_IN_FLIGHT = 4


@dataclass(frozen=True)
class ChatMessage:
    role: str  # "user" | "assistant"
    content: str


@dataclass(frozen=True)
class ChatRequest:
    system_prompt: str
    messages: tuple[ChatMessage, ...]
    temperature: float = 0.0
    max_output_tokens: int = 1024
    # which pipeline role is asking; the scripted provider keys on this
    agent_role: str = "general"

    def __post_init__(self) -> None:
        if not self.messages:
            raise GatewayError("request has no messages")
        if self.messages[-1].role != "user":
            raise GatewayError("last message must be from the user")
        if self.temperature < 0:
            raise GatewayError("temperature must be >= 0")

    @property
    def last_user_content(self) -> str:
        return self.messages[-1].content


@dataclass(frozen=True)
class ChatUsage:
    input_tokens: int
    output_tokens: int


@dataclass(frozen=True)
class ChatResponse:
    content: str
    provider_id: str
    usage: ChatUsage


class ChatGateway(Protocol):
    def complete(self, request: ChatRequest) -> ChatResponse: ...


@dataclass(frozen=True)
class ScriptEntry:
    role: str
    pattern: str
    response: str


@dataclass(frozen=True)
class Script:
    entries: tuple[ScriptEntry, ...]
    default: str | None = None


def load_script(source: str | Path | dict) -> Script:
    if isinstance(source, (str, Path)):
        try:
            obj = json.loads(Path(source).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise RuleFileError(f"cannot read script file {source}: {exc}") from exc
    else:
        obj = source
    if not isinstance(obj, dict) or not isinstance(obj.get("entries"), list):
        raise RuleFileError("script must be an object with an 'entries' list")
    entries = []
    for i, raw in enumerate(obj["entries"]):
        try:
            entries.append(
                ScriptEntry(role=str(raw["role"]), pattern=str(raw["pattern"]), response=str(raw["response"]))
            )
        except (KeyError, TypeError) as exc:
            raise RuleFileError(f"script entry {i}: {exc}") from exc
    default = obj.get("default")
    if default is not None:
        default = str(default)
    return Script(entries=tuple(entries), default=default)


class ScriptedGateway:
    """Deterministic canned provider for tests and offline runs."""

    provider_id = "scripted"

    def __init__(self, script: Script):
        self._script = script

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedGateway":
        return cls(load_script(path))

    def complete(self, request: ChatRequest) -> ChatResponse:
        needle = request.last_user_content.lower()
        content = None
        for entry in self._script.entries:
            if entry.role == request.agent_role and entry.pattern.lower() in needle:
                content = entry.response
                break
        if content is None:
            if self._script.default is None:
                raise ScriptMissError(
                    f"no script entry for role '{request.agent_role}' matches the query and no default is set"
                )
            content = self._script.default
        input_tokens = len(request.system_prompt.split()) + sum(
            len(m.content.split()) for m in request.messages
        )
        return ChatResponse(
            content=content,
            provider_id=self.provider_id,
            usage=ChatUsage(input_tokens=input_tokens, output_tokens=len(content.split())),
        )


class RemoteChatGateway:
    """JSON-over-HTTP chat completions with bounded retries.

    Transient failures (transport errors, 429, 5xx) retry up to
    `max_retries` times with exponential backoff, so total attempts are
    max_retries + 1. Everything else surfaces immediately.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str = "",
        timeout: float = DEFAULT_TIMEOUT,
        max_retries: int = DEFAULT_MAX_RETRIES,
        backoff_base: float = 0.5,
        max_in_flight: int = DEFAULT_MAX_IN_FLIGHT,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.provider_id = f"remote:{model}"
        self._headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = client or httpx.Client(timeout=timeout)
        self.max_retries = max_retries
        self.backoff_base = backoff_base
        self._sleep = sleep
        self._slots = threading.Semaphore(max_in_flight)

    def _payload(self, request: ChatRequest) -> dict:
        messages = [{"role": "system", "content": request.system_prompt}]
        messages += [{"role": m.role, "content": m.content} for m in request.messages]
        return {
            "model": self.model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }

    def complete(self, request: ChatRequest) -> ChatResponse:
        payload = self._payload(request)
        attempts = self.max_retries + 1
        last_error: str = ""
        last_status: int | None = None
        for attempt in range(attempts):
            if attempt:
                self._sleep(self.backoff_base * (2 ** (attempt - 1)))
            try:
                with self._slots:
                    resp = self._client.post(
                        f"{self.base_url}/chat/completions", json=payload, headers=self._headers
                    )
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
                logger.warning("chat attempt %d/%d failed: %s", attempt + 1, attempts, exc)
                continue
            if resp.status_code == 200:
                return self._parse(resp)
            last_status = resp.status_code
            last_error = f"provider returned {resp.status_code}: {resp.text[:200]}"
            if resp.status_code == 429 or resp.status_code >= 500:
                logger.warning("chat attempt %d/%d failed: %s", attempt + 1, attempts, last_error)
                continue
            break  # 4xx other than 429 will not improve on retry
        raise GatewayError(last_error, status=last_status)

    def _parse(self, resp: httpx.Response) -> ChatResponse:
        try:
            body = resp.json()
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError, ValueError) as exc:
            raise GatewayError(f"malformed provider payload: {exc}") from exc
        if not content:
            raise GatewayError("provider returned empty content")
        usage = body.get("usage", {})
        return ChatResponse(
            content=content,
            provider_id=self.provider_id,
            usage=ChatUsage(
                input_tokens=int(usage.get("prompt_tokens", 0)),
                output_tokens=int(usage.get("completion_tokens", 0)),
            ),
        )
