from __future__ import annotations

import json

import httpx
import pytest

from nyaya.errors import GatewayError, RuleFileError, ScriptMissError
from nyaya.llm_gateway import (
    ChatMessage,
    ChatRequest,
    ChatResponse,
    RemoteChatGateway,
    Script,
    ScriptedGateway,
    ScriptEntry,
    load_script,
)


def req(text: str, role: str = "general", system: str = "sys") -> ChatRequest:
    return ChatRequest(
        system_prompt=system, messages=(ChatMessage("user", text),), agent_role=role
    )


SCRIPT = Script(
    entries=(
        ScriptEntry("research", "theft", "canned research answer about theft [1]"),
        ScriptEntry("research", "", "generic research answer"),
        ScriptEntry("general", "bail", "canned bail answer"),
    ),
    default="the default answer",
)


# -- request validation ---------------------------------------------------------


def test_request_requires_messages():
    with pytest.raises(GatewayError):
        ChatRequest(system_prompt="s", messages=())


def test_request_last_message_must_be_user():
    with pytest.raises(GatewayError):
        ChatRequest(
            system_prompt="s",
            messages=(ChatMessage("user", "a"), ChatMessage("assistant", "b")),
        )


def test_request_temperature_non_negative():
    with pytest.raises(GatewayError):
        ChatRequest(system_prompt="s", messages=(ChatMessage("user", "a"),), temperature=-0.1)


# -- scripted gateway -------------------------------------------------------------


def test_scripted_first_matching_pattern_wins():
    gw = ScriptedGateway(SCRIPT)
    out = gw.complete(req("what is the punishment for THEFT?", role="research"))
    assert out.content == "canned research answer about theft [1]"
    assert out.provider_id == "scripted"


def test_scripted_role_scoping():
    gw = ScriptedGateway(SCRIPT)
    # same text, different role: the research entries must not fire
    assert gw.complete(req("theft question", role="general")).content == "the default answer"


def test_scripted_falls_back_to_default():
    gw = ScriptedGateway(SCRIPT)
    assert gw.complete(req("nothing matches", role="drafting")).content == "the default answer"


def test_scripted_miss_without_default():
    gw = ScriptedGateway(Script(entries=(ScriptEntry("general", "x", "y"),)))
    with pytest.raises(ScriptMissError):
        gw.complete(req("no match here"))


def test_scripted_byte_identical_across_runs():
    gw = ScriptedGateway(SCRIPT)
    request = req("bail please")
    outputs = {gw.complete(request).content for _ in range(5)}
    assert outputs == {"canned bail answer"}


def test_scripted_usage_counts_whitespace_tokens():
    gw = ScriptedGateway(SCRIPT)
    out = gw.complete(req("bail", system="one two three"))
    assert out.usage.input_tokens == 3 + 1
    assert out.usage.output_tokens == len("canned bail answer".split())


def test_load_script_file_round_trip(tmp_path):
    path = tmp_path / "script.json"
    path.write_text(
        json.dumps(
            {
                "entries": [{"role": "general", "pattern": "hi", "response": "hello"}],
                "default": "dflt",
            }
        ),
        encoding="utf-8",
    )
    gw = ScriptedGateway.from_file(path)
    assert gw.complete(req("hi there")).content == "hello"
    assert gw.complete(req("bye")).content == "dflt"


def test_load_script_validates_shape(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"entries": [{"role": "general"}]}', encoding="utf-8")
    with pytest.raises(RuleFileError):
        load_script(bad)
    with pytest.raises(RuleFileError):
        load_script({"no_entries": True})


# -- remote gateway ----------------------------------------------------------------


def remote(handler, **kwargs) -> RemoteChatGateway:
    client = httpx.Client(transport=httpx.MockTransport(handler))
    kwargs.setdefault("sleep", lambda s: None)
    return RemoteChatGateway("http://llm", "test-model", client=client, **kwargs)


def ok_payload(content="a fine answer"):
    return {
        "choices": [{"message": {"content": content}}],
        "usage": {"prompt_tokens": 12, "completion_tokens": 3},
    }


def test_remote_success_round_trip():
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen.update(json.loads(request.content))
        return httpx.Response(200, json=ok_payload())

    gw = remote(handler)
    out = gw.complete(req("what is bail?"))
    assert isinstance(out, ChatResponse)
    assert out.content == "a fine answer"
    assert out.usage.input_tokens == 12
    assert seen["model"] == "test-model"
    assert seen["messages"][0] == {"role": "system", "content": "sys"}
    assert seen["messages"][-1] == {"role": "user", "content": "what is bail?"}


def test_remote_retries_two_500s_then_succeeds():
    attempts = []

    def handler(request: httpx.Request) -> httpx.Response:
        attempts.append(1)
        if len(attempts) <= 2:
            return httpx.Response(500, text="boom")
        return httpx.Response(200, json=ok_payload("after retries"))

    gw = remote(handler, max_retries=2)
    assert gw.complete(req("hello")).content == "after retries"
    assert len(attempts) == 3


def test_remote_total_attempts_is_retries_plus_one():
    attempts = []

    def handler(request):
        attempts.append(1)
        return httpx.Response(500, text="always down")

    gw = remote(handler, max_retries=2)
    with pytest.raises(GatewayError) as err:
        gw.complete(req("hello"))
    assert len(attempts) == 3
    assert err.value.status == 500


def test_remote_backoff_is_exponential():
    sleeps = []

    def handler(request):
        return httpx.Response(500, text="down")

    client = httpx.Client(transport=httpx.MockTransport(handler))
    gw = RemoteChatGateway(
        "http://llm", "m", client=client, max_retries=2, backoff_base=0.5, sleep=sleeps.append
    )
    with pytest.raises(GatewayError):
        gw.complete(req("x"))
    assert sleeps == [0.5, 1.0]


def test_remote_client_error_does_not_retry():
    attempts = []

    def handler(request):
        attempts.append(1)
        return httpx.Response(400, text="bad request")

    gw = remote(handler, max_retries=2)
    with pytest.raises(GatewayError) as err:
        gw.complete(req("hello"))
    assert len(attempts) == 1
    assert err.value.status == 400


def test_remote_transport_error_retries():
    attempts = []

    def handler(request):
        attempts.append(1)
        if len(attempts) == 1:
            raise httpx.ConnectError("refused")
        return httpx.Response(200, json=ok_payload())

    gw = remote(handler, max_retries=2)
    assert gw.complete(req("hello")).content == "a fine answer"
    assert len(attempts) == 2


def test_remote_malformed_payload():
    gw = remote(lambda request: httpx.Response(200, json={"weird": True}))
    with pytest.raises(GatewayError):
        gw.complete(req("hello"))


def test_remote_empty_content_is_error():
    gw = remote(lambda request: httpx.Response(200, json=ok_payload("")))
    with pytest.raises(GatewayError):
        gw.complete(req("hello"))
