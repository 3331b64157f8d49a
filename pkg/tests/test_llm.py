import json
import threading

import httpx
import pytest

from conftest import FIXTURES, TEMPLATES
from nl2pddl.llm import (
    NO_PREDICATES, AuthError, BudgetExceeded, FixtureMissing, FixtureStore, LLMClient, LLMConfig,
    LLMError, MissingPlaceholder, MissingSection, PromptTemplate, RunLedger, TransportError,
    UnknownPlaceholder, extract_sections, render_prompt,
)
from nl2pddl.pddl import parse_predicate_signature

ENV = {"LLM_API_KEY": "test-key"}


def ok_body(text="hello", tokens=7):
    return {"choices": [{"message": {"content": text}}],
            "usage": {"prompt_tokens": 3, "completion_tokens": tokens - 3, "total_tokens": tokens}}


def live_client(handler, **cfg):
    config = LLMConfig(backoff=0.0, **cfg)
    return LLMClient(config, transport=httpx.MockTransport(handler), sleep=lambda s: None, env=ENV)


# templates

def test_empty_predicates_give_sentinel():
    out = render_prompt("Known:{predicates}", {"predicates": []})
    assert out == "Known:" + NO_PREDICATES
    assert out.endswith("\nNo predicate has been defined yet")


def test_predicates_numbered_with_raw_lines():
    preds = [parse_predicate_signature("(clear ?x): nothing on ?x"), parse_predicate_signature("(arm-empty)")]
    out = render_prompt("{predicates}", {"predicates": preds})
    assert out == "\n1. (clear ?x): nothing on ?x\n2. (arm-empty)"


def test_missing_placeholder():
    with pytest.raises(MissingPlaceholder) as exc:
        render_prompt("{domain_desc} {action_name}", {"domain_desc": "x"})
    assert exc.value.names == ["action_name"]


def test_unknown_placeholder():
    with pytest.raises(UnknownPlaceholder):
        PromptTemplate("{colour}")


def test_single_pass_substitution():
    out = render_prompt("{domain_desc}|{action_name}", {"domain_desc": "{action_name}", "action_name": "pick"})
    assert out == "{action_name}|pick"


def test_shipped_templates_load():
    for path in TEMPLATES.glob("*.txt"):
        assert PromptTemplate.load(path).placeholders()


# sections

REPLY = """Some reasoning first.

### Action Parameters
```
- ?t - truck: the truck
```

### Action Preconditions
```
(truck-at ?t ?l)
```

### New Predicates
No new predicates.

### Action Preconditions
```
(and (truck-at ?t ?l) (package-at ?p ?l))
```
"""


def test_last_occurrence_wins():
    out = extract_sections(REPLY, ["Action Parameters", "Action Preconditions", "New Predicates"])
    assert out["Action Preconditions"] == "(and (truck-at ?t ?l) (package-at ?p ?l))"
    assert out["Action Parameters"] == "- ?t - truck: the truck"
    assert out["New Predicates"] == ""


def test_missing_section():
    with pytest.raises(MissingSection) as exc:
        extract_sections(REPLY, ["Action Effects"])
    assert exc.value.heading == "Action Effects"
    assert extract_sections(REPLY, ["Action Effects"], optional=("Action Effects",)) == {"Action Effects": ""}


def test_heading_inside_fence_is_body():
    text = "### A\n```\n### B\nx\n```\n"
    assert extract_sections(text, ["A"]) == {"A": "### B\nx"}


# fixture backend

def test_fixture_lookup_and_round_fallback(tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "a" / "round1.txt").write_text("one")
    store = FixtureStore(tmp_path)
    assert store.lookup("a/round3") == ("a/round1", "one")
    with pytest.raises(FixtureMissing):
        store.lookup("b/round1")


def test_fixture_client_records_ledger(llm):
    out = llm.complete("prompt words here", key="blocksworld/predicates/round1")
    assert out.backend == "fixture:blocksworld/predicates/round1"
    rec = llm.ledger.records[0]
    assert rec["seq"] == 1 and rec["key"] == "blocksworld/predicates/round1"
    assert rec["prompt"] == "prompt words here" and rec["response"] == out.text
    assert llm.tokens_used == 3 + len(out.text.split())


def test_fixture_client_never_opens_http(monkeypatch, llm):
    monkeypatch.setattr(httpx.Client, "send", lambda *a, **k: pytest.fail("network used"))
    llm.complete("x", key="blocksworld/predicates/round1")


def test_missing_fixture_dir(tmp_path):
    with pytest.raises(FixtureMissing):
        LLMClient(fixtures=tmp_path / "absent")


def test_ledger_file_has_no_timestamps(tmp_path):
    ledger = RunLedger(tmp_path / "ledger.jsonl")
    client = LLMClient(fixtures=FIXTURES, ledger=ledger)
    client.complete("p", key="blocksworld/predicates/round1")
    lines = (tmp_path / "ledger.jsonl").read_text().splitlines()
    assert len(lines) == 1
    assert set(json.loads(lines[0])) == {"seq", "backend", "key", "model", "prompt", "response", "usage"}


# live backend over a mock transport

def test_retries_then_success():
    calls = []

    def handler(request):
        calls.append(json.loads(request.content))
        return httpx.Response(500) if len(calls) < 3 else httpx.Response(200, json=ok_body())

    client = live_client(handler, retries=2)
    out = client.complete("hi", key="k")
    assert out.text == "hello" and out.usage["attempts"] == 3
    assert calls[0]["messages"] == [{"role": "user", "content": "hi"}]
    assert calls[0]["temperature"] == 0.0
    assert client.tokens_used == 7


def test_retries_exhausted():
    client = live_client(lambda r: httpx.Response(503), retries=2)
    with pytest.raises(TransportError) as exc:
        client.complete("hi", key="k")
    assert exc.value.attempts == 3


def test_connection_errors_are_retried():
    def handler(request):
        raise httpx.ConnectError("refused")

    with pytest.raises(TransportError):
        live_client(handler, retries=1).complete("hi", key="k")


def test_auth_rejected_without_retry():
    calls = []

    def handler(request):
        calls.append(1)
        return httpx.Response(401)

    with pytest.raises(AuthError):
        live_client(handler).complete("hi", key="k")
    assert len(calls) == 1


def test_missing_api_key():
    client = LLMClient(LLMConfig(), transport=httpx.MockTransport(lambda r: httpx.Response(200)), env={})
    with pytest.raises(AuthError):
        client.complete("hi", key="k")


def test_client_error_not_retried():
    with pytest.raises(LLMError):
        live_client(lambda r: httpx.Response(400, text="bad")).complete("hi", key="k")


def test_budget_enforced():
    client = live_client(lambda r: httpx.Response(200, json=ok_body(tokens=10)), token_budget=15)
    client.complete("a", key="k1")
    client.complete("b", key="k2")
    with pytest.raises(BudgetExceeded) as exc:
        client.complete("c", key="k3")
    assert (exc.value.used, exc.value.budget) == (20, 15)


@pytest.mark.parametrize("bad", [{"temperature": 3.0}, {"retries": -1}, {"max_tokens": 0}, {"token_budget": 0}])
def test_config_rejects_bad_values(bad):
    with pytest.raises(ValueError):
        LLMConfig(**bad)


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        LLMConfig.from_mapping({"modle": "x"})


def test_complete_many_keeps_order():
    lock = threading.Lock()
    seen = []

    def handler(request):
        prompt = json.loads(request.content)["messages"][0]["content"]
        with lock:
            seen.append(prompt)
        return httpx.Response(200, json=ok_body(text=prompt.upper()))

    client = live_client(handler)
    out = client.complete_many([(f"p{i}", f"k{i}") for i in range(8)])
    assert [c.text for c in out] == [f"P{i}" for i in range(8)]
    assert sorted(seen) == sorted(f"p{i}" for i in range(8))
    assert len(client.ledger.records) == 8
