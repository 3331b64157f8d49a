"""LLM access: a live OpenAI-compatible chat backend and an offline fixture store.

Every call goes through :class:`LLMClient`, which enforces the token budget
and appends the exchange to the run ledger.
"""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

logger = logging.getLogger(__name__)

DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"
_ROUND = re.compile(r"^(?P<stem>.*/round)(?P<n>\d+)$")


class LLMError(RuntimeError):
    pass


class AuthError(LLMError):
    pass


class TransportError(LLMError):
    def __init__(self, message: str, attempts: int):
        self.attempts = attempts
        super().__init__(f"{message} (after {attempts} attempts)")


class BudgetExceeded(LLMError):
    def __init__(self, used: int, budget: int):
        self.used = used
        self.budget = budget
        super().__init__(f"token budget exhausted: {used} of {budget} tokens used")


class FixtureMissing(LLMError):
    pass


@dataclass(frozen=True)
class LLMConfig:
    endpoint: str = DEFAULT_ENDPOINT
    model: str = "gpt-4o-mini"
    temperature: float = 0.0
    max_tokens: int = 2048
    retries: int = 2
    backoff: float = 0.5
    api_key_env: str = "LLM_API_KEY"
    token_budget: int | None = None
    timeout: float = 60.0

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError(f"temperature must be in [0, 2], got {self.temperature}")
        if self.retries < 0:
            raise ValueError(f"retries must be >= 0, got {self.retries}")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")
        if self.token_budget is not None and self.token_budget <= 0:
            raise ValueError("token_budget must be positive when set")

    @classmethod
    def from_mapping(cls, data: Mapping) -> LLMConfig:
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown llm settings: {', '.join(sorted(unknown))}")
        return cls(**data)


@dataclass(frozen=True)
class Completion:
    text: str
    usage: dict = field(default_factory=dict)
    backend: str = "live"


class FixtureStore:
    """Directory of canned completions: key ``a/b/round1`` is file ``a/b/round1.txt``.

    A missing ``.../roundN`` key falls back to the closest lower round, so
    stable answers need to be recorded only once.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        if not self.root.is_dir():
            raise FixtureMissing(f"fixture directory {self.root} does not exist")

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.txt"

    def resolve(self, key: str) -> str:
        if self._path(key).is_file():
            return key
        m = _ROUND.match(key)
        if m:
            for n in range(int(m.group("n")) - 1, 0, -1):
                candidate = f"{m.group('stem')}{n}"
                if self._path(candidate).is_file():
                    return candidate
        raise FixtureMissing(f"no fixture for key {key!r} under {self.root}")

    def lookup(self, key: str) -> tuple[str, str]:
        resolved = self.resolve(key)
        return resolved, self._path(resolved).read_text(encoding="utf-8")


class RunLedger:
    """Append-only JSON-lines log of every exchange in one run."""

    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path else None
        self.records: list[dict] = []
        self._lock = threading.Lock()
        if self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.write_text("", encoding="utf-8")

    def append(self, record: dict) -> None:
        with self._lock:
            record = {"seq": len(self.records) + 1, **record}
            self.records.append(record)
            if self.path:
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(record, sort_keys=True) + "\n")


def _word_count(text: str) -> int:
    return len(text.split())


class LLMClient:
    """Send prompts to the live endpoint, or replay them from a fixture store."""

    def __init__(self, config: LLMConfig | None = None, *, fixtures: FixtureStore | str | Path | None = None,
                 ledger: RunLedger | None = None, transport=None,
                 sleep: Callable[[float], None] = time.sleep, env: Mapping[str, str] | None = None):
        self.config = config or LLMConfig()
        if fixtures is not None and not isinstance(fixtures, FixtureStore):
            fixtures = FixtureStore(fixtures)
        self.fixtures = fixtures
        self.ledger = ledger or RunLedger()
        self.tokens_used = 0
        self._transport = transport
        self._sleep = sleep
        self._env = os.environ if env is None else env
        self._http = None
        self._lock = threading.Lock()

    @property
    def backend(self) -> str:
        return "fixture" if self.fixtures is not None else "live"

    def _charge(self, tokens: int) -> None:
        with self._lock:
            self.tokens_used += tokens

    def _check_budget(self) -> None:
        budget = self.config.token_budget
        if budget is not None and self.tokens_used >= budget:
            raise BudgetExceeded(self.tokens_used, budget)

    def complete(self, prompt: str, *, key: str) -> Completion:
        """Return the completion for ``prompt``; ``key`` names it in the fixture store."""
        self._check_budget()
        if self.fixtures is not None:
            resolved, text = self.fixtures.lookup(key)
            usage = {"prompt_tokens": _word_count(prompt), "completion_tokens": _word_count(text),
                     "attempts": 1}
            completion = Completion(text, usage, f"fixture:{resolved}")
        else:
            completion = self._complete_live(prompt)
        usage = completion.usage
        self._charge(usage.get("total_tokens", usage.get("prompt_tokens", 0) + usage.get("completion_tokens", 0)))
        self.ledger.append({"backend": completion.backend, "key": key, "model": self.config.model,
                            "prompt": prompt, "response": completion.text, "usage": usage})
        return completion

    def complete_many(self, requests: list[tuple[str, str]], max_workers: int = 4) -> list[Completion]:
        """Issue independent ``(prompt, key)`` requests concurrently; results keep input order."""
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            return list(pool.map(lambda pk: self.complete(pk[0], key=pk[1]), requests))

    def _client(self):
        if self._http is None:
            import httpx

            self._http = httpx.Client(transport=self._transport, timeout=self.config.timeout)
        return self._http

    def _complete_live(self, prompt: str) -> Completion:
        import httpx

        cfg = self.config
        api_key = self._env.get(cfg.api_key_env)
        if not api_key:
            raise AuthError(f"environment variable {cfg.api_key_env} is not set")
        payload = {
            "model": cfg.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }
        headers = {"Authorization": f"Bearer {api_key}"}
        last_error = ""
        for attempt in range(1, cfg.retries + 2):
            try:
                response = self._client().post(cfg.endpoint, json=payload, headers=headers)
            except httpx.TransportError as exc:
                last_error = f"transport failure: {exc}"
            else:
                if response.status_code in (401, 403):
                    raise AuthError(f"endpoint rejected the API key (HTTP {response.status_code})")
                if response.status_code == 429 or response.status_code >= 500:
                    last_error = f"HTTP {response.status_code}"
                elif response.status_code >= 400:
                    raise LLMError(f"request rejected: HTTP {response.status_code}: {response.text[:200]}")
                else:
                    body = response.json()
                    text = body["choices"][0]["message"]["content"] or ""
                    usage = dict(body.get("usage") or {})
                    usage["attempts"] = attempt
                    return Completion(text, usage, "live")
            if attempt <= cfg.retries:
                delay = cfg.backoff * (2 ** (attempt - 1))
                logger.warning("LLM call failed (%s); retry %d/%d in %.2fs", last_error, attempt, cfg.retries, delay)
                self._sleep(delay)
        raise TransportError(last_error, cfg.retries + 1)

    def close(self) -> None:
        if self._http is not None:
            self._http.close()
            self._http = None
