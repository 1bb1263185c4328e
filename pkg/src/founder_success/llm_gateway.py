"""Chat-completion gateway: pluggable backends, retry with backoff, JSONL cache.

Every prompt in the pipeline goes through :class:`Gateway`. Two backends ship:

* :class:`HttpBackend` speaks the common hosted chat-completion wire format
  (POST JSON with ``model``/``messages``/``temperature``, bearer token from
  ``FS_LLM_API_KEY``, text read from ``choices[0].message.content``).
* :class:`MockBackend` answers from canned completions, for offline runs.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol

import httpx

logger = logging.getLogger(__name__)

API_KEY_ENV = "FS_LLM_API_KEY"
ENDPOINT_ENV = "FS_LLM_ENDPOINT"
DEFAULT_ENDPOINT = "https://api.openai.com/v1/chat/completions"
DEFAULT_MODEL = "gpt-4o"

RETRYABLE_STATUS = {408, 429, 500, 502, 503, 504}


class LlmError(Exception):
    retryable = False


class ConfigError(LlmError):
    pass


class AuthError(LlmError):
    pass


class TransientError(LlmError):
    retryable = True


class RateLimitError(TransientError):
    pass


class ProviderResponseError(LlmError):
    pass


class MockMissError(LlmError):
    pass


@dataclass(frozen=True)
class LlmRequest:
    prompt: str
    model_id: str = DEFAULT_MODEL
    temperature: float = 0.0
    max_output_tokens: int = 2048
    # routing hint for the mock backend; not part of the cache key
    stage: str | None = None

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    @property
    def cache_key(self) -> str:
        payload = json.dumps([self.model_id, self.prompt, float(self.temperature)], ensure_ascii=False)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class LlmResponse:
    text: str
    backend: str  # "live", "cache" or "mock"
    latency_ms: float = 0.0


class Backend(Protocol):
    name: str

    def complete(self, req: LlmRequest) -> str: ...


def prompt_fingerprint(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


_FOUNDER_HEADER = re.compile(r"^#\s*founder_id:\s*(\S+)\s*$", re.MULTILINE)


class MockBackend:
    """Canned completions keyed by prompt fingerprint, or by (founder_id, stage).

    The second form is for hand-written fixtures: a prompt containing a line
    ``# founder_id: <id>`` is answered from the entry registered for that
    founder and the request's ``stage``. Unknown prompts go to ``fallback`` if
    given, else raise :class:`MockMissError`.
    """

    name = "mock"

    def __init__(
        self,
        by_fingerprint: Mapping[str, str] | None = None,
        by_founder: Mapping[tuple[str, str], str] | None = None,
        fallback: Callable[[LlmRequest], str] | None = None,
    ):
        self.by_fingerprint = dict(by_fingerprint or {})
        self.by_founder = dict(by_founder or {})
        self.fallback = fallback
        self.calls = 0
        self._lock = threading.Lock()

    @classmethod
    def from_prompts(cls, prompts: Mapping[str, str], **kw) -> "MockBackend":
        return cls({prompt_fingerprint(p): text for p, text in prompts.items()}, **kw)

    @classmethod
    def from_files(cls, paths: Iterable[str | Path], **kw) -> "MockBackend":
        """Load JSONL fixtures; each line is ``{"fingerprint", "completion"}``
        or ``{"founder_id", "stage", "completion"}``."""
        by_fp: dict[str, str] = {}
        by_founder: dict[tuple[str, str], str] = {}
        for path in paths:
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    entry = json.loads(line)
                    if "fingerprint" in entry:
                        by_fp[entry["fingerprint"]] = entry["completion"]
                    else:
                        by_founder[(entry["founder_id"], entry["stage"])] = entry["completion"]
        return cls(by_fp, by_founder, **kw)

    def complete(self, req: LlmRequest) -> str:
        with self._lock:
            self.calls += 1
        text = self.by_fingerprint.get(prompt_fingerprint(req.prompt))
        if text is not None:
            return text
        m = _FOUNDER_HEADER.search(req.prompt)
        if m and req.stage is not None:
            text = self.by_founder.get((m.group(1), req.stage))
            if text is not None:
                return text
        if self.fallback is not None:
            return self.fallback(req)
        raise MockMissError(f"no canned completion for prompt {prompt_fingerprint(req.prompt)[:12]}")


class HttpBackend:
    name = "live"

    def __init__(
        self,
        endpoint: str | None = None,
        api_key: str | None = None,
        timeout: float = 120.0,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV) or DEFAULT_ENDPOINT
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        if not self.api_key:
            raise ConfigError(f"live LLM backend needs a credential in ${API_KEY_ENV}")
        self.client = client or httpx.Client(timeout=timeout)

    def complete(self, req: LlmRequest) -> str:
        body = {
            "model": req.model_id,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
        }
        try:
            resp = self.client.post(
                self.endpoint, json=body, headers={"Authorization": f"Bearer {self.api_key}"}
            )
        except httpx.TimeoutException as exc:
            raise TransientError(f"timeout: {exc}") from exc
        except httpx.TransportError as exc:
            raise LlmError(f"transport error: {exc}") from exc
        if resp.status_code in (401, 403):
            raise AuthError(f"provider rejected credential (HTTP {resp.status_code})")
        if resp.status_code == 429:
            raise RateLimitError("rate limited (HTTP 429)")
        if resp.status_code in RETRYABLE_STATUS or resp.status_code >= 500:
            raise TransientError(f"HTTP {resp.status_code}")
        if resp.status_code >= 400:
            raise ProviderResponseError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            text = resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise ProviderResponseError(f"malformed provider response: {exc!r}") from exc
        if not isinstance(text, str):
            raise ProviderResponseError("completion content is not a string")
        return text


class CacheStore:
    """Append-only JSONL completion cache, one entry per line.

    Entries are loaded into memory on open; writes are serialized by a lock.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._entries: dict[str, str] = {}
        self._lock = threading.Lock()
        if self.path.exists():
            with self.path.open(encoding="utf-8") as fh:
                for n, line in enumerate(fh, 1):
                    if not line.strip():
                        continue
                    try:
                        entry = json.loads(line)
                        self._entries[entry["key"]] = entry["response_text"]
                    except (ValueError, KeyError, TypeError):
                        logger.warning("ignoring corrupt cache line %d in %s", n, self.path)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def get(self, key: str) -> str | None:
        return self._entries.get(key)

    def put(self, req: LlmRequest, text: str) -> None:
        entry = {
            "key": req.cache_key,
            "model_id": req.model_id,
            "temperature": req.temperature,
            "response_text": text,
            "created_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        with self._lock:
            if req.cache_key in self._entries:
                return
            self._entries[req.cache_key] = text
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with self.path.open("a", encoding="utf-8") as fh:
                    fh.write(json.dumps(entry, ensure_ascii=False) + "\n")
            except OSError as exc:
                logger.warning("cache write failed (%s); continuing uncached", exc)


class Gateway:
    def __init__(
        self,
        backend: Backend,
        cache: CacheStore | None = None,
        max_attempts: int = 5,
        backoff_base: float = 1.0,
        max_in_flight: int = 4,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if max_attempts < 1 or max_in_flight < 1:
            raise ValueError("max_attempts and max_in_flight must be >= 1")
        self.backend = backend
        self.cache = cache
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.sleep = sleep
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._count_lock = threading.Lock()
        self.backend_calls = 0

    def complete(self, req: LlmRequest) -> LlmResponse:
        if self.cache is not None:
            return self.cached_complete(req, self.cache)
        return self._call_backend(req)

    def cached_complete(self, req: LlmRequest, store: CacheStore) -> LlmResponse:
        try:
            hit = store.get(req.cache_key)
        except Exception as exc:  # noqa: BLE001 - a broken store must not stop the run
            logger.warning("cache read failed (%s); calling backend", exc)
            hit = None
        if hit is not None:
            return LlmResponse(hit, "cache", 0.0)
        resp = self._call_backend(req)
        store.put(req, resp.text)
        return resp

    def _call_backend(self, req: LlmRequest) -> LlmResponse:
        attempt = 0
        while True:
            attempt += 1
            start = time.perf_counter()
            try:
                with self._slots:
                    with self._count_lock:
                        self.backend_calls += 1
                    text = self.backend.complete(req)
            except LlmError as exc:
                if not exc.retryable or attempt >= self.max_attempts:
                    raise
                delay = self.backoff_base * 2 ** (attempt - 1)
                logger.warning(
                    "LLM call failed (attempt %d/%d): %s; retrying in %.1fs",
                    attempt, self.max_attempts, exc, delay,
                )
                self.sleep(delay)
                continue
            latency = (time.perf_counter() - start) * 1000.0
            return LlmResponse(text, self.backend.name, latency)
