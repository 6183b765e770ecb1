"""Model backends: the wire contract, an HTTP client, and a scripted mock.

All model calls go through a single chat-completion shape. The HTTP client
speaks the OpenAI-compatible protocol (POST {base_url}/chat/completions,
bearer token from a named environment variable, images as data-URL parts).
The mock backend answers from a script file and counts calls, which makes
the whole pipeline runnable and testable without any network access.
"""

from __future__ import annotations

import base64
import hashlib
import json
import logging
import mimetypes
import os
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Protocol

import httpx

from .errors import AuthError, BackendError, NoScriptedReply, TransportError
from .prompts import PromptBundle

logger = logging.getLogger(__name__)

_RETRYABLE_STATUS = {408, 429, 500, 502, 503, 504}

_digest_lock = threading.Lock()
_digest_cache: dict[str, str] = {}


def media_digest(path: str) -> str:
    """sha256 of a media file's bytes, cached per absolute path."""
    key = str(Path(path).resolve())
    with _digest_lock:
        cached = _digest_cache.get(key)
    if cached is not None:
        return cached
    digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
    with _digest_lock:
        _digest_cache[key] = digest
    return digest


@dataclass(frozen=True)
class BackendEndpoint:
    """Connection settings for one chat-completion server."""

    base_url: str
    model_name: str
    api_key_env: str | None = None
    timeout: float = 120.0
    max_retries: int = 2
    max_parallel: int = 4
    retry_backoff: float = 0.5

    def __post_init__(self) -> None:
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.max_parallel < 1:
            raise ValueError("max_parallel must be >= 1")


@dataclass(frozen=True)
class CompletionRequest:
    """One rendered prompt plus decoding parameters.

    Temperature defaults to 0 so repeated calls are reproducible and
    cacheable; anything else must be an explicit override.
    """

    bundle: PromptBundle
    temperature: float = 0.0

    def canonical_dict(self, model_name: str) -> dict:
        """Stable request identity: rendered text plus media content digests."""
        return {
            "model": model_name,
            "temperature": self.temperature,
            "messages": [
                {
                    "role": msg.role,
                    "text": msg.text,
                    "media": [media_digest(ref) for ref in msg.media],
                }
                for msg in self.bundle.messages
            ],
        }

    def canonical_bytes(self, model_name: str) -> bytes:
        return json.dumps(
            self.canonical_dict(model_name),
            sort_keys=True,
            ensure_ascii=True,
            separators=(",", ":"),
        ).encode("utf-8")

    def fingerprint(self, model_name: str) -> str:
        return hashlib.sha256(self.canonical_bytes(model_name)).hexdigest()


@dataclass(frozen=True)
class CompletionReply:
    text: str
    prompt_tokens: int = 0
    completion_tokens: int = 0
    latency: float = 0.0


class Backend(Protocol):
    model_name: str

    def complete(self, request: CompletionRequest) -> CompletionReply: ...


def _data_url(path: str) -> str:
    mime = mimetypes.guess_type(path)[0] or "image/png"
    payload = base64.b64encode(Path(path).read_bytes()).decode("ascii")
    return f"data:{mime};base64,{payload}"


def build_chat_payload(request: CompletionRequest, model_name: str) -> dict:
    """OpenAI-compatible messages payload; image parts precede the text part."""
    messages = []
    for msg in request.bundle.messages:
        if msg.media:
            content: list[dict] = [
                {"type": "image_url", "image_url": {"url": _data_url(ref)}} for ref in msg.media
            ]
            if msg.text:
                content.append({"type": "text", "text": msg.text})
            messages.append({"role": msg.role, "content": content})
        else:
            messages.append({"role": msg.role, "content": msg.text})
    return {
        "model": model_name,
        "messages": messages,
        "temperature": request.temperature,
    }


class HttpChatBackend:
    """Chat-completion client with bounded parallelism and retry/backoff.

    Transient transport failures and retryable statuses back off
    exponentially up to max_retries; credential rejections and other client
    errors surface immediately.
    """

    def __init__(self, endpoint: BackendEndpoint, transport: httpx.BaseTransport | None = None):
        self.endpoint = endpoint
        self.model_name = endpoint.model_name
        self._slots = threading.Semaphore(endpoint.max_parallel)
        self._client = httpx.Client(timeout=endpoint.timeout, transport=transport)

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.endpoint.api_key_env:
            key = os.environ.get(self.endpoint.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def complete(self, request: CompletionRequest) -> CompletionReply:
        url = self.endpoint.base_url.rstrip("/") + "/chat/completions"
        payload = build_chat_payload(request, self.endpoint.model_name)
        attempts = self.endpoint.max_retries + 1
        last_error: Exception | None = None
        with self._slots:
            for attempt in range(attempts):
                if attempt:
                    time.sleep(self.endpoint.retry_backoff * (2 ** (attempt - 1)))
                started = time.monotonic()
                try:
                    response = self._client.post(url, json=payload, headers=self._headers())
                except httpx.HTTPError as exc:
                    last_error = exc
                    logger.warning("transport failure (attempt %d/%d): %s", attempt + 1, attempts, exc)
                    continue
                if response.status_code in (401, 403):
                    raise AuthError(f"endpoint rejected credentials ({response.status_code})")
                if response.status_code in _RETRYABLE_STATUS:
                    last_error = BackendError(f"retryable status {response.status_code}")
                    logger.warning("retryable status %d (attempt %d/%d)", response.status_code, attempt + 1, attempts)
                    continue
                if response.status_code != 200:
                    raise BackendError(f"backend returned status {response.status_code}: {response.text[:200]}")
                return self._parse_reply(response, time.monotonic() - started)
        raise TransportError(f"request failed after {attempts} attempts: {last_error}")

    @staticmethod
    def _parse_reply(response: httpx.Response, latency: float) -> CompletionReply:
        try:
            data = response.json()
            content = data["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"malformed completion response: {exc}") from exc
        usage = data.get("usage") or {}
        return CompletionReply(
            text=content if isinstance(content, str) else json.dumps(content),
            prompt_tokens=int(usage.get("prompt_tokens", 0)),
            completion_tokens=int(usage.get("completion_tokens", 0)),
            latency=latency,
        )

    def close(self) -> None:
        self._client.close()


def request_completion(endpoint: BackendEndpoint, request: CompletionRequest) -> CompletionReply:
    """One-shot convenience wrapper around HttpChatBackend."""
    backend = HttpChatBackend(endpoint)
    try:
        return backend.complete(request)
    finally:
        backend.close()


@dataclass
class MockRule:
    """One script entry; `replies` is consumed in order, `reply` never runs out."""

    kind: str | None = None
    contains: tuple[str, ...] = ()
    not_contains: tuple[str, ...] = ()
    media_contains: tuple[str, ...] = ()
    reply: str | None = None
    replies: deque[str] = field(default_factory=deque)

    def matches(self, request: CompletionRequest) -> bool:
        if self.kind is not None and request.bundle.kind != self.kind:
            return False
        text = "\n".join(msg.text for msg in request.bundle.messages)
        if any(needle not in text for needle in self.contains):
            return False
        if any(needle in text for needle in self.not_contains):
            return False
        if self.media_contains:
            refs = [ref for msg in request.bundle.messages for ref in msg.media]
            for needle in self.media_contains:
                if not any(needle in ref for ref in refs):
                    return False
        return True

    def next_reply(self) -> str | None:
        if self.replies:
            return self.replies.popleft()
        return self.reply


def _as_tuple(value) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return (value,)
    return tuple(value)


@dataclass
class MockScript:
    """Canned replies looked up by fingerprint, rule match, or per-kind sequence."""

    fingerprints: dict[str, str] = field(default_factory=dict)
    rules: list[MockRule] = field(default_factory=list)
    sequences: dict[str, deque[str]] = field(default_factory=dict)
    default: str | None = None

    @classmethod
    def from_dict(cls, data: dict) -> "MockScript":
        rules = []
        for raw in data.get("rules", []):
            rules.append(
                MockRule(
                    kind=raw.get("kind"),
                    contains=_as_tuple(raw.get("contains")),
                    not_contains=_as_tuple(raw.get("not_contains")),
                    media_contains=_as_tuple(raw.get("media_contains")),
                    reply=raw.get("reply"),
                    replies=deque(raw.get("replies", [])),
                )
            )
        return cls(
            fingerprints=dict(data.get("fingerprints", {})),
            rules=rules,
            sequences={k: deque(v) for k, v in data.get("sequences", {}).items()},
            default=data.get("default"),
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "MockScript":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class MockBackend:
    """Deterministic scripted backend; never touches the network.

    Lookup order: exact fingerprint, first matching rule, per-kind sequence,
    then the script default. A request nothing matches raises
    NoScriptedReply so silent test drift is impossible.
    """

    def __init__(self, script: MockScript, model_name: str = "mock", latency: float = 0.0):
        self.script = script
        self.model_name = model_name
        self.latency = latency
        self.calls_total = 0
        self.calls_by_kind: dict[str, int] = {}
        self._lock = threading.Lock()
        self._slots = threading.Semaphore(4)
        self.on_complete: Callable[[CompletionRequest], None] | None = None

    def set_max_parallel(self, max_parallel: int) -> None:
        self._slots = threading.Semaphore(max_parallel)

    def reset_counters(self) -> None:
        with self._lock:
            self.calls_total = 0
            self.calls_by_kind = {}

    def _lookup(self, request: CompletionRequest) -> str:
        fingerprint = request.fingerprint(self.model_name)
        if fingerprint in self.script.fingerprints:
            return self.script.fingerprints[fingerprint]
        for rule in self.script.rules:
            if rule.matches(request):
                reply = rule.next_reply()
                if reply is not None:
                    return reply
        seq = self.script.sequences.get(request.bundle.kind)
        if seq:
            return seq.popleft()
        if self.script.default is not None:
            return self.script.default
        raise NoScriptedReply(
            f"no scripted reply for kind={request.bundle.kind!r} "
            f"text={request.bundle.messages[-1].text[:80]!r}"
        )

    def complete(self, request: CompletionRequest) -> CompletionReply:
        with self._slots:
            if self.on_complete is not None:
                self.on_complete(request)
            if self.latency:
                time.sleep(self.latency)
            with self._lock:
                self.calls_total += 1
                kind = request.bundle.kind
                self.calls_by_kind[kind] = self.calls_by_kind.get(kind, 0) + 1
                reply = self._lookup(request)
        return CompletionReply(text=reply)
