"""Chat-completion client with retries, plus deterministic record/replay.

The HTTP client speaks the OpenAI-style chat completions shape that all three
supported providers accept. Credentials are read from an environment variable
named in the provider config, never from config values. Every exchange can be
appended to a JSON Lines session record; a ReplaySession feeds those records
back in order so searches can be re-run offline and byte-identically.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import requests

log = logging.getLogger("benchevo.llm")

_ROLES = {"system", "user", "assistant"}
_BACKOFF_BASE_S = 0.5
_BACKOFF_CAP_S = 8.0


class LLMError(RuntimeError):
    pass


class AuthError(LLMError):
    pass


class RateLimited(LLMError):
    pass


class TransportError(LLMError):
    pass


class ProviderRefusal(LLMError):
    """The provider answered but produced no usable text."""


class SessionExhausted(LLMError):
    pass


class DigestMismatch(LLMError):
    pass


@dataclass(frozen=True)
class ChatRequest:
    model: str
    messages: tuple[tuple[str, str], ...]

    def __post_init__(self):
        if not self.messages:
            raise ValueError("request needs at least one message")
        for role, _ in self.messages:
            if role not in _ROLES:
                raise ValueError(f"unknown message role {role!r}")


@dataclass(frozen=True)
class ChatResponse:
    text: str
    usage: dict | None = None
    provider_meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ProviderConfig:
    name: str
    endpoint_url: str
    model: str
    api_key_env: str
    timeout_s: float = 60.0
    max_retries: int = 3


def request_digest(request: ChatRequest) -> str:
    """Stable content hash used to pair recorded responses with requests."""
    canonical = json.dumps(
        {"model": request.model, "messages": [list(m) for m in request.messages]},
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class SessionRecorder:
    """Appends one JSON line per exchange: {request_digest, response_text, usage}."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)

    def append(self, digest: str, text: str, usage: dict | None) -> None:
        row = {"request_digest": digest, "response_text": text, "usage": usage}
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


class HttpChatClient:
    """Blocking chat client; one POST per attempt, bounded exponential backoff.

    Total blocking time is capped by (max_retries + 1) * timeout_s plus the
    backoff sleeps; 429 and 5xx responses and transport faults are retried,
    everything else fails immediately.
    """

    def __init__(self, config: ProviderConfig, recorder: SessionRecorder | None = None,
                 sleep=time.sleep, env=None):
        import os

        self.config = config
        self.recorder = recorder
        self._sleep = sleep
        self._env = env if env is not None else os.environ

    def chat(self, request: ChatRequest) -> ChatResponse:
        key = self._env.get(self.config.api_key_env, "")
        if not key:
            raise AuthError(
                f"environment variable {self.config.api_key_env} is not set"
            )
        payload = {
            "model": request.model or self.config.model,
            "messages": [{"role": r, "content": c} for r, c in request.messages],
        }
        headers = {
            "Authorization": f"Bearer {key}",
            "Content-Type": "application/json",
        }
        retries = 0
        last_failure = None
        while retries <= self.config.max_retries:
            if retries:
                delay = min(_BACKOFF_BASE_S * 2 ** (retries - 1), _BACKOFF_CAP_S)
                log.info("retry %d after %s (sleep %.2fs)", retries, last_failure, delay)
                self._sleep(delay)
            try:
                resp = requests.post(
                    self.config.endpoint_url,
                    json=payload,
                    headers=headers,
                    timeout=self.config.timeout_s,
                )
            except requests.RequestException as exc:
                last_failure = f"transport: {exc}"
                retries += 1
                continue
            if resp.status_code == 429 or resp.status_code >= 500:
                last_failure = f"HTTP {resp.status_code}"
                retries += 1
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"provider rejected credentials: HTTP {resp.status_code}")
            if resp.status_code != 200:
                raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
            return self._finish(request, resp, retries)
        if last_failure and last_failure.startswith("HTTP 429"):
            raise RateLimited(f"gave up after {retries} attempts: {last_failure}")
        raise TransportError(f"gave up after {retries} attempts: {last_failure}")

    def _finish(self, request: ChatRequest, resp, retries: int) -> ChatResponse:
        try:
            data = resp.json()
        except ValueError as exc:
            raise TransportError(f"unparsable provider response: {exc}") from exc
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            text = None
        if not text:
            raise ProviderRefusal("provider returned no content")
        usage = data.get("usage")
        if retries:
            log.info("succeeded after %d retries", retries)
        if self.recorder is not None:
            self.recorder.append(request_digest(request), text, usage)
        return ChatResponse(
            text=text, usage=usage, provider_meta={"retries": retries}
        )


@dataclass
class ReplaySession:
    """Feeds recorded responses back in order.

    Rows recorded with a digest are verified against the incoming request in
    strict mode; rows scripted without one (digest None) are never checked.
    """

    records: list[dict]
    strict: bool = True
    cursor: int = 0

    @classmethod
    def load(cls, path: str | Path, strict: bool = True) -> "ReplaySession":
        rows = []
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    rows.append(json.loads(line))
        return cls(records=rows, strict=strict)

    @classmethod
    def from_texts(cls, texts) -> "ReplaySession":
        rows = [
            {"request_digest": None, "response_text": t, "usage": None} for t in texts
        ]
        return cls(records=rows, strict=False)

    @property
    def remaining(self) -> int:
        return len(self.records) - self.cursor

    def chat(self, request: ChatRequest) -> ChatResponse:
        return replay_chat(self, request)


def replay_chat(session: ReplaySession, request: ChatRequest) -> ChatResponse:
    if session.cursor >= len(session.records):
        raise SessionExhausted(
            f"session has only {len(session.records)} recorded responses"
        )
    row = session.records[session.cursor]
    recorded = row.get("request_digest")
    if session.strict and recorded is not None:
        actual = request_digest(request)
        if recorded != actual:
            raise DigestMismatch(
                f"record {session.cursor}: expected digest {recorded[:12]}…, "
                f"request hashes to {actual[:12]}…"
            )
    session.cursor += 1
    return ChatResponse(
        text=row["response_text"],
        usage=row.get("usage"),
        provider_meta={"replayed": True, "index": session.cursor - 1},
    )
