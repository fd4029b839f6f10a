"""Backends: cassette replay, record-through caching, scripted and live HTTP."""

from __future__ import annotations

import os
import time
from typing import Callable, Optional

from .cassette import Cassette
from .client import ChatRequest, ChatResponse, TransportError, UnrecordedExchangeError, response_for

API_KEY_ENV = "SYNFLOW_API_KEY"
API_BASE_ENV = "SYNFLOW_API_BASE"
DEFAULT_API_BASE = "https://api.openai.com/v1"


class CassetteBackend:
    """Replays recorded text byte-for-byte; a miss is an error, never a live call."""

    tag = "cassette"

    def __init__(self, cassette: Cassette):
        self.cassette = cassette

    def complete(self, request: ChatRequest) -> ChatResponse:
        fp = request.fingerprint
        text = self.cassette.get(fp)
        if text is None:
            raise UnrecordedExchangeError(fp, request.template_id)
        return response_for(request, text, self.tag)


class RecordingBackend:
    """Serves hits from the cassette and records every miss answered by ``inner``."""

    def __init__(self, inner, cassette: Cassette, autosave: bool = False):
        self.inner = inner
        self.cassette = cassette
        self.autosave = autosave
        self.tag = f"record:{inner.tag}"

    def complete(self, request: ChatRequest) -> ChatResponse:
        fp = request.fingerprint
        text = self.cassette.get(fp)
        if text is not None:
            return response_for(request, text, "cache")
        resp = self.inner.complete(request)
        self.cassette.record(request, resp.text)
        if self.autosave and self.cassette.path:
            self.cassette.save()
        return resp


class ScriptedBackend:
    """Answers through a Python callable; used to author cassettes and in tests."""

    tag = "scripted"

    def __init__(self, responder: Callable[[ChatRequest], str]):
        self.responder = responder

    def complete(self, request: ChatRequest) -> ChatResponse:
        return response_for(request, self.responder(request), self.tag)


class LiveBackend:
    """OpenAI-compatible chat-completions endpoint."""

    tag = "live"

    def __init__(
        self,
        api_key: Optional[str] = None,
        base_url: Optional[str] = None,
        retries: int = 3,
        timeout: float = 120.0,
        sleep: Callable[[float], None] = time.sleep,
        transport=None,
    ):
        self.api_key = api_key or os.environ.get(API_KEY_ENV)
        if not self.api_key:
            raise TransportError(f"set {API_KEY_ENV} to use the live backend", 0)
        self.base_url = (base_url or os.environ.get(API_BASE_ENV) or DEFAULT_API_BASE).rstrip("/")
        self.retries = retries
        self.timeout = timeout
        self.sleep = sleep
        self.transport = transport

    def complete(self, request: ChatRequest) -> ChatResponse:
        import httpx

        payload = {
            "model": request.model,
            "temperature": request.temperature,
            "messages": [{"role": "user", "content": request.prompt}],
        }
        headers = {"Authorization": f"Bearer {self.api_key}"}
        last = "no attempt made"
        attempts = 0
        with httpx.Client(timeout=self.timeout, transport=self.transport) as http:
            for attempt in range(self.retries + 1):
                attempts = attempt + 1
                start = time.monotonic()
                try:
                    r = http.post(f"{self.base_url}/chat/completions", json=payload, headers=headers)
                    if r.status_code >= 500 or r.status_code == 429:
                        last = f"HTTP {r.status_code}"
                    elif r.status_code >= 400:
                        raise TransportError(f"HTTP {r.status_code}: {r.text[:200]}", attempts)
                    else:
                        data = r.json()
                        usage = data.get("usage") or {}
                        text = data["choices"][0]["message"]["content"] or ""
                        return response_for(
                            request, text, self.tag, time.monotonic() - start,
                            int(usage.get("prompt_tokens", 0)), int(usage.get("completion_tokens", 0)),
                        )
                except httpx.HTTPError as exc:
                    last = f"{type(exc).__name__}: {exc}"
                if attempt < self.retries:
                    self.sleep(2.0 ** attempt)
        raise TransportError(last, attempts)
