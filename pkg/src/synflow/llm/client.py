"""Requests, responses and the client every phase talks through."""

from __future__ import annotations

import hashlib
import json
import logging
import threading
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Protocol

from .templates import PromptTemplate, load_template, render

log = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-3.5-turbo-0125"


class BackendError(RuntimeError):
    """Any failure to obtain a response from a backend."""


class UnrecordedExchangeError(BackendError):
    def __init__(self, fingerprint: str, template_id: str):
        super().__init__(f"no recorded response for {template_id} exchange {fingerprint}")
        self.fingerprint = fingerprint
        self.template_id = template_id


class TransportError(BackendError):
    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts


def fingerprint(template_id: str, bindings: Mapping[str, str], model: str, temperature: float) -> str:
    payload = {
        "template": template_id,
        "bindings": {k: str(v) for k, v in bindings.items()},
        "model": model,
        "temperature": float(temperature),
    }
    canon = json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ChatRequest:
    template_id: str
    bindings: tuple[tuple[str, str], ...]
    prompt: str
    model: str = DEFAULT_MODEL
    temperature: float = 0.0

    @property
    def binding_map(self) -> dict[str, str]:
        return dict(self.bindings)

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.template_id, self.binding_map, self.model, self.temperature)


@dataclass(frozen=True)
class ChatResponse:
    text: str
    backend: str
    latency: float = 0.0
    prompt_tokens: int = 0
    completion_tokens: int = 0
    fingerprint: str = ""


class Backend(Protocol):
    tag: str

    def complete(self, request: ChatRequest) -> ChatResponse: ...


@dataclass
class UsageStats:
    prompts: Counter = field(default_factory=Counter)
    prompt_tokens: int = 0
    completion_tokens: int = 0

    @property
    def total_prompts(self) -> int:
        return sum(self.prompts.values())

    def to_json(self) -> dict:
        return {
            "prompts": dict(sorted(self.prompts.items())),
            "total_prompts": self.total_prompts,
            "prompt_tokens": self.prompt_tokens,
            "completion_tokens": self.completion_tokens,
        }


class LlmClient:
    """Renders a template, sends it to the backend and tallies usage."""

    def __init__(self, backend: Backend, model: str = DEFAULT_MODEL, temperature: float = 0.0):
        if not 0.0 <= temperature <= 2.0:
            raise ValueError("temperature must lie in [0, 2]")
        self.backend = backend
        self.model = model
        self.temperature = temperature
        self.usage = UsageStats()
        self._lock = threading.Lock()

    def request(self, template: str | PromptTemplate, bindings: Mapping[str, str]) -> ChatRequest:
        tpl = load_template(template) if isinstance(template, str) else template
        prompt = render(tpl, bindings)
        items = tuple(sorted((k, str(v)) for k, v in bindings.items()))
        return ChatRequest(tpl.id, items, prompt, self.model, self.temperature)

    def ask(self, template: str | PromptTemplate, bindings: Mapping[str, str]) -> ChatResponse:
        req = self.request(template, bindings)
        start = time.monotonic()
        resp = self.backend.complete(req)
        if not resp.text:
            raise BackendError(f"empty response for {req.template_id} exchange {req.fingerprint}")
        with self._lock:
            self.usage.prompts[req.template_id] += 1
            self.usage.prompt_tokens += resp.prompt_tokens
            self.usage.completion_tokens += resp.completion_tokens
        log.debug("%s %s via %s in %.3fs", req.template_id, req.fingerprint[:12], resp.backend, time.monotonic() - start)
        return resp


def response_for(request: ChatRequest, text: str, backend: str, latency: float = 0.0,
                 prompt_tokens: int = 0, completion_tokens: int = 0) -> ChatResponse:
    return ChatResponse(text, backend, latency, prompt_tokens, completion_tokens, request.fingerprint)
