"""Prompt rendering and pluggable completion backends."""

from .answers import AnswerFormatError, extract_code, parse_yes_no
from .backends import CassetteBackend, LiveBackend, RecordingBackend, ScriptedBackend
from .cassette import Cassette, CassetteConflictError
from .client import (
    BackendError,
    ChatRequest,
    ChatResponse,
    LlmClient,
    TransportError,
    UnrecordedExchangeError,
    fingerprint,
)
from .templates import PromptTemplate, RenderError, load_template, render

__all__ = [
    "AnswerFormatError",
    "BackendError",
    "Cassette",
    "CassetteBackend",
    "CassetteConflictError",
    "ChatRequest",
    "ChatResponse",
    "LiveBackend",
    "LlmClient",
    "PromptTemplate",
    "RecordingBackend",
    "RenderError",
    "ScriptedBackend",
    "TransportError",
    "UnrecordedExchangeError",
    "extract_code",
    "fingerprint",
    "load_template",
    "parse_yes_no",
    "render",
]
