"""Phase II: per-function dataflow facts decided one value pair at a time.

Candidate starts are sources, parameters and call outputs; candidate ends
are sinks, call arguments and return values.  Each pair becomes one few-shot
chain-of-thought prompt over the numbered function text, and only the
``Answer:`` line decides the verdict.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import threading
from dataclasses import dataclass
from typing import Iterable, Optional

from .llm.answers import AnswerFormatError, explanation_of, parse_yes_no
from .llm.client import LlmClient
from .syntax.cfg import Cfg, build_cfg
from .syntax.parsing import FunctionInfo, node_text
from .syntax.values import InterfaceValues, ValueRef, sort_refs

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FactQuery:
    start: ValueRef
    end: ValueRef
    function_id: str
    code: str


@dataclass(frozen=True)
class Verdict:
    holds: bool
    explanation: str
    raw: str
    parsed: bool = True
    fingerprint: str = ""


@dataclass(frozen=True)
class Fact:
    start: ValueRef
    end: ValueRef
    fingerprint: str = ""


@dataclass(frozen=True)
class FunctionSummary:
    function_id: str
    facts: tuple[Fact, ...] = ()
    errors: tuple[str, ...] = ()
    cached: bool = False

    def pairs(self) -> set[tuple[tuple, tuple]]:
        return {(f.start.key, f.end.key) for f in self.facts}

    def ends_from(self, start: ValueRef) -> list[ValueRef]:
        return [f.end for f in self.facts if f.start.key == start.key]


def numbered_code(fn: FunctionInfo) -> str:
    """The function text with its real line numbers, as shown to the model."""
    lines = node_text(fn.node).split("\n")
    return "\n".join(f"{fn.start_line + i}: {line}" for i, line in enumerate(lines))


def _within(fn: FunctionInfo, refs: Iterable[ValueRef]) -> list[ValueRef]:
    return [r for r in refs if r.unit == fn.unit and fn.start_line <= r.line <= fn.end_line]


def candidate_pairs(
    fn: FunctionInfo,
    values: InterfaceValues,
    sources: Iterable[ValueRef],
    sinks: Iterable[ValueRef],
    cfg: Optional[Cfg] = None,
) -> list[FactQuery]:
    """Cross product of starts and ends, minus upward pairs in loop-free functions."""
    cfg = cfg or build_cfg(fn)
    starts = sort_refs(_within(fn, sources) + list(values.v_par) + list(values.v_out))
    ends = sort_refs(_within(fn, sinks) + list(values.v_arg) + list(values.v_ret))
    prune = not cfg.has_loops
    code = numbered_code(fn)
    out = []
    for s in starts:
        for e in ends:
            if prune and e.line < s.line:
                continue
            out.append(FactQuery(s, e, fn.id, code))
    return out


def query_fact(q: FactQuery, client: LlmClient) -> Verdict:
    bindings = {
        "code": q.code,
        "src_name": q.start.identifier,
        "src_line": str(q.start.line),
        "dst_name": q.end.identifier,
        "dst_line": str(q.end.line),
    }
    resp = client.ask("summarize", bindings)
    try:
        return Verdict(parse_yes_no(resp.text), explanation_of(resp.text), resp.text, True, resp.fingerprint)
    except AnswerFormatError:
        pass
    prompt = client.request("summarize", bindings).prompt
    retry = client.ask("answer_reminder", {"prompt": prompt, "previous": resp.text})
    try:
        return Verdict(parse_yes_no(retry.text), explanation_of(retry.text), retry.text, True, retry.fingerprint)
    except AnswerFormatError:
        log.warning("no parseable answer for %s -> %s in %s; treating as no fact", q.start, q.end, q.function_id)
        return Verdict(False, "", retry.text, False, retry.fingerprint)


class SummaryStore:
    """Summaries keyed by (numbered function text, spec id); optional JSON persistence."""

    def __init__(self, path: Optional[str] = None):
        self.path = path
        self._data: dict[str, list[list]] = {}
        self._lock = threading.Lock()
        if path and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                self._data = json.load(fh)

    @staticmethod
    def key(fn: FunctionInfo, spec_id: str) -> str:
        digest = hashlib.sha256(numbered_code(fn).encode("utf-8")).hexdigest()
        return f"{digest}:{spec_id}"

    def get(self, fn: FunctionInfo, spec_id: str) -> Optional[FunctionSummary]:
        with self._lock:
            rows = self._data.get(self.key(fn, spec_id))
        if rows is None:
            return None
        facts = tuple(
            Fact(ValueRef(s, sl, fn.unit, sr), ValueRef(e, el, fn.unit, er))
            for s, sl, sr, e, el, er in rows
        )
        return FunctionSummary(fn.id, facts, (), True)

    def put(self, fn: FunctionInfo, spec_id: str, summary: FunctionSummary) -> None:
        rows = [
            [f.start.identifier, f.start.line, f.start.role, f.end.identifier, f.end.line, f.end.role]
            for f in summary.facts
        ]
        key = self.key(fn, spec_id)
        with self._lock:
            old = self._data.get(key)
            if old is not None and old != rows:
                log.warning("summary for %s changed under the same key", fn.id)
            self._data[key] = rows

    def save(self, path: Optional[str] = None) -> None:
        target = path or self.path
        if not target:
            return
        with self._lock:
            data = dict(sorted(self._data.items()))
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=1)


def summarize_function(
    fn: FunctionInfo,
    pairs: list[FactQuery],
    client: LlmClient,
    store: Optional[SummaryStore] = None,
    spec_id: str = "",
) -> FunctionSummary:
    if store is not None:
        cached = store.get(fn, spec_id)
        if cached is not None:
            return cached
    facts = []
    errors = []
    for q in pairs:
        verdict = query_fact(q, client)
        if not verdict.parsed:
            errors.append(f"{q.start} -> {q.end}: unparseable verdict")
        if verdict.holds:
            facts.append(Fact(q.start, q.end, verdict.fingerprint))
    summary = FunctionSummary(fn.id, tuple(facts), tuple(errors))
    if store is not None:
        store.put(fn, spec_id, summary)
    return summary
