"""A completion backend that answers every prompt with computed ground truth.

It reads the same bindings a model would see and replies in the same
answer grammar, so the whole pipeline runs offline and deterministically:

* fact questions are answered from the def-use closure of the function,
* extractor requests receive the reference extractor of the spec,
* validator requests receive the reference SMT encoding of the path,
* direct feasibility questions are decided by exhaustive search.
"""

from __future__ import annotations

import logging
import re
from functools import lru_cache

from ..detectors import reference_extractor
from ..feasibility.encoder import EncodingError, encode_path
from ..llm.answers import fence
from ..llm.client import BackendError, ChatRequest, ChatResponse, response_for
from ..paths import PathInfo
from ..syntax.parsing import parse_unit
from .feasible import SearchBudgetExceeded, UnsupportedPath, oracle_feasible
from .mini import FactClosure, MiniFunction, UnsupportedConstruct, oracle_closure

log = logging.getLogger(__name__)

_NUMBERED = re.compile(r"^(\d+): ?(.*)$")


def unnumber(code: str) -> str:
    """Undo line numbering, padding with blank lines so numbers stay true."""
    out: list[str] = []
    for raw in code.split("\n"):
        m = _NUMBERED.match(raw)
        if not m:
            raise BackendError(f"oracle backend: line {raw!r} carries no line number")
        line = int(m.group(1))
        while len(out) < line - 1:
            out.append("")
        out.append(m.group(2))
    return "\n".join(out)


@lru_cache(maxsize=512)
def closure_of(code: str) -> FactClosure:
    text = unnumber(code)
    first = next(int(m.group(1)) for m in map(_NUMBERED.match, code.split("\n")) if m)
    tree = parse_unit("oracle.java", text)
    fns = [f for f in tree.functions if f.start_line == first] or list(tree.functions)
    if not fns:
        raise BackendError("oracle backend: no function in the numbered code")
    try:
        mini = MiniFunction.of(fns[0])
    except UnsupportedConstruct as exc:
        log.debug("oracle closure outside the subset (%s); using the relaxed closure", exc)
        mini = MiniFunction.relaxed(fns[0])
    return oracle_closure(mini)


def answer_fact(b: dict[str, str]) -> str:
    start = (b["src_name"], int(b["src_line"]))
    end = (b["dst_name"], int(b["dst_line"]))
    if closure_of(b["code"]).holds(start, end):
        return (f"The value of {start[0]} at line {start[1]} reaches {end[0]} at line {end[1]} "
                "along a chain of uses and assignments.\nAnswer: Yes")
    return (f"No chain of uses and assignments carries {start[0]} at line {start[1]} "
            f"to {end[0]} at line {end[1]}.\nAnswer: No")


def answer_extractor(b: dict[str, str]) -> str:
    try:
        body = reference_extractor(b["kind"], b["role"], b.get("signature"))
    except ValueError as exc:
        raise BackendError(f"oracle backend: {exc}") from exc
    return f"The extractor walks the tree and reports every {b['role']}.\n{fence(body, 'python')}"


def _path_of(b: dict[str, str]) -> PathInfo:
    if "path_json" not in b:
        raise BackendError("oracle backend: the request carries no structured path")
    return PathInfo.from_json(b["path_json"])


def answer_validator(b: dict[str, str]) -> str:
    try:
        program = encode_path(_path_of(b))
    except EncodingError as exc:
        return f"I cannot encode this path: {exc}"
    return f"One constant per variable version, one assertion per step.\n{fence(program, 'smt2')}"


def answer_fallback(b: dict[str, str]) -> str:
    try:
        feasible = oracle_feasible(_path_of(b))
    except (UnsupportedPath, SearchBudgetExceeded) as exc:
        return f"The path cannot be decided exactly ({exc}); assuming it can execute.\nAnswer: Yes"
    if feasible:
        return "Some input values satisfy every condition on the path.\nAnswer: Yes"
    return "No input values satisfy all conditions on the path together.\nAnswer: No"


def answer_reminder(b: dict[str, str]) -> str:
    raise BackendError("oracle backend never produces unparseable answers")


_HANDLERS = {
    "summarize": answer_fact,
    "extractor_synthesis": answer_extractor,
    "extractor_repair": answer_extractor,
    "validator_synthesis": answer_validator,
    "validator_repair": answer_validator,
    "feasibility_fallback": answer_fallback,
    "answer_reminder": answer_reminder,
}


class OracleBackend:
    tag = "oracle"

    def complete(self, request: ChatRequest) -> ChatResponse:
        handler = _HANDLERS.get(request.template_id)
        if handler is None:
            raise BackendError(f"oracle backend cannot answer {request.template_id!r}")
        return response_for(request, handler(request.binding_map), self.tag)
