"""Phase III: decide path feasibility through a synthesized SMT program.

The model writes an SMT-LIB encoding of the path condition, the prover runs
it, and prover errors are fed back for repair up to a fixed budget.  When no
runnable program emerges the model is asked for a direct verdict.  Every
doubt resolves towards keeping the report: ``unknown`` and unparseable
verdicts count as feasible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..llm.answers import AnswerFormatError, explanation_of, extract_code, parse_yes_no
from ..llm.client import LlmClient
from ..paths import PathInfo
from .prover import SAT, UNKNOWN, Prover, ProverOutcome

log = logging.getLogger(__name__)

SOLVER = "synthesized"
FALLBACK = "fallback"


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    method: str
    fix_count: int
    outcome: str
    program: str = ""
    diagnostics: tuple[str, ...] = field(default=())
    explanation: str = ""

    def to_json(self) -> dict:
        return {
            "feasible": self.feasible,
            "method": self.method,
            "fix_count": self.fix_count,
            "outcome": self.outcome,
            "diagnostics": list(self.diagnostics),
        }


def path_bindings(info: PathInfo) -> dict[str, str]:
    """Prompt bindings for a path; ``path_json`` is not rendered but keys the exchange."""
    return {"path_info": info.render(), "path_json": info.to_json_text()}


def _program_of(text: str) -> str:
    try:
        return extract_code(text, "smt2")
    except AnswerFormatError:
        return ""


def validate_path(info: PathInfo, client: LlmClient, prover: Prover, max_fixes: int = 3) -> FeasibilityVerdict:
    base = path_bindings(info)
    diagnostics: list[str] = []
    program = _program_of(client.ask("validator_synthesis", base).text)
    for round_no in range(max_fixes + 1):
        outcome = prover.check(program) if program.strip() else ProverOutcome("error", "no smt2 code block in reply")
        if outcome.ok:
            feasible = outcome.status in (SAT, UNKNOWN)
            if outcome.status == UNKNOWN:
                log.info("prover returned unknown for path %s; keeping it", info.path_id)
            return FeasibilityVerdict(feasible, SOLVER, round_no, outcome.status, program, tuple(diagnostics))
        diagnostics.append(outcome.detail)
        if round_no == max_fixes:
            break
        reply = client.ask("validator_repair", {
            **base, "program": program.rstrip(), "diagnostic": outcome.detail, "round": str(round_no + 1),
        })
        program = _program_of(reply.text)
    log.info("no runnable validator for path %s after %d repairs; asking directly", info.path_id, max_fixes)
    reply = client.ask("feasibility_fallback", base)
    try:
        feasible = parse_yes_no(reply.text)
        outcome = "yes" if feasible else "no"
    except AnswerFormatError:
        feasible, outcome = True, "unparsed"
    return FeasibilityVerdict(
        feasible, FALLBACK, max_fixes, outcome, program, tuple(diagnostics), explanation_of(reply.text)
    )
