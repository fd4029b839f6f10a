"""Synthesis, validation and repair of extractor programs.

Round 0 asks for an ``extract`` function from the description, the labeled
examples and their trees.  Every later round is a fresh prompt carrying the
previous program and exactly how it failed.  A program is accepted only when
it reproduces every label with no extras.
"""

from __future__ import annotations

import json
import logging
import os
import threading
from dataclasses import dataclass, field
from typing import Optional, Protocol

from ..llm.answers import AnswerFormatError, extract_code
from ..llm.client import LlmClient
from ..syntax.parsing import SyntaxTree
from ..syntax.sexpr import serialize
from ..syntax.values import ValueRef, sort_refs
from .runner import ExtractorExecutionError, SandboxRunner, skeleton_text
from .spec import ExtractorSpec

log = logging.getLogger(__name__)

DEFAULT_MAX_FIXES = 10


class Runner(Protocol):
    def run(self, body: str, tree_text: str) -> list[tuple[int, str]]: ...


@dataclass(frozen=True)
class ExampleResult:
    name: str
    false_positives: tuple[tuple[int, str], ...]
    false_negatives: tuple[tuple[int, str], ...]


@dataclass(frozen=True)
class ValidationReport:
    results: tuple[ExampleResult, ...]
    diagnostic: str = ""

    @property
    def passed(self) -> bool:
        return not self.diagnostic and all(
            not r.false_positives and not r.false_negatives for r in self.results
        )


@dataclass(frozen=True)
class Attempt:
    body: str
    feedback: str


@dataclass(frozen=True)
class ExtractorProgram:
    body: str
    kind: str
    role: str
    fix_count: int = 0
    validated: bool = False
    history: tuple[Attempt, ...] = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "body": self.body,
            "kind": self.kind,
            "role": self.role,
            "fix_count": self.fix_count,
            "validated": self.validated,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExtractorProgram":
        return cls(data["body"], data["kind"], data["role"], int(data["fix_count"]), bool(data["validated"]))


class SynthesisFailedError(RuntimeError):
    def __init__(self, spec: ExtractorSpec, program: ExtractorProgram, report: ValidationReport):
        super().__init__(
            f"no valid {spec.kind} {spec.role} extractor after {program.fix_count} fixes"
        )
        self.spec = spec
        self.program = program
        self.report = report


def run_extractor(program: ExtractorProgram | str, tree: SyntaxTree, runner: Optional[Runner] = None,
                  role: Optional[str] = None) -> list[ValueRef]:
    """Run an extractor over one file; sorted, duplicate-free refs."""
    runner = runner or SandboxRunner()
    body = program if isinstance(program, str) else program.body
    role = role or (program.role if isinstance(program, ExtractorProgram) else "intermediate")
    lines = tree.unit.lines
    refs = []
    for line, ident in runner.run(body, serialize(tree)):
        if not 1 <= line <= len(lines):
            raise ExtractorExecutionError(f"reported line {line} lies outside {tree.unit.path}")
        refs.append(ValueRef(ident, line, tree.unit.path, role))
    return sort_refs(refs)


def validate(program: ExtractorProgram | str, spec: ExtractorSpec, runner: Optional[Runner] = None) -> ValidationReport:
    runner = runner or SandboxRunner()
    body = program if isinstance(program, str) else program.body
    trees = spec.trees()
    results = []
    for ex in spec.examples:
        expected = set(ex.expected)
        try:
            produced = set(runner.run(body, trees[ex.name]))
        except ExtractorExecutionError as exc:
            all_missing = tuple(
                ExampleResult(e.name, (), tuple(sorted(e.expected))) for e in spec.examples
            )
            return ValidationReport(all_missing, f"{ex.name}: {exc.diagnostic}")
        results.append(
            ExampleResult(ex.name, tuple(sorted(produced - expected)), tuple(sorted(expected - produced)))
        )
    return ValidationReport(tuple(results))


def describe_failure(report: ValidationReport, spec: ExtractorSpec) -> str:
    """Deterministic feedback text: the error, or every wrong and missing label with its line."""
    if report.diagnostic:
        return f"The program raised an error: {report.diagnostic}"
    texts = {e.name: e.text.split("\n") for e in spec.examples}
    out = []
    for r in report.results:
        lines = texts[r.name]
        for line, ident in r.false_positives:
            out.append(f"{r.name}:{line}: reported `{ident}` but it is not a {spec.role}: {lines[line - 1].strip()}")
        for line, ident in r.false_negatives:
            out.append(f"{r.name}:{line}: missed `{ident}`: {lines[line - 1].strip()}")
    return "\n".join(out) if out else "All labels matched."


def _examples_text(spec: ExtractorSpec) -> str:
    return "\n\n".join(f"// {e.name}\n{e.numbered()}" for e in spec.examples)


def _labels_text(spec: ExtractorSpec) -> str:
    labels = [f"{e.name}:{line}:{ident}" for e in spec.examples for line, ident in e.expected]
    return "\n".join(labels) if labels else "(none)"


def prompt_bindings(spec: ExtractorSpec) -> dict[str, str]:
    bindings = {
        "kind": spec.kind,
        "role": spec.role,
        "description": spec.description,
        "examples": _examples_text(spec),
        "labels": _labels_text(spec),
        "skeleton": skeleton_text(),
        "spec_id": spec.spec_id,
    }
    if spec.signature:
        bindings["signature"] = spec.signature
    return bindings


def _body_of(text: str) -> tuple[str, str]:
    """Program body from a response, or ("", reason) when no code block is present."""
    try:
        return extract_code(text, "python"), ""
    except AnswerFormatError as exc:
        return "", str(exc)


def synthesize_extractor(spec: ExtractorSpec, runner: Optional[Runner], client: LlmClient,
                         max_fixes: int = DEFAULT_MAX_FIXES) -> ExtractorProgram:
    if max_fixes < 0:
        raise ValueError("max_fixes must be non-negative")
    runner = runner or SandboxRunner()
    base = prompt_bindings(spec)
    trees = spec.trees()
    base_trees = "\n".join(f";; {name}\n{text}" for name, text in trees.items())
    history: list[Attempt] = []
    body, report = "", ValidationReport(())
    for round_ in range(max_fixes + 1):
        if round_ == 0:
            resp = client.ask("extractor_synthesis", {**base, "trees": base_trees})
        else:
            resp = client.ask(
                "extractor_repair",
                {**base, "program": body, "feedback": history[-1].feedback, "round": str(round_)},
            )
        body, missing = _body_of(resp.text)
        if missing:
            report = ValidationReport((), f"the reply contained no program ({missing})")
        else:
            report = validate(body, spec, runner)
        program = ExtractorProgram(body, spec.kind, spec.role, round_, report.passed, tuple(history))
        if report.passed:
            log.info("%s %s extractor accepted after %d fixes", spec.kind, spec.role, round_)
            return program
        history.append(Attempt(body, describe_failure(report, spec)))
    raise SynthesisFailedError(spec, ExtractorProgram(body, spec.kind, spec.role, max_fixes, False, tuple(history)), report)


class ExtractorStore:
    """On-disk cache of accepted extractors keyed by spec id, so synthesis happens once."""

    def __init__(self, directory: Optional[str] = None):
        self.directory = directory
        self._memory: dict[str, ExtractorProgram] = {}
        self._lock = threading.Lock()

    def _path(self, spec_id: str) -> Optional[str]:
        return os.path.join(self.directory, f"{spec_id}.json") if self.directory else None

    def get(self, spec: ExtractorSpec) -> Optional[ExtractorProgram]:
        with self._lock:
            if spec.spec_id in self._memory:
                return self._memory[spec.spec_id]
        path = self._path(spec.spec_id)
        if path and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                program = ExtractorProgram.from_json(json.load(fh))
            with self._lock:
                self._memory[spec.spec_id] = program
            return program
        return None

    def put(self, spec: ExtractorSpec, program: ExtractorProgram) -> None:
        with self._lock:
            self._memory[spec.spec_id] = program
        path = self._path(spec.spec_id)
        if path:
            os.makedirs(self.directory, exist_ok=True)
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(program.to_json(), fh, indent=1, sort_keys=True)


def obtain_extractor(spec: ExtractorSpec, runner: Optional[Runner], client: LlmClient,
                     store: Optional[ExtractorStore] = None, max_fixes: int = DEFAULT_MAX_FIXES) -> tuple[ExtractorProgram, bool]:
    """Cached program if present, else a fresh synthesis; the flag tells which."""
    if store is not None:
        cached = store.get(spec)
        if cached is not None and cached.validated:
            return cached, True
    program = synthesize_extractor(spec, runner, client, max_fixes)
    if store is not None:
        store.put(spec, program)
    return program, False
