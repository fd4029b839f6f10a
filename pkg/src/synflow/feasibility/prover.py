"""Running validator programs in a child prover process."""

from __future__ import annotations

import re
import subprocess
import sys
from dataclasses import dataclass
from typing import Optional, Protocol

from .. import proc

SAT, UNSAT, UNKNOWN, ERROR = "sat", "unsat", "unknown", "error"

# commands the host owns; a program that issues them itself is cleaned first
_HOST_COMMANDS = ("check-sat", "check-sat-assuming", "get-model", "get-value", "get-info", "exit", "echo", "reset")


@dataclass(frozen=True)
class ProverOutcome:
    status: str
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status != ERROR


class Prover(Protocol):
    def check(self, program: str) -> ProverOutcome: ...


def _top_level_forms(text: str) -> list[tuple[int, int]]:
    """Spans of top-level parenthesized forms, skipping comments and strings."""
    spans = []
    depth = 0
    start = 0
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == ";":
            nl = text.find("\n", i)
            i = len(text) if nl < 0 else nl
            continue
        if ch == '"':
            i += 1
            while i < len(text):
                if text[i] == '"':
                    if i + 1 < len(text) and text[i + 1] == '"':
                        i += 2
                        continue
                    break
                i += 1
        elif ch == "|":
            end = text.find("|", i + 1)
            i = len(text) if end < 0 else end
        elif ch == "(":
            if depth == 0:
                start = i
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                spans.append((start, i + 1))
        i += 1
    return spans


_HEAD = re.compile(r"\(\s*([^\s()]+)")


def strip_host_commands(program: str) -> str:
    out = []
    last = 0
    for start, end in _top_level_forms(program):
        m = _HEAD.match(program, start)
        if m and m.group(1) in _HOST_COMMANDS:
            out.append(program[last:start])
            last = end
    out.append(program[last:])
    return "".join(out)


class ShimProver:
    """z3 through its Python bindings, in a separate interpreter."""

    def __init__(self, timeout: float = 10.0, python: Optional[str] = None):
        self.timeout = timeout
        self.python = python or sys.executable

    def check(self, program: str) -> ProverOutcome:
        argv = [self.python, "-m", "synflow.prover_shim", str(int(self.timeout * 1000))]
        try:
            done = proc.run_child("prover", argv, strip_host_commands(program), self.timeout + 5)
        except subprocess.TimeoutExpired:
            return ProverOutcome(UNKNOWN, "prover timed out")
        out = done.stdout.strip()
        first, _, rest = out.partition("\n")
        if done.returncode != 0 or first.startswith("error"):
            msg = first[len("error:"):].strip() if first.startswith("error") else (done.stderr.strip() or out)
            return ProverOutcome(ERROR, msg.splitlines()[-1] if msg else "prover failed")
        if first not in (SAT, UNSAT, UNKNOWN):
            return ProverOutcome(ERROR, f"unexpected prover output: {first!r}")
        return ProverOutcome(first, rest.strip())


class ExecutableProver:
    """A stand-alone SMT solver binary that reads SMT-LIB on standard input."""

    def __init__(self, executable: str = "z3", timeout: float = 10.0, args: tuple[str, ...] = ("-in",)):
        self.executable = executable
        self.timeout = timeout
        self.args = args

    def check(self, program: str) -> ProverOutcome:
        text = strip_host_commands(program).rstrip() + "\n(check-sat)\n(get-model)\n"
        argv = [self.executable, *self.args]
        if self.executable.endswith("z3"):
            argv.append(f"-T:{max(1, int(self.timeout))}")
        try:
            done = proc.run_child("prover", argv, text, self.timeout + 5)
        except subprocess.TimeoutExpired:
            return ProverOutcome(UNKNOWN, "prover timed out")
        except OSError as exc:
            return ProverOutcome(ERROR, f"cannot run {self.executable}: {exc}")
        lines = done.stdout.strip().splitlines()
        errors = [ln for ln in lines if ln.startswith("(error")]
        # z3 reports a failed get-model as an error after unsat; only earlier errors count
        verdicts = [i for i, ln in enumerate(lines) if ln.strip() in (SAT, UNSAT, UNKNOWN)]
        if verdicts:
            early = [ln for ln in lines[: verdicts[0]] if ln.startswith("(error")]
            if early:
                return ProverOutcome(ERROR, early[0])
            status = lines[verdicts[0]].strip()
            return ProverOutcome(status, "\n".join(lines[verdicts[0] + 1:]) if status == SAT else "")
        if "timeout" in done.stdout:
            return ProverOutcome(UNKNOWN, "prover timed out")
        return ProverOutcome(ERROR, errors[0] if errors else (done.stderr.strip() or "no verdict"))
