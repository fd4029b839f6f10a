"""Shared helpers for the test suite."""

from __future__ import annotations

import os
import random
from typing import Optional

from synflow.detectors import builtin_spec
from synflow.extractors import SandboxRunner, obtain_extractor, run_extractor
from synflow.harness import load_corpus
from synflow.llm import LlmClient
from synflow.oracle import OracleBackend
from synflow.paths import (
    ASSIGN, BIND, GUARD, SINK, SOURCE, PathInfo, Step, StitchConfig, collect_path_info, stitch,
)
from synflow.program import ProgramIndex
from synflow.summarizer import SummaryStore, candidate_pairs, summarize_function

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "fixtures")
DATA = os.path.join(HERE, "data")
SUITE = os.path.join(DATA, "suite")
CASSETTES = os.path.join(DATA, "cassettes")


def fixture(*parts: str) -> str:
    return os.path.join(FIXTURES, *parts)


def oracle_client() -> LlmClient:
    return LlmClient(OracleBackend())


def path_infos(corpus: str, kind: str, client: Optional[LlmClient] = None):
    """Every stitched path of a corpus for a bundled kind, with its laid-out path info."""
    client = client or oracle_client()
    detector = builtin_spec(kind)
    trees = load_corpus(corpus)
    index = ProgramIndex.build(trees)
    runner = SandboxRunner()
    refs = {}
    for spec in (detector.source, detector.sink):
        program, _ = obtain_extractor(spec, runner, client)
        refs[spec.role] = [r for t in trees for r in run_extractor(program, t, runner, spec.role)]
    summaries = {}
    store = SummaryStore()
    for data in index.ordered():
        pairs = candidate_pairs(data.fn, data.values, refs["source"], refs["sink"], data.cfg)
        summaries[data.id] = summarize_function(data.fn, pairs, client, store, detector.spec_id)
    paths = stitch(summaries, index, refs["source"], refs["sink"], StitchConfig())
    return [(p, collect_path_info(p, index, detector.source_assumption, detector.sink_assumption))
            for p in paths]


# ---------------------------------------------------------------- guard sets

COMPARISONS = ("<", "<=", ">", ">=", "==", "!=")


def _atom(rng: random.Random, names: list[str]) -> str:
    v = rng.choice(names)
    c = rng.randint(-4, 4)
    shape = rng.randrange(6)
    op = rng.choice(COMPARISONS)
    if shape == 0:
        return f"Math.abs({v}) {op} {abs(c)}"
    if shape == 1 and len(names) > 1:
        w = rng.choice([n for n in names if n != v])
        return f"{v} {op} {w}"
    if shape == 2:
        return f"{v} + {rng.randint(1, 3)} {op} {c}"
    if shape == 3:
        return f"{rng.randint(2, 3)} * {v} {op} {c}"
    return f"{v} {op} {c}"


def _condition(rng: random.Random, names: list[str]) -> str:
    shape = rng.randrange(5)
    if shape == 0:
        return f"{_atom(rng, names)} && {_atom(rng, names)}"
    if shape == 1:
        return f"{_atom(rng, names)} || {_atom(rng, names)}"
    if shape == 2:
        return f"!({_atom(rng, names)})"
    return _atom(rng, names)


def random_guard_path(rng: random.Random, case: int) -> PathInfo:
    """A source-to-sink path in the shared fragment: bindings, copies, arithmetic and guards."""
    frame, callee = "f#0", "g#1"
    steps = [Step(SOURCE, 2, frame, "x", "x == 0" if rng.random() < 0.6 else "")]
    names = ["x"]
    line = 3
    for extra in ("y", "z")[: rng.randint(0, 2)]:
        expr = rng.choice([f"{rng.choice(names)} + {rng.randint(-2, 2)}", str(rng.randint(-3, 3)),
                           rng.choice(names), f"{rng.choice(names)} * {rng.randint(-2, 2)}"])
        steps.append(Step(ASSIGN, line, frame, extra, expr))
        names.append(extra)
        line += 1
    for _ in range(rng.randint(1, 3)):
        steps.append(Step(GUARD, line, frame, expr=_condition(rng, names), taken=rng.random() < 0.7))
        line += 1
    end, end_frame, end_names = "x", frame, names
    if rng.random() < 0.5:
        steps.append(Step(BIND, line, callee, "b", "x", source_frame=frame, on_chain=True))
        end, end_frame, end_names = "b", callee, ["b"]
        line += 1
        for _ in range(rng.randint(0, 2)):
            steps.append(Step(GUARD, line, callee, expr=_condition(rng, end_names), taken=rng.random() < 0.7))
            line += 1
    steps.append(Step(SINK, line, end_frame, end, f"{end} == 0"))
    frames = ((frame, "T.f(int)"), (callee, "T.g(int)"))
    types = tuple((fr, n, "int") for fr, ns in ((frame, names), (callee, ["b"])) for n in ns)
    return PathInfo(f"guard-{case:04d}", tuple(steps), frames, types)


# ---------------------------------------------------------------- mini functions

def random_mini_function(rng: random.Random, case: int) -> tuple[str, list[tuple[str, int]], list[tuple[str, int]]]:
    """A loop-free function in the oracle subset, with the (name, line) of its sources and sinks.

    Line 1 opens the class and line 2 the method; each statement takes one line.
    """
    lines = [f"class Mini{case} {{", "    static int f(int p, int q, Box box) {"]
    live = ["p", "q"]
    sources: list[tuple[str, int]] = []
    sinks: list[tuple[str, int]] = []
    counter = [0]

    def expr() -> str:
        shape = rng.randrange(7)
        a, b = rng.choice(live), rng.choice(live)
        if shape == 0:
            return str(rng.randint(0, 9))
        if shape == 1:
            return f"{a} + {b}"
        if shape == 2:
            return f"{a} * {rng.randint(2, 5)}"
        if shape == 3:
            return f"helper({a})"
        if shape == 4:
            return f"box.size + {a}"
        return a

    def emit(depth: int, budget: int) -> None:
        pad = "    " * (depth + 2)
        for _ in range(budget):
            line = len(lines) + 1
            roll = rng.random()
            if depth == 0 and roll < 0.22:
                counter[0] += 1
                name = f"v{counter[0]}"
                if rng.random() < 0.35:
                    lines.append(f"{pad}int {name} = src();")
                    sources.append((name, line))
                else:
                    lines.append(f"{pad}int {name} = {expr()};")
                live.append(name)
            elif roll < 0.45:
                target = rng.choice(live)
                if rng.random() < 0.25:
                    lines.append(f"{pad}{target} = src();")
                    sources.append((target, line))
                else:
                    lines.append(f"{pad}{target} = {expr()};")
            elif roll < 0.62:
                arg = rng.choice(live)
                lines.append(f"{pad}sink({arg});")
                sinks.append((arg, line))
            elif roll < 0.68 and depth > 0:
                lines.append(f"{pad}return {rng.choice(live)};")
                return
            elif depth < 2:
                lines.append(f"{pad}if ({rng.choice(live)} > {rng.randint(-2, 5)}) {{")
                emit(depth + 1, rng.randint(1, 3))
                if rng.random() < 0.5:
                    lines.append(f"{pad}}} else {{")
                    emit(depth + 1, rng.randint(1, 3))
                lines.append(f"{pad}}}")
            else:
                lines.append(f"{pad}{rng.choice(live)} = {expr()};")

    emit(0, rng.randint(3, 9))
    lines.append(f"        return {rng.choice(live)};")
    lines.append("    }")
    lines.append("}")
    return "\n".join(lines) + "\n", sources, sinks
