"""Name-and-arity call resolution across the analyzed corpus."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

from .exprs import is_class_like
from .parsing import FunctionInfo, SyntaxTree
from .values import CallSite, call_sites


@dataclass(frozen=True)
class CallEdge:
    caller: FunctionInfo
    line: int
    callee: FunctionInfo
    site: CallSite
    ambiguous: bool = False


@dataclass(frozen=True)
class CallGraph:
    edges: tuple[CallEdge, ...]
    unresolved: tuple[tuple[FunctionInfo, CallSite], ...]

    def callees(self, caller: FunctionInfo) -> list[CallEdge]:
        return [e for e in self.edges if e.caller == caller]

    def callers(self, callee: FunctionInfo) -> list[CallEdge]:
        return [e for e in self.edges if e.callee == callee]

    @property
    def ambiguous(self) -> list[CallEdge]:
        return [e for e in self.edges if e.ambiguous]


def _enclosing_class(fn: FunctionInfo) -> str:
    parts = fn.qualified_name.split(".")
    return parts[-2] if len(parts) > 1 else ""


def _resolve(site: CallSite, by_name: dict[tuple[str, int], list[FunctionInfo]]) -> list[FunctionInfo]:
    found = list(by_name.get((site.name, site.arity), []))
    recv = site.receiver
    if recv is not None and "." not in recv and is_class_like(recv):
        # Math.abs(x) must not bind to some corpus method that happens to be named abs
        found = [f for f in found if _enclosing_class(f) == recv]
    return found


def call_graph(trees: Iterable[SyntaxTree]) -> CallGraph:
    trees = list(trees)
    functions = [fn for t in trees for fn in t.functions]
    by_name: dict[tuple[str, int], list[FunctionInfo]] = defaultdict(list)
    for fn in functions:
        by_name[(fn.name, fn.arity)].append(fn)
    edges: list[CallEdge] = []
    unresolved: list[tuple[FunctionInfo, CallSite]] = []
    for caller in functions:
        for site in call_sites(caller):
            targets = _resolve(site, by_name)
            if not targets:
                unresolved.append((caller, site))
                continue
            for callee in targets:
                edges.append(CallEdge(caller, site.line, callee, site, ambiguous=len(targets) > 1))
    edges.sort(key=lambda e: (e.caller.id, e.line, e.site.start_byte, e.callee.id))
    return CallGraph(tuple(edges), tuple(unresolved))
