"""Everything the later phases need about a parsed corpus, built once."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .syntax.callgraph import CallGraph, call_graph
from .syntax.cfg import Cfg, CfgError, build_cfg
from .syntax.effects import Effects, cfg_effects
from .syntax.exprs import assignments_in
from .syntax.parsing import FunctionInfo, SyntaxTree
from .syntax.values import InterfaceValues, ValueRef, interface_values

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FunctionData:
    fn: FunctionInfo
    cfg: Cfg
    values: InterfaceValues
    effects: dict[int, Effects]
    types: dict[str, str]

    @property
    def id(self) -> str:
        return self.fn.id


def declared_types(fn: FunctionInfo) -> dict[str, str]:
    types = {name: typ for (name, _), typ in zip(fn.params, fn.param_types)}
    body = fn.node.child_by_field_name("body")
    for a in assignments_in(body):
        if a.declared_type and a.lhs not in types:
            types[a.lhs] = a.declared_type
    return types


@dataclass(eq=False)
class ProgramIndex:
    trees: dict[str, SyntaxTree]
    functions: dict[str, FunctionData]
    graph: CallGraph
    skipped: list[tuple[str, str]] = field(default_factory=list)

    @classmethod
    def build(cls, trees: Iterable[SyntaxTree]) -> "ProgramIndex":
        trees = list(trees)
        functions: dict[str, FunctionData] = {}
        skipped: list[tuple[str, str]] = []
        for tree in trees:
            for fn in tree.functions:
                try:
                    cfg = build_cfg(fn, tree)
                except CfgError as exc:
                    log.warning("skipping %s: %s", fn.id, exc)
                    skipped.append((fn.id, str(exc)))
                    continue
                functions[fn.id] = FunctionData(
                    fn, cfg, interface_values(fn, cfg), cfg_effects(cfg), declared_types(fn)
                )
        return cls({t.unit.path: t for t in trees}, functions, call_graph(trees), skipped)

    def function_at(self, unit: str, line: int) -> Optional[FunctionData]:
        best = None
        for data in self.functions.values():
            fn = data.fn
            if fn.unit == unit and fn.start_line <= line <= fn.end_line:
                if best is None or fn.start_line >= best.fn.start_line:
                    best = data
        return best

    def function_of(self, ref: ValueRef) -> Optional[FunctionData]:
        return self.function_at(ref.unit, ref.line)

    def ordered(self) -> list[FunctionData]:
        return sorted(self.functions.values(), key=lambda d: (d.fn.unit, d.fn.start_line, d.fn.qualified_name))
