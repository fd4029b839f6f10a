"""Brute-force intra-procedural dataflow closure on a small Java subset.

The subset has local declarations, assignments to locals, calls, returns and
if/else, with expressions over variables, literals and field reads.  Every
read or write of a variable is an occurrence; the value held by one
occurrence reaches a later read of the same variable when some control path
connects them without an intervening write, and a read on the right of an
assignment reaches the written variable.  A call's result is a fresh value:
its arguments do not reach it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..syntax.cfg import Cfg, build_cfg
from ..syntax.effects import Effects, cfg_effects
from ..syntax.parsing import FunctionInfo, line_of, walk

ALLOWED_STATEMENTS = {
    "block",
    "local_variable_declaration",
    "expression_statement",
    "return_statement",
    "if_statement",
    ";",
}
ALLOWED_EXPRESSION_STATEMENTS = {
    "assignment_expression",
    "method_invocation",
    "object_creation_expression",
    "update_expression",
}
REJECTED_NODES = {
    "lambda_expression": "lambda",
    "switch_expression": "switch",
    "class_body": "nested class",
    "method_reference": "method reference",
}

Ref = tuple[str, int]
Occurrence = tuple[int, str, int, str]  # (cfg node, name, line, "def" | "use")


class UnsupportedConstruct(ValueError):
    def __init__(self, line: int, what: str):
        super().__init__(f"line {line}: {what} is outside the oracle subset")
        self.line = line
        self.what = what


def _check_statement(node) -> None:
    t = node.type
    if t in ("line_comment", "block_comment"):
        return
    if t not in ALLOWED_STATEMENTS:
        raise UnsupportedConstruct(line_of(node), t.replace("_", " "))
    if t == "expression_statement":
        inner = node.named_children[0] if node.named_child_count else None
        if inner is None or inner.type not in ALLOWED_EXPRESSION_STATEMENTS:
            raise UnsupportedConstruct(line_of(node), "expression statement")
        if inner.type == "assignment_expression":
            left = inner.child_by_field_name("left")
            if left is None or left.type != "identifier":
                raise UnsupportedConstruct(line_of(node), "store to a field or array element")
    if t == "block":
        for c in node.named_children:
            _check_statement(c)
    if t == "if_statement":
        for field in ("consequence", "alternative"):
            c = node.child_by_field_name(field)
            if c is not None:
                _check_statement(c)


def check_subset(fn: FunctionInfo) -> None:
    body = fn.node.child_by_field_name("body")
    if body is None:
        raise UnsupportedConstruct(fn.start_line, "method without a body")
    for stmt in body.named_children:
        _check_statement(stmt)
    for n in walk(body):
        if n.type in REJECTED_NODES:
            raise UnsupportedConstruct(line_of(n), REJECTED_NODES[n.type])
        if n.is_error or n.is_missing:
            raise UnsupportedConstruct(line_of(n), "syntax error")


@dataclass(frozen=True, eq=False)
class MiniFunction:
    fn: FunctionInfo
    cfg: Cfg
    effects: dict[int, Effects]

    @classmethod
    def of(cls, fn: FunctionInfo, cfg: Cfg | None = None) -> "MiniFunction":
        check_subset(fn)
        cfg = cfg or build_cfg(fn)
        if cfg.has_loops:
            raise UnsupportedConstruct(fn.start_line, "loop")
        return cls(fn, cfg, cfg_effects(cfg))

    @classmethod
    def relaxed(cls, fn: FunctionInfo, cfg: Cfg | None = None) -> "MiniFunction":
        """The same closure over any function, loops included; exact only on the subset."""
        cfg = cfg or build_cfg(fn)
        return cls(fn, cfg, cfg_effects(cfg))

    def occurrences(self) -> list[Occurrence]:
        occs: list[Occurrence] = []
        for idx in sorted(self.effects):
            eff = self.effects[idx]
            occs.extend((idx, n, ln, "use") for n, ln in eff.uses)
            occs.extend((idx, n, ln, "def") for n, ln in eff.defs)
        return occs

    def step_edges(self) -> set[tuple[Occurrence, Occurrence]]:
        """Single-step edges: occurrence → next reads of the same value, read → written."""
        occs = self.occurrences()
        uses_at: dict[int, list[Occurrence]] = {}
        for o in occs:
            if o[3] == "use":
                uses_at.setdefault(o[0], []).append(o)
        edges: set[tuple[Occurrence, Occurrence]] = set()
        for o in occs:
            node, name, _, kind = o
            if kind == "use" and name in self.effects[node].defined_names:
                continue  # the write at this node replaces the value that was read
            seen = {node}
            frontier = [e.dst for e in self.cfg.successors(node)]
            while frontier:
                cur = frontier.pop()
                if cur in seen:
                    continue
                seen.add(cur)
                for u in uses_at.get(cur, []):
                    if u[1] == name:
                        edges.add((o, u))
                if name in self.effects[cur].defined_names:
                    continue
                frontier.extend(e.dst for e in self.cfg.successors(cur))
        for idx, eff in self.effects.items():
            for src, dst in eff.flows:
                edges.add(((idx, src[0], src[1], "use"), (idx, dst[0], dst[1], "def")))
        return edges


@dataclass(frozen=True)
class FactClosure:
    pairs: frozenset[tuple[Ref, Ref]]

    def holds(self, start: Ref, end: Ref) -> bool:
        return (start, end) in self.pairs

    def restricted(self, pairs: Iterable[tuple[Ref, Ref]]) -> set[tuple[Ref, Ref]]:
        return {p for p in pairs if p in self.pairs}


def oracle_closure(mini: MiniFunction) -> FactClosure:
    """Reflexive-transitive closure of the step edges, projected to (name, line) values."""
    occs = mini.occurrences()
    succ: dict[Occurrence, set[Occurrence]] = {o: set() for o in occs}
    for a, b in mini.step_edges():
        succ[a].add(b)
    pairs: set[tuple[Ref, Ref]] = set()
    for o in occs:
        seen = {o}
        stack = [o]
        while stack:
            cur = stack.pop()
            for nxt in succ[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        for r in seen:
            pairs.add(((o[1], o[2]), (r[1], r[2])))
    return FactClosure(frozenset(pairs))
