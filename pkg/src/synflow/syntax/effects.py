"""What each CFG node reads, writes, and copies, by syntax alone."""

from __future__ import annotations

from dataclasses import dataclass

from .cfg import BRANCH, ENTRY, EXIT, LOOP, RETURN, Cfg, Statement
from .exprs import Assignment, assignments_in, call_args, expr_vars, find_calls, is_class_like, unwrap
from .parsing import FunctionInfo

Occ = tuple[str, int]


@dataclass(frozen=True)
class Effects:
    """``flows`` pairs a read with the variable it is written into at the same node."""

    uses: tuple[Occ, ...] = ()
    defs: tuple[Occ, ...] = ()
    flows: tuple[tuple[Occ, Occ], ...] = ()
    assignments: tuple[Assignment, ...] = ()

    @property
    def defined_names(self) -> set[str]:
        return {name for name, _ in self.defs}


def _dedupe(items):
    seen = []
    for it in items:
        if it not in seen:
            seen.append(it)
    return tuple(seen)


def _assignment_sources(a: Assignment) -> list[Occ]:
    srcs = list(expr_vars(a.rhs)) if a.rhs is not None else []
    if a.op != "=":
        srcs.append((a.lhs, a.line))
    return srcs


def _reads(syn) -> list[Occ]:
    """Reads of a statement node other than its assignment right-hand sides."""
    reads: list[Occ] = []
    for call in find_calls(syn):
        recv = call.child_by_field_name("object")
        if recv is not None and not (recv.type == "identifier" and is_class_like(recv.text.decode())):
            reads.extend(expr_vars(recv))
        for arg in call_args(call):
            reads.extend(expr_vars(arg))
    if syn.type == "expression_statement" and syn.named_child_count:
        inner = unwrap(syn.named_children[0])
        if inner.type not in ("assignment_expression", "update_expression"):
            reads.extend(expr_vars(inner))
    elif syn.type not in ("local_variable_declaration", "expression_statement"):
        reads.extend(expr_vars(syn))
    return reads


def statement_effects(stmt: Statement, fn: FunctionInfo) -> Effects:
    if stmt.kind == ENTRY:
        return Effects(defs=tuple(fn.params))
    if stmt.kind == EXIT:
        return Effects()
    uses: list[Occ] = []
    defs: list[Occ] = []
    flows: list[tuple[Occ, Occ]] = []
    assigns: list[Assignment] = []
    for syn in stmt.syntax:
        if syn.type == "catch_formal_parameter":
            name = syn.child_by_field_name("name")
            if name is not None:
                defs.append((name.text.decode(), name.start_point[0] + 1))
            continue
        uses.extend(_reads(syn))
        if stmt.kind in (BRANCH, LOOP, RETURN):
            if stmt.kind == LOOP and syn.type == "identifier" and syn.parent is not None \
                    and syn.parent.type == "enhanced_for_statement":
                # for (T name : value): name receives elements of value
                target = (syn.text.decode(), syn.start_point[0] + 1)
                defs.append(target)
                value = syn.parent.child_by_field_name("value")
                flows.extend((v, target) for v in expr_vars(value))
                uses = [u for u in uses if u != target]
            continue
        for a in assignments_in(syn):
            srcs = _assignment_sources(a)
            uses.extend(srcs)
            target = (a.lhs, a.line)
            defs.append(target)
            flows.extend((s, target) for s in srcs)
            assigns.append(a)
    return Effects(_dedupe(uses), _dedupe(defs), _dedupe(flows), tuple(assigns))


def cfg_effects(cfg: Cfg) -> dict[int, Effects]:
    return {n.index: statement_effects(n, cfg.function) for n in cfg.nodes}
