"""Program values ``v@line`` and the per-function interface-value sets.

The four sets anchor every later phase: parameters and call outputs are where
a value can enter a function, call arguments and return values are where it
can leave.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from tree_sitter import Node

from .cfg import RETURN, Cfg
from .exprs import (
    assignments_in,
    call_args,
    call_name,
    call_receiver,
    expr_vars,
    find_calls,
    unwrap,
)
from .parsing import FunctionInfo, line_of, node_text

ROLES = ("source", "sink", "param", "ret", "arg", "out", "intermediate")


@dataclass(frozen=True, order=False)
class ValueRef:
    identifier: str
    line: int
    unit: str
    role: str = field(default="intermediate", compare=False)

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown value role {self.role!r}")

    @property
    def key(self) -> tuple[str, int, str]:
        return (self.identifier, self.line, self.unit)

    def sort_key(self) -> tuple[str, int, str]:
        return (self.unit, self.line, self.identifier)

    def with_role(self, role: str) -> "ValueRef":
        return ValueRef(self.identifier, self.line, self.unit, role)

    def __str__(self) -> str:
        return f"{self.identifier}@{self.line}"

    def to_json(self) -> dict:
        return {"identifier": self.identifier, "line": self.line, "unit": self.unit, "role": self.role}

    @classmethod
    def from_json(cls, data: dict) -> "ValueRef":
        return cls(data["identifier"], int(data["line"]), data["unit"], data.get("role", "intermediate"))


def sort_refs(refs) -> list[ValueRef]:
    """Deduplicate by key and order by (line, identifier)."""
    seen: dict[tuple, ValueRef] = {}
    for r in refs:
        seen.setdefault(r.key, r)
    return sorted(seen.values(), key=ValueRef.sort_key)


@dataclass(frozen=True)
class CallArg:
    position: int
    text: str
    refs: tuple[ValueRef, ...]


@dataclass(frozen=True)
class CallSite:
    """One call expression inside a function body."""

    line: int
    name: str
    receiver: Optional[str]
    args: tuple[CallArg, ...]
    out: Optional[ValueRef]
    text: str
    start_byte: int = field(compare=False, default=0)

    @property
    def arity(self) -> int:
        return len(self.args)


@dataclass(frozen=True)
class InterfaceValues:
    v_par: tuple[ValueRef, ...] = ()
    v_ret: tuple[ValueRef, ...] = ()
    v_arg: tuple[ValueRef, ...] = ()
    v_out: tuple[ValueRef, ...] = ()
    calls: tuple[CallSite, ...] = ()

    def starts(self) -> list[ValueRef]:
        return sort_refs(self.v_par + self.v_out)

    def ends(self) -> list[ValueRef]:
        return sort_refs(self.v_arg + self.v_ret)


def _body(fn: FunctionInfo) -> Optional[Node]:
    return fn.node.child_by_field_name("body")


def call_sites(fn: FunctionInfo) -> list[CallSite]:
    """Every call in ``fn``'s own body (lambdas and nested classes excluded)."""
    body = _body(fn)
    if body is None:
        return []
    outs: dict[int, ValueRef] = {}
    for a in assignments_in(body):
        if a.rhs is not None and a.op == "=":
            target = unwrap(a.rhs)
            if target.type in ("method_invocation", "object_creation_expression"):
                outs[target.start_byte] = ValueRef(a.lhs, a.line, fn.unit, "out")
    sites = []
    for call in find_calls(body):
        args = []
        for pos, arg in enumerate(call_args(call)):
            refs = tuple(ValueRef(n, ln, fn.unit, "arg") for n, ln in expr_vars(arg))
            args.append(CallArg(pos, node_text(arg), refs))
        sites.append(
            CallSite(
                line=line_of(call),
                name=call_name(call),
                receiver=call_receiver(call),
                args=tuple(args),
                out=outs.get(call.start_byte),
                text=" ".join(node_text(call).split()),
                start_byte=call.start_byte,
            )
        )
    return sites


def interface_values(fn: FunctionInfo, cfg: Cfg) -> InterfaceValues:
    """Collect V_par, V_ret, V_arg and V_out; a pure function of (fn, cfg)."""
    params = [ValueRef(name, line, fn.unit, "param") for name, line in fn.params]
    rets = []
    for stmt in cfg.statements:
        if stmt.kind != RETURN:
            continue
        for syn in stmt.syntax:
            expr = syn.named_children[0] if syn.named_child_count else None
            rets.extend(ValueRef(n, ln, fn.unit, "ret") for n, ln in expr_vars(expr))
    sites = call_sites(fn)
    args = [r for s in sites for a in s.args for r in a.refs]
    outs = [s.out for s in sites if s.out is not None]
    return InterfaceValues(
        v_par=tuple(sort_refs(params)),
        v_ret=tuple(sort_refs(rets)),
        v_arg=tuple(sort_refs(args)),
        v_out=tuple(sort_refs(outs)),
        calls=tuple(sites),
    )
