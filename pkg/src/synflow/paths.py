"""Inter-procedural paths from function summaries, and the facts along them.

Stitching walks summary facts inside a function and crosses into callees
through argument→parameter bindings and back out through return→output
bindings, keeping a call stack so returns go back to the call they came
from.  Path information is then read off the CFGs: the guards the path has
to pass, the assignments it executes and the bindings at each boundary, in
execution order and scoped per function activation.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, replace
from typing import Iterable, Mapping

from .program import FunctionData, ProgramIndex
from .summarizer import FunctionSummary
from .syntax.callgraph import CallEdge
from .syntax.cfg import BRANCH, LOOP, TRUE, Edge, negate
from .syntax.exprs import expr_vars, unwrap
from .syntax.parsing import node_text
from .syntax.values import ValueRef

log = logging.getLogger(__name__)

FACT = "fact"
CALL = "call"
RETURN = "return"


@dataclass(frozen=True)
class StitchConfig:
    max_depth: int = 5
    max_paths: int = 64
    loop_policy: str = "cut"

    def __post_init__(self) -> None:
        if self.max_depth < 1 or self.max_paths < 1:
            raise ValueError("stitch bounds must be positive")
        if self.loop_policy != "cut":
            raise ValueError("only the 'cut' loop policy is supported")


@dataclass(frozen=True)
class DataflowPath:
    hops: tuple[ValueRef, ...]
    functions: tuple[str, ...]
    links: tuple[str, ...]

    @property
    def source(self) -> ValueRef:
        return self.hops[0]

    @property
    def sink(self) -> ValueRef:
        return self.hops[-1]

    @property
    def id(self) -> str:
        text = "|".join(f"{h.unit}:{h.line}:{h.identifier}" for h in self.hops)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def sort_key(self) -> tuple:
        return (
            self.source.unit, self.source.line, self.sink.unit, self.sink.line,
            self.source.identifier, self.sink.identifier, tuple(h.sort_key() for h in self.hops),
        )

    def to_json(self) -> dict:
        return {
            "hops": [h.to_json() for h in self.hops],
            "functions": list(self.functions),
            "links": list(self.links),
        }

    def __str__(self) -> str:
        return " -> ".join(str(h) for h in self.hops)


def _binding_targets(index: ProgramIndex, data: FunctionData, ref: ValueRef) -> list[tuple[CallEdge, int]]:
    """Call edges (and argument positions) through which ``ref`` is passed."""
    out = []
    for edge in index.graph.callees(data.fn):
        for arg in edge.site.args:
            if arg.position < edge.callee.arity and ref.key in {r.key for r in arg.refs}:
                out.append((edge, arg.position))
    return out


def _edge_key(edge: CallEdge) -> tuple:
    return (edge.caller.id, edge.site.start_byte, edge.callee.id)


def stitch(
    summaries: Mapping[str, FunctionSummary],
    index: ProgramIndex,
    sources: Iterable[ValueRef],
    sinks: Iterable[ValueRef],
    config: StitchConfig = StitchConfig(),
) -> list[DataflowPath]:
    sink_keys = {s.key for s in sinks}
    results: dict[tuple, DataflowPath] = {}
    per_pair: dict[tuple, int] = {}
    truncated = False

    def returns_of(data: FunctionData, ret: ValueRef, stack: tuple) -> list[tuple[CallEdge, tuple]]:
        if stack:
            edge = stack[-1]
            return [(edge, stack[:-1])] if edge.site.out is not None else []
        return [(e, ()) for e in index.graph.callers(data.fn) if e.site.out is not None]

    def dfs(ref: ValueRef, data: FunctionData, stack: tuple, up: int,
            hops: list, fns: list, links: list, on_path: set) -> None:
        nonlocal truncated
        summary = summaries.get(data.id)
        if summary is None:
            return
        for end in summary.ends_from(ref):
            if end.key == ref.key:
                continue
            if end.key in sink_keys:
                pair = (hops[0].key, end.key)
                if per_pair.get(pair, 0) >= config.max_paths:
                    truncated = True
                else:
                    path = DataflowPath(
                        tuple(hops + [end.with_role("sink")]), tuple(fns + [data.id]), tuple(links + [FACT])
                    )
                    key = tuple(h.key for h in path.hops)
                    if key not in results:
                        results[key] = path
                        per_pair[pair] = per_pair.get(pair, 0) + 1
            # into callees through this argument
            for edge, pos in _binding_targets(index, data, end):
                if len(stack) >= config.max_depth:
                    truncated = True
                    continue
                callee = index.functions.get(edge.callee.id)
                if callee is None:
                    continue
                pname, pline = edge.callee.params[pos]
                param = ValueRef(pname, pline, edge.callee.unit, "param")
                new_stack = stack + (edge,)
                state = (param.key, tuple(_edge_key(e) for e in new_stack), up)
                if state in on_path:
                    continue
                on_path.add(state)
                dfs(param, callee, new_stack, up,
                    hops + [end.with_role("arg"), param], fns + [data.id, callee.id],
                    links + [FACT, CALL], on_path)
                on_path.discard(state)
            # back out to callers through this return value
            if end.key in {r.key for r in data.values.v_ret}:
                for edge, rest in returns_of(data, end, stack):
                    new_up = up + (0 if stack else 1)
                    if new_up > config.max_depth:
                        truncated = True
                        continue
                    caller = index.functions.get(edge.caller.id)
                    if caller is None:
                        continue
                    out = edge.site.out.with_role("out")
                    state = (out.key, tuple(_edge_key(e) for e in rest), new_up)
                    if state in on_path:
                        continue
                    on_path.add(state)
                    dfs(out, caller, rest, new_up,
                        hops + [end.with_role("ret"), out], fns + [data.id, caller.id],
                        links + [FACT, RETURN], on_path)
                    on_path.discard(state)

    for src in sorted({s.key: s for s in sources}.values(), key=ValueRef.sort_key):
        data = index.function_of(src)
        if data is None:
            continue
        start = src.with_role("source")
        dfs(start, data, (), 0, [start], [data.id], [], {(start.key, (), 0)})
    if truncated:
        log.warning("path enumeration hit the configured bounds; some paths were not explored")
    return sorted(results.values(), key=DataflowPath.sort_key)


# ---------------------------------------------------------------- path info

ASSIGN = "assign"
HAVOC = "havoc"
GUARD = "guard"
BIND = "bind"
SOURCE = "source"
SINK = "sink"


@dataclass(frozen=True)
class Step:
    kind: str
    line: int
    frame: str
    target: str = ""
    expr: str = ""
    op: str = "="
    taken: bool = True
    source_frame: str = ""
    on_chain: bool = False
    preserving: bool = True

    def render(self) -> str:
        where = f"[{self.frame}] line {self.line}:"
        if self.kind == ASSIGN:
            if self.op in ("++", "--"):
                return f"{where} {self.target}{self.op}"
            if not self.expr:
                return f"{where} declare {self.target}"
            return f"{where} {self.target} {self.op} {self.expr}"
        if self.kind == HAVOC:
            return f"{where} {self.target} may hold any value (modified in a loop or on another branch)"
        if self.kind == GUARD:
            return f"{where} branch condition `{self.expr}` is {'true' if self.taken else 'false'}"
        if self.kind == BIND:
            return f"[{self.source_frame} -> {self.frame}] line {self.line}: {self.target} := {self.expr}"
        anchor = "source" if self.kind == SOURCE else "sink"
        text = f"{where} {anchor} value {self.target}"
        return text + (f", assume {self.expr}" if self.expr else "")


@dataclass(frozen=True)
class PathInfo:
    path_id: str
    steps: tuple[Step, ...]
    frames: tuple[tuple[str, str], ...] = ()
    types: tuple[tuple[str, str, str], ...] = ()

    @property
    def guards(self) -> list[Step]:
        return [s for s in self.steps if s.kind == GUARD]

    def type_map(self) -> dict[tuple[str, str], str]:
        return {(f, n): t for f, n, t in self.types}

    def render(self) -> str:
        if not self.steps:
            return "(no steps)"
        return "\n".join(s.render() for s in self.steps)

    def to_json(self) -> dict:
        return {
            "path_id": self.path_id,
            "steps": [asdict(s) for s in self.steps],
            "frames": [list(f) for f in self.frames],
            "types": [list(t) for t in self.types],
        }

    def to_json_text(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, data: dict | str) -> "PathInfo":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(
            data["path_id"],
            tuple(Step(**s) for s in data["steps"]),
            tuple(tuple(f) for f in data.get("frames", [])),
            tuple(tuple(t) for t in data.get("types", [])),
        )


class PathInfoError(RuntimeError):
    pass


def _tainted_after(data: FunctionData, node: int, tainted: set[str]) -> set[str]:
    tainted = set(tainted)
    for a in data.effects[node].assignments:
        srcs = {n for n, _ in _sources_of(a)}
        if srcs & tainted:
            tainted.add(a.lhs)
        elif a.op == "=":
            tainted.discard(a.lhs)
    return tainted


def _sources_of(a) -> list[tuple[str, int]]:
    srcs = list(expr_vars(a.rhs)) if a.rhs is not None else []
    if a.op != "=":
        srcs.append((a.lhs, a.line))
    return srcs


def _defines(data: FunctionData, node: int, name: str) -> bool:
    return name in data.effects[node].defined_names


class _Collector:
    def __init__(self, index: ProgramIndex, source_assumption: str, sink_assumption: str):
        self.index = index
        self.source_assumption = source_assumption
        self.sink_assumption = sink_assumption
        self.steps: list[Step] = []
        self.frames: list[tuple[str, str]] = []
        self.types: list[tuple[str, str, str]] = []
        self.candidates: list[tuple[int, str, frozenset[str]]] = []

    def new_frame(self, data: FunctionData) -> str:
        name = f"{data.fn.name}#{len(self.frames)}"
        self.frames.append((name, data.id))
        for var, typ in sorted(data.types.items()):
            self.types.append((name, var, typ))
        return name

    def locate(self, data: FunctionData, ref: ValueRef) -> int:
        try:
            return data.cfg.locate(ref.line, ref.identifier)
        except Exception as exc:
            raise PathInfoError(f"{ref} not found in the CFG of {data.id}: {exc}") from exc

    def assign_steps(self, data: FunctionData, node: int, frame: str, tainted: set[str]) -> set[str]:
        for a in data.effects[node].assignments:
            srcs = {n for n, _ in _sources_of(a)}
            on_chain = bool(srcs & tainted)
            if on_chain:
                self.candidates.append((len(self.steps), a.lhs, frozenset(srcs & tainted)))
            self.steps.append(Step(
                ASSIGN, a.line, frame, a.lhs, " ".join(a.rhs_text.split()), a.op,
                preserving=a.is_copy,
            ))
            if on_chain:
                tainted = tainted | {a.lhs}
            elif a.op == "=":
                tainted = tainted - {a.lhs}
        return tainted

    def havoc(self, names: Iterable[str], line: int, frame: str) -> None:
        for n in sorted(set(names)):
            self.steps.append(Step(HAVOC, line, frame, n))

    def guard_step(self, data: FunctionData, edge: Edge, frame: str) -> None:
        node = data.cfg.nodes[edge.src]
        if edge.guard in (TRUE,):
            return
        if node.kind in (BRANCH, LOOP) and edge.guard == negate(node.text):
            self.steps.append(Step(GUARD, node.line, frame, expr=node.text, taken=False))
        else:
            self.steps.append(Step(GUARD, node.line, frame, expr=edge.guard, taken=True))

    def segment(self, data: FunctionData, frame: str, start: ValueRef, end: ValueRef,
                first: bool, after_binding: bool) -> None:
        cfg = data.cfg
        ns, ne = self.locate(data, start), self.locate(data, end)
        start_defines = ns == cfg.entry or _defines(data, ns, start.identifier)
        self.candidates = []
        tainted = {start.identifier}
        if not after_binding and ns != cfg.entry and ns != ne:
            tainted = self.assign_steps(data, ns, frame, set() if start_defines else tainted)
            tainted |= {start.identifier} if start_defines else set()
        if first:
            self.steps.append(Step(SOURCE, start.line, frame, start.identifier,
                                   self.source_assumption.format(v=start.identifier) if self.source_assumption else ""))
        try:
            self._walk_segment(data, frame, ns, ne, start, end, start_defines, tainted)
        finally:
            self._mark_chain(end.identifier)

    def _mark_chain(self, end_name: str) -> None:
        """Flag the tainted assignments the end value actually derives from."""
        needed = {end_name}
        for index, lhs, srcs in reversed(self.candidates):
            if lhs in needed:
                self.steps[index] = replace(self.steps[index], on_chain=True)
                needed = (needed - {lhs}) | set(srcs)
        self.candidates = []

    def _walk_segment(self, data: FunctionData, frame: str, ns: int, ne: int, start: ValueRef,
                      end: ValueRef, start_defines: bool, tainted: set[str]) -> None:
        cfg = data.cfg
        if ns == ne:
            return
        paths = cfg.simple_paths(ns, ne)
        if not paths:
            log.warning("no control path from %s to %s in %s", start, end, data.id)
            return
        kept = [p for p in paths if self._chain_holds(data, p, ns, ne, start, end, start_defines)]
        kept = kept or paths
        first_path = kept[0]
        common_edges = set.intersection(*(set(p) for p in kept))
        node_sets = [{e.dst for e in p} for p in kept]
        common_nodes = set.intersection(*node_sets)
        divergent = set.union(*node_sets) - common_nodes
        havocked = False
        for edge in first_path:
            if edge in common_edges:
                self.guard_step(data, edge, frame)
            elif not havocked:
                names = set().union(*(data.effects[n].defined_names for n in divergent)) if divergent else set()
                self.havoc(names, cfg.nodes[edge.dst].line, frame)
                havocked = True
            v = edge.dst
            if cfg.nodes[v].kind == LOOP:
                self.havoc(cfg.loop_writes.get(v, ()), cfg.nodes[v].line, frame)
            if v == ne:
                break
            if v in common_nodes:
                tainted = self.assign_steps(data, v, frame, tainted)

    @staticmethod
    def _chain_holds(data: FunctionData, path: list[Edge], ns: int, ne: int,
                     start: ValueRef, end: ValueRef, start_defines: bool) -> bool:
        """Whether the start value still reaches ``end`` when control follows ``path``."""
        tainted = {start.identifier}
        if not start_defines:
            tainted = _tainted_after(data, ns, tainted) | {start.identifier}
        for edge in path:
            if edge.dst == ne:
                break
            tainted = _tainted_after(data, edge.dst, tainted)
            if not tainted:
                return False
        return end.identifier in tainted


def _site_for(index: ProgramIndex, caller: FunctionData, arg: ValueRef, callee_id: str):
    for edge in index.graph.callees(caller.fn):
        if edge.callee.id != callee_id:
            continue
        for a in edge.site.args:
            if arg.key in {r.key for r in a.refs}:
                return edge, a.position
    return None, None


def _return_text(data: FunctionData, ret: ValueRef) -> tuple[str, bool]:
    node = data.cfg.nodes[data.cfg.locate(ret.line, ret.identifier)]
    for syn in node.syntax:
        if syn.type == "return_statement" and syn.named_child_count:
            expr = syn.named_children[0]
            return " ".join(node_text(expr).split()), unwrap(expr).type == "identifier"
    return ret.identifier, True


def collect_path_info(
    path: DataflowPath,
    index: ProgramIndex,
    source_assumption: str = "",
    sink_assumption: str = "",
) -> PathInfo:
    c = _Collector(index, source_assumption, sink_assumption)
    datas = []
    for fid in path.functions:
        data = index.functions.get(fid)
        if data is None:
            raise PathInfoError(f"function {fid} is not indexed")
        datas.append(data)
    hops = path.hops
    frame_stack = [c.new_frame(datas[0])]
    after_binding = False
    first = True
    for i, link in enumerate(path.links):
        a, b = hops[i], hops[i + 1]
        data_a = datas[i]
        data_b = datas[i + 1] if i + 1 < len(datas) else data_a
        frame = frame_stack[-1]
        if link == FACT:
            c.segment(data_a, frame, a, b, first, after_binding)
            first = False
            after_binding = False
        elif link == CALL:
            edge, pos = _site_for(index, data_a, a, data_b.id)
            if edge is None:
                raise PathInfoError(f"no call from {data_a.id} passes {a} to {data_b.id}")
            callee_frame = c.new_frame(data_b)
            for arg in edge.site.args:
                if arg.position >= edge.callee.arity:
                    continue
                pname = edge.callee.params[arg.position][0]
                c.steps.append(Step(
                    BIND, edge.line, callee_frame, pname, " ".join(arg.text.split()),
                    source_frame=frame, on_chain=arg.position == pos,
                    preserving=len(arg.refs) == 1 and arg.text.strip() == arg.refs[0].identifier,
                ))
            frame_stack.append(callee_frame)
            after_binding = True
        elif link == RETURN:
            text, plain = _return_text(data_a, a)
            if len(frame_stack) > 1:
                frame_stack.pop()
            else:
                frame_stack[-1] = c.new_frame(data_b)
            c.steps.append(Step(
                BIND, b.line, frame_stack[-1], b.identifier, text,
                source_frame=frame, on_chain=True, preserving=plain,
            ))
            after_binding = True
        else:
            raise PathInfoError(f"unknown link kind {link!r}")
    sink = hops[-1]
    c.steps.append(Step(SINK, sink.line, frame_stack[-1], sink.identifier,
                        sink_assumption.format(v=sink.identifier) if sink_assumption else ""))
    return PathInfo(path.id, tuple(c.steps), tuple(c.frames), tuple(c.types))
