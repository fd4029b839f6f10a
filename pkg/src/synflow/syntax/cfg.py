"""Line-level control-flow graphs built straight from the syntax tree.

Every edge carries the text of the boolean expression under which its target
runs just after its source: ``"true"`` for fall-through, the branch condition
or ``"!(cond)"`` out of a branch, ``"false"`` into dead code.  Loop back-edges
are kept and flagged; path enumeration decides what to do with them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional

from tree_sitter import Node

from .exprs import assigned_names, identifiers
from .parsing import FunctionInfo, end_line_of, line_of, node_text

TRUE = "true"
FALSE = "false"

ENTRY = "entry"
EXIT = "exit"
STMT = "stmt"
BRANCH = "branch"
LOOP = "loop"
RETURN = "return"
THROW = "throw"
JUMP = "jump"

_SKIPPED = (
    "line_comment",
    "block_comment",
    "class_declaration",
    "local_class_declaration",
    "interface_declaration",
    "enum_declaration",
    "record_declaration",
    ";",
)


class CfgError(Exception):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def negate(cond: str) -> str:
    """Complement of a guard; the constant guards fold so dead edges stay recognizable."""
    if cond == TRUE:
        return FALSE
    if cond == FALSE:
        return TRUE
    return f"!({cond})"


def squash(text: str) -> str:
    return " ".join(text.split())


@dataclass(frozen=True)
class Statement:
    index: int
    line: int
    end_line: int
    text: str
    kind: str
    syntax: tuple[Node, ...] = field(default=(), repr=False, compare=False)


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    guard: str
    back: bool = False


@dataclass(frozen=True, eq=False)
class Cfg:
    function: FunctionInfo
    nodes: tuple[Statement, ...]
    edges: tuple[Edge, ...]
    entry: int
    exit: int
    loop_writes: Mapping[int, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        succ: dict[int, list[Edge]] = {n.index: [] for n in self.nodes}
        pred: dict[int, list[Edge]] = {n.index: [] for n in self.nodes}
        for e in self.edges:
            succ[e.src].append(e)
            pred[e.dst].append(e)
        object.__setattr__(self, "_succ", succ)
        object.__setattr__(self, "_pred", pred)

    def successors(self, index: int) -> list[Edge]:
        return self._succ[index]  # type: ignore[attr-defined]

    def predecessors(self, index: int) -> list[Edge]:
        return self._pred[index]  # type: ignore[attr-defined]

    @property
    def statements(self) -> list[Statement]:
        return [n for n in self.nodes if n.kind not in (ENTRY, EXIT)]

    @property
    def has_loops(self) -> bool:
        return any(e.back for e in self.edges)

    def reachable(self) -> set[int]:
        seen = {self.entry}
        stack = [self.entry]
        while stack:
            cur = stack.pop()
            for e in self.successors(cur):
                if e.dst not in seen:
                    seen.add(e.dst)
                    stack.append(e.dst)
        return seen

    def locate(self, line: int, name: Optional[str] = None) -> int:
        """The node a value at ``line`` belongs to; header lines map to entry."""
        fn = self.function
        if fn.start_line <= line < fn.body_line or (line == fn.start_line and line == fn.body_line and not self._has_stmt_on(line)):
            return self.entry
        candidates = [
            n for n in self.statements if n.line <= line <= n.end_line
        ]
        if name is not None:
            named = [n for n in candidates if _mentions(n, name, line)]
            if named:
                candidates = named
        if not candidates:
            if line == fn.end_line:
                return self.exit
            raise CfgError(line, f"no statement of {fn.qualified_name} covers this line")
        candidates.sort(key=lambda n: (n.end_line - n.line, n.index))
        return candidates[0].index

    def _has_stmt_on(self, line: int) -> bool:
        return any(n.line <= line <= n.end_line for n in self.statements)

    def simple_paths(self, src: int, dst: int, limit: int = 256) -> list[list[Edge]]:
        """Edge lists of paths src→dst that visit no node twice, skipping dead edges."""
        results: list[list[Edge]] = []
        if src == dst:
            return [[]]
        path: list[Edge] = []
        on_path = {src}

        def dfs(cur: int) -> None:
            if len(results) >= limit:
                return
            for e in self.successors(cur):
                if e.guard == FALSE or e.dst in on_path:
                    continue
                path.append(e)
                if e.dst == dst:
                    results.append(list(path))
                else:
                    on_path.add(e.dst)
                    dfs(e.dst)
                    on_path.discard(e.dst)
                path.pop()
                if len(results) >= limit:
                    return

        dfs(src)
        return results


def _mentions(stmt: Statement, name: str, line: int) -> bool:
    for syn in stmt.syntax:
        for ident in identifiers(syn):
            if line_of(ident) == line and node_text(ident) == name:
                return True
    return False


@dataclass
class _Breakable:
    kind: str
    label: Optional[str]
    breaks: list[tuple[int, str]] = field(default_factory=list)
    continues: list[tuple[int, str]] = field(default_factory=list)


Pending = list[tuple[int, str]]


class _Builder:
    def __init__(self, fn: FunctionInfo):
        self.fn = fn
        self.nodes: list[Statement] = []
        self.edges: list[Edge] = []
        self.to_exit: Pending = []
        self.ctx: list[_Breakable] = []
        self.loop_writes: dict[int, frozenset[str]] = {}
        self.label: Optional[str] = None

    def new(self, kind: str, syntax: tuple[Node, ...], text: str, line: int, end_line: int) -> int:
        idx = len(self.nodes)
        self.nodes.append(Statement(idx, line, end_line, squash(text), kind, syntax))
        return idx

    def new_from(self, kind: str, node: Node, text: Optional[str] = None) -> int:
        return self.new(kind, (node,), node_text(node) if text is None else text, line_of(node), end_line_of(node))

    def connect(self, pending: Pending, dst: int, back: bool = False) -> None:
        for src, guard in pending:
            self.edges.append(Edge(src, dst, guard, back))

    def build(self) -> Cfg:
        fn = self.fn
        body = fn.node.child_by_field_name("body")
        header_end = fn.body_line
        header = "\n".join(node_text(fn.node).split("\n")[: max(1, header_end - fn.start_line + 1)])
        entry = self.new(ENTRY, (), header.split("{")[0], fn.start_line, fn.start_line)
        pending: Pending = [(entry, TRUE)]
        if body is not None:
            pending = self.seq(body.named_children, pending)
        exit_ = self.new(EXIT, (), "", fn.end_line, fn.end_line)
        self.connect(pending + self.to_exit, exit_)
        return Cfg(fn, tuple(self.nodes), tuple(self.edges), entry, exit_, dict(self.loop_writes))

    def seq(self, children: list[Node], pending: Pending) -> Pending:
        for child in children:
            if child.type in _SKIPPED:
                continue
            if not pending:
                # unreachable code hangs off the preceding jump with a dead edge
                pending = [(len(self.nodes) - 1, FALSE)]
            pending = self.stmt(child, pending)
        return pending

    def cond_text(self, holder: Node, field_name: str = "condition") -> tuple[Optional[Node], str]:
        cond = holder.child_by_field_name(field_name)
        if cond is None:
            return None, TRUE
        if cond.has_error or cond.is_missing:
            raise CfgError(line_of(cond), f"malformed {holder.type.replace('_', ' ')} header")
        inner = cond
        if inner.type == "parenthesized_expression" and inner.named_child_count == 1:
            inner = inner.named_children[0]
        return inner, squash(node_text(inner))

    def take_label(self) -> Optional[str]:
        label, self.label = self.label, None
        return label

    def stmt(self, n: Node, pending: Pending) -> Pending:
        t = n.type
        if t in ("block", "constructor_body"):
            label = self.take_label()
            if label is None:
                return self.seq(n.named_children, pending)
            ctx = _Breakable("block", label)
            self.ctx.append(ctx)
            out = self.seq(n.named_children, pending)
            self.ctx.pop()
            return out + ctx.breaks
        if t == "labeled_statement":
            label_node = next((c for c in n.named_children if c.type == "identifier"), None)
            inner = next((c for c in n.named_children if c.type != "identifier"), None)
            if inner is None:
                return pending
            self.label = node_text(label_node) if label_node is not None else None
            return self.stmt(inner, pending)
        if t == "if_statement":
            return self.if_stmt(n, pending)
        if t == "while_statement":
            return self.while_stmt(n, pending)
        if t == "do_statement":
            return self.do_stmt(n, pending)
        if t == "for_statement":
            return self.for_stmt(n, pending)
        if t == "enhanced_for_statement":
            return self.foreach_stmt(n, pending)
        if t == "switch_expression":
            return self.switch_stmt(n, pending)
        if t == "expression_statement" and n.named_child_count == 1 and n.named_children[0].type == "switch_expression":
            return self.switch_stmt(n.named_children[0], pending)
        if t in ("try_statement", "try_with_resources_statement"):
            return self.try_stmt(n, pending)
        if t == "synchronized_statement":
            lock = n.named_children[0] if n.named_child_count else n
            idx = self.new_from(STMT, lock, f"synchronized ({node_text(lock)})")
            self.connect(pending, idx)
            body = n.child_by_field_name("body")
            return self.stmt(body, [(idx, TRUE)]) if body is not None else [(idx, TRUE)]
        if t == "return_statement":
            idx = self.new_from(RETURN, n)
            self.connect(pending, idx)
            self.to_exit.append((idx, TRUE))
            return []
        if t == "throw_statement":
            idx = self.new_from(THROW, n)
            self.connect(pending, idx)
            self.to_exit.append((idx, TRUE))
            return []
        if t in ("break_statement", "continue_statement"):
            return self.jump(n, pending)
        self.take_label()
        idx = self.new_from(STMT, n)
        self.connect(pending, idx)
        return [(idx, TRUE)]

    def if_stmt(self, n: Node, pending: Pending) -> Pending:
        self.take_label()
        cond, text = self.cond_text(n)
        idx = self.new(BRANCH, (cond,) if cond is not None else (), text, line_of(cond or n), end_line_of(cond or n))
        self.connect(pending, idx)
        then = n.child_by_field_name("consequence")
        other = n.child_by_field_name("alternative")
        out = self.stmt(then, [(idx, text)]) if then is not None else [(idx, text)]
        if other is not None:
            out = out + self.stmt(other, [(idx, negate(text))])
        else:
            out = out + [(idx, negate(text))]
        return out

    def loop_ctx(self) -> _Breakable:
        ctx = _Breakable("loop", self.take_label())
        self.ctx.append(ctx)
        return ctx

    def while_stmt(self, n: Node, pending: Pending) -> Pending:
        ctx = self.loop_ctx()
        cond, text = self.cond_text(n)
        head = self.new(LOOP, (cond,) if cond is not None else (), text, line_of(cond or n), end_line_of(cond or n))
        self.connect(pending, head)
        body = n.child_by_field_name("body")
        exits = self.stmt(body, [(head, text)]) if body is not None else [(head, text)]
        self.ctx.pop()
        self.connect(exits + ctx.continues, head, back=True)
        self.loop_writes[head] = frozenset(assigned_names(n))
        return [(head, negate(text))] + ctx.breaks

    def do_stmt(self, n: Node, pending: Pending) -> Pending:
        ctx = self.loop_ctx()
        first = len(self.nodes)
        body = n.child_by_field_name("body")
        exits = self.stmt(body, pending) if body is not None else pending
        self.ctx.pop()
        cond, text = self.cond_text(n)
        test = self.new(LOOP, (cond,) if cond is not None else (), text, line_of(cond or n), end_line_of(cond or n))
        self.connect(exits + ctx.continues, test)
        target = first if first < test else test
        self.edges.append(Edge(test, target, text, back=True))
        self.loop_writes[test] = frozenset(assigned_names(n))
        return [(test, negate(text))] + ctx.breaks

    def for_stmt(self, n: Node, pending: Pending) -> Pending:
        ctx = self.loop_ctx()
        for init in n.children_by_field_name("init"):
            idx = self.new_from(STMT, init)
            self.connect(pending, idx)
            pending = [(idx, TRUE)]
        cond, text = self.cond_text(n)
        head = self.new(LOOP, (cond,) if cond is not None else (), text,
                        line_of(cond or n), end_line_of(cond or n))
        self.connect(pending, head)
        body = n.child_by_field_name("body")
        exits = self.stmt(body, [(head, text)]) if body is not None else [(head, text)]
        self.ctx.pop()
        updates = n.children_by_field_name("update")
        if updates:
            upd = self.new(STMT, tuple(updates), ", ".join(node_text(u) for u in updates),
                           line_of(updates[0]), end_line_of(updates[-1]))
            self.connect(exits + ctx.continues, upd)
            self.edges.append(Edge(upd, head, TRUE, back=True))
        else:
            self.connect(exits + ctx.continues, head, back=True)
        self.loop_writes[head] = frozenset(assigned_names(n))
        return [(head, negate(text))] + ctx.breaks

    def foreach_stmt(self, n: Node, pending: Pending) -> Pending:
        ctx = self.loop_ctx()
        value = n.child_by_field_name("value")
        name = n.child_by_field_name("name")
        if value is None or value.has_error:
            raise CfgError(line_of(n), "malformed enhanced for header")
        typ = n.child_by_field_name("type")
        header = f"{node_text(typ) if typ else ''} {node_text(name) if name else ''} : {node_text(value)}"
        head = self.new(LOOP, (value,) + ((name,) if name is not None else ()), header, line_of(n), end_line_of(value))
        self.connect(pending, head)
        guard = f"hasNext({squash(node_text(value))})"
        body = n.child_by_field_name("body")
        exits = self.stmt(body, [(head, guard)]) if body is not None else [(head, guard)]
        self.ctx.pop()
        self.connect(exits + ctx.continues, head, back=True)
        self.loop_writes[head] = frozenset(assigned_names(n))
        return [(head, negate(guard))] + ctx.breaks

    def switch_stmt(self, n: Node, pending: Pending) -> Pending:
        ctx = _Breakable("switch", self.take_label())
        cond, subject = self.cond_text(n)
        head = self.new(BRANCH, (cond,) if cond is not None else (), f"switch ({subject})",
                        line_of(cond or n), end_line_of(cond or n))
        self.connect(pending, head)
        body = n.child_by_field_name("body")
        groups = [g for g in (body.named_children if body is not None else [])
                  if g.type in ("switch_block_statement_group", "switch_rule")]
        all_labels: list[str] = []
        has_default = False
        parsed = []
        for g in groups:
            labels, is_default = [], False
            for lab in (c for c in g.named_children if c.type == "switch_label"):
                if lab.named_child_count == 0:
                    is_default = True
                else:
                    labels.extend(squash(node_text(e)) for e in lab.named_children)
            all_labels.extend(labels)
            has_default = has_default or is_default
            parsed.append((g, labels, is_default))
        any_case = " || ".join(f"({subject}) == ({lab})" for lab in all_labels) or FALSE
        default_guard = negate(any_case)
        self.ctx.append(ctx)
        exits: Pending = []
        fall: Pending = []
        for g, labels, is_default in parsed:
            parts = [f"({subject}) == ({lab})" for lab in labels]
            guard = " || ".join(parts)
            if is_default:
                guard = f"({guard}) || ({default_guard})" if guard else default_guard
            entry: Pending = [(head, guard or FALSE)] + fall
            stmts = [c for c in g.named_children if c.type != "switch_label"]
            out = self.seq(stmts, entry)
            if g.type == "switch_rule":
                exits.extend(out)
                fall = []
            else:
                fall = out
        exits.extend(fall)
        self.ctx.pop()
        if not has_default:
            exits.append((head, default_guard))
        return exits + ctx.breaks

    def try_stmt(self, n: Node, pending: Pending) -> Pending:
        self.take_label()
        head = self.new(STMT, (), "try", line_of(n), line_of(n))
        self.connect(pending, head)
        cur: Pending = [(head, TRUE)]
        resources = n.child_by_field_name("resources")
        if resources is not None:
            for res in resources.named_children:
                idx = self.new_from(STMT, res)
                self.connect(cur, idx)
                cur = [(idx, TRUE)]
        body = n.child_by_field_name("body")
        exits = self.stmt(body, cur) if body is not None else cur
        finally_block = None
        for clause in n.named_children:
            if clause.type == "catch_clause":
                param = next((c for c in clause.named_children if c.type == "catch_formal_parameter"), None)
                types = ""
                if param is not None:
                    ct = next((c for c in param.named_children if c.type == "catch_type"), None)
                    types = squash(node_text(ct)) if ct is not None else ""
                idx = self.new(STMT, (param,) if param is not None else (), f"catch ({node_text(param) if param else ''})",
                               line_of(clause), line_of(clause))
                self.connect([(head, f"caught({types})")], idx)
                cbody = clause.child_by_field_name("body")
                exits = exits + (self.stmt(cbody, [(idx, TRUE)]) if cbody is not None else [(idx, TRUE)])
            elif clause.type == "finally_clause":
                finally_block = next((c for c in clause.named_children if c.type == "block"), None)
        if finally_block is not None:
            if not exits:
                exits = [(len(self.nodes) - 1, FALSE)]
            exits = self.stmt(finally_block, exits)
        return exits

    def jump(self, n: Node, pending: Pending) -> Pending:
        self.take_label()
        idx = self.new_from(JUMP, n)
        self.connect(pending, idx)
        label_node = next((c for c in n.named_children if c.type == "identifier"), None)
        label = node_text(label_node) if label_node is not None else None
        is_break = n.type == "break_statement"
        for ctx in reversed(self.ctx):
            if label is not None and ctx.label != label:
                continue
            if is_break and (label is not None or ctx.kind in ("loop", "switch")):
                ctx.breaks.append((idx, TRUE))
                return []
            if not is_break and ctx.kind == "loop":
                ctx.continues.append((idx, TRUE))
                return []
        # stray jump outside any target: treat as leaving the function
        self.to_exit.append((idx, TRUE))
        return []


def build_cfg(fn: FunctionInfo, tree: object = None) -> Cfg:
    """Build the CFG of one function; raises :class:`CfgError` on broken headers."""
    return _Builder(fn).build()


def iter_paths(cfg: Cfg, limit: int = 1024) -> Iterator[list[Edge]]:
    """Entry→exit simple paths, back-edges never followed."""
    path: list[Edge] = []
    count = 0

    def dfs(cur: int) -> Iterator[list[Edge]]:
        nonlocal count
        if cur == cfg.exit:
            count += 1
            yield list(path)
            return
        for e in cfg.successors(cur):
            if e.back or e.guard == FALSE or count >= limit:
                continue
            path.append(e)
            yield from dfs(e.dst)
            path.pop()

    yield from dfs(cfg.entry)
