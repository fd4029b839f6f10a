"""Syntactic helpers over Java expression nodes.

Variables are recognised purely by position in the tree.  Without type
information a field access such as ``IO.staticTrue`` cannot be told apart
from ``obj.field``; the convention used throughout is that a capitalised
qualifier names a class and is not a variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Optional

from tree_sitter import Node

from .parsing import line_of, make_parser, node_text, walk

CALL_TYPES = ("method_invocation", "object_creation_expression", "explicit_constructor_invocation")
OPAQUE_TYPES = ("lambda_expression", "class_body", "method_reference", "annotation", "marker_annotation")
LITERAL_TYPES = (
    "decimal_integer_literal",
    "hex_integer_literal",
    "octal_integer_literal",
    "binary_integer_literal",
    "decimal_floating_point_literal",
    "hex_floating_point_literal",
    "true",
    "false",
    "null_literal",
    "string_literal",
    "character_literal",
    "text_block",
)


def unwrap(node: Node) -> Node:
    """Strip parentheses and casts, which never change which value flows."""
    while True:
        if node.type == "parenthesized_expression" and node.named_child_count:
            node = node.named_children[0]
        elif node.type == "cast_expression" and node.child_by_field_name("value") is not None:
            node = node.child_by_field_name("value")
        else:
            return node


def is_class_like(name: str) -> bool:
    return name[:1].isupper()


def expr_vars(node: Optional[Node]) -> list[tuple[str, int]]:
    """Variables whose value flows directly into ``node``.

    Calls are not descended into: their arguments belong to the call and
    their result is a fresh value.  Ordered by source position.
    """
    out: list[tuple[str, int]] = []
    if node is None:
        return out

    def visit(n: Node) -> None:
        t = n.type
        if t in CALL_TYPES or t in OPAQUE_TYPES:
            return
        if t == "identifier":
            out.append((node_text(n), line_of(n)))
            return
        if t == "field_access":
            obj = n.child_by_field_name("object")
            if obj is not None and not (obj.type == "identifier" and is_class_like(node_text(obj))):
                visit(obj)
            return
        if t in ("scoped_identifier", "type_identifier", "generic_type", "this", "super"):
            return
        if t == "cast_expression":
            value = n.child_by_field_name("value")
            if value is not None:
                visit(value)
            return
        if t == "instanceof_expression":
            left = n.child_by_field_name("left")
            if left is not None:
                visit(left)
            return
        for c in n.named_children:
            visit(c)

    visit(node)
    return out


def find_calls(node: Optional[Node]) -> list[Node]:
    """All call nodes under ``node`` (outermost first), skipping lambdas and bodies."""
    found: list[Node] = []
    if node is None:
        return found
    stack = [node]
    while stack:
        n = stack.pop()
        if n.type in OPAQUE_TYPES:
            continue
        if n.type in CALL_TYPES:
            found.append(n)
        stack.extend(reversed(n.named_children))
    found.sort(key=lambda c: c.start_byte)
    return found


def call_name(call: Node) -> str:
    if call.type == "method_invocation":
        name = call.child_by_field_name("name")
        return node_text(name) if name is not None else ""
    if call.type == "object_creation_expression":
        typ = call.child_by_field_name("type")
        return node_text(typ).split("<")[0].split(".")[-1] if typ is not None else ""
    # explicit_constructor_invocation: this(...) / super(...)
    ctor = call.child_by_field_name("constructor")
    return node_text(ctor) if ctor is not None else ""


def call_receiver(call: Node) -> Optional[str]:
    if call.type == "method_invocation":
        obj = call.child_by_field_name("object")
        return node_text(obj) if obj is not None else None
    return None


def call_args(call: Node) -> list[Node]:
    args = call.child_by_field_name("arguments")
    if args is None:
        return []
    return [a for a in args.named_children if a.type not in ("line_comment", "block_comment")]


@dataclass(frozen=True)
class Assignment:
    """``lhs op rhs``; ``rhs`` is None for ``x++`` style updates and bare declarations."""

    lhs: str
    op: str
    rhs: Optional[Node]
    line: int
    declared_type: Optional[str] = None

    @property
    def rhs_text(self) -> str:
        return node_text(self.rhs) if self.rhs is not None else ""

    @property
    def is_copy(self) -> bool:
        return (
            self.op == "="
            and self.rhs is not None
            and unwrap(self.rhs).type == "identifier"
        )


def assignments_in(node: Optional[Node]) -> list[Assignment]:
    """Assignments to plain local names, in evaluation order (rhs before lhs)."""
    out: list[Assignment] = []
    if node is None:
        return out

    def visit(n: Node) -> None:
        t = n.type
        if t in OPAQUE_TYPES:
            return
        if t == "local_variable_declaration":
            typ = n.child_by_field_name("type")
            tname = node_text(typ) if typ is not None else None
            for d in n.named_children:
                if d.type != "variable_declarator":
                    continue
                name = d.child_by_field_name("name")
                value = d.child_by_field_name("value")
                if value is not None:
                    visit(value)
                if name is not None:
                    out.append(Assignment(node_text(name), "=", value, line_of(d), tname))
            return
        if t == "assignment_expression":
            left = n.child_by_field_name("left")
            right = n.child_by_field_name("right")
            op = n.child_by_field_name("operator")
            if right is not None:
                visit(right)
            if left is not None and left.type == "identifier":
                out.append(Assignment(node_text(left), node_text(op) if op else "=", right, line_of(n)))
            elif left is not None:
                visit(left)
            return
        if t == "update_expression":
            target = next((c for c in n.named_children), None)
            if target is not None and target.type == "identifier":
                op = "++" if "++" in node_text(n) else "--"
                out.append(Assignment(node_text(target), op, None, line_of(n)))
            return
        for c in n.named_children:
            visit(c)

    visit(node)
    return out


def assigned_names(node: Optional[Node]) -> set[str]:
    names = {a.lhs for a in assignments_in(node)}
    if node is not None:
        stack = [node]
        while stack:
            n = stack.pop()
            if n.type in OPAQUE_TYPES:
                continue
            if n.type == "enhanced_for_statement":
                name = n.child_by_field_name("name")
                if name is not None:
                    names.add(node_text(name))
            stack.extend(n.named_children)
    return names


def identifiers(node: Node) -> Iterator[Node]:
    stack = [node]
    while stack:
        n = stack.pop()
        if n.type == "identifier":
            yield n
        stack.extend(n.children)


class ExpressionSyntaxError(ValueError):
    pass


_WRAP_HEAD = "class __X { Object __x() { return "
_WRAP_TAIL = "\n; } }"


@lru_cache(maxsize=4096)
def parse_expression(text: str) -> Node:
    """Parse one Java expression given as text, e.g. a branch condition."""
    tree = make_parser().parse((_WRAP_HEAD + text + _WRAP_TAIL).encode("utf-8"))
    if tree.root_node.has_error:
        raise ExpressionSyntaxError(f"not a Java expression: {text!r}")
    for node in walk(tree.root_node):
        if node.type == "return_statement" and node.named_child_count == 1:
            return node.named_children[0]
    raise ExpressionSyntaxError(f"not a Java expression: {text!r}")
