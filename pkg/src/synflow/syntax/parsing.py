"""Compilation-free parsing of Java sources.

Parsing is delegated to tree-sitter, which always yields a concrete syntax
tree, even for files with missing braces or unresolved imports.  Regions the
grammar could not make sense of show up as ERROR or MISSING nodes and are
recorded on the :class:`SyntaxTree` so later phases can tell degraded input
apart from clean input.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional

import tree_sitter_java
from tree_sitter import Language, Node, Parser

LANGUAGE_TAG = "java"
SOURCE_EXTENSIONS = (".java",)

FUNCTION_NODE_TYPES = ("method_declaration", "constructor_declaration")
CLASS_NODE_TYPES = (
    "class_declaration",
    "interface_declaration",
    "enum_declaration",
    "record_declaration",
)


class ParseError(Exception):
    """Raised only when the input cannot be decoded as text."""


@lru_cache(maxsize=1)
def java_language() -> Language:
    return Language(tree_sitter_java.language())


def make_parser() -> Parser:
    return Parser(java_language())


@dataclass(frozen=True)
class SourceUnit:
    path: str
    text: str
    language: str = LANGUAGE_TAG

    @property
    def lines(self) -> list[str]:
        return self.text.split("\n")

    def line_text(self, line: int) -> str:
        lines = self.lines
        if 1 <= line <= len(lines):
            return lines[line - 1]
        return ""


@dataclass(frozen=True, eq=False)
class FunctionInfo:
    """A method or constructor found in a unit.

    ``start_line``/``end_line`` cover the whole declaration; the header is
    ``start_line..body_line`` and every parameter is declared there.
    """

    name: str
    qualified_name: str
    params: tuple[tuple[str, int], ...]
    param_types: tuple[str, ...]
    start_line: int
    body_line: int
    end_line: int
    unit: str
    node: Node = field(repr=False, compare=False)

    @property
    def id(self) -> str:
        return f"{self.unit}:{self.qualified_name}@{self.start_line}"

    @property
    def arity(self) -> int:
        return len(self.params)

    def text(self, unit: SourceUnit) -> str:
        return "\n".join(unit.lines[self.start_line - 1:self.end_line])

    def numbered_text(self, unit: SourceUnit) -> str:
        lines = unit.lines
        return "\n".join(
            f"{n}: {lines[n - 1]}" for n in range(self.start_line, self.end_line + 1)
        )

    def __hash__(self) -> int:
        return hash(self.id)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, FunctionInfo) and other.id == self.id


@dataclass(frozen=True, eq=False)
class SyntaxTree:
    unit: SourceUnit
    root: Node = field(repr=False)
    functions: tuple[FunctionInfo, ...]
    error_lines: tuple[int, ...]
    tree: object = field(default=None, repr=False)

    @property
    def has_errors(self) -> bool:
        return bool(self.error_lines)

    def function_named(self, name: str) -> list[FunctionInfo]:
        return [f for f in self.functions if f.name == name or f.qualified_name == name]

    def function_at(self, line: int) -> Optional[FunctionInfo]:
        best = None
        for fn in self.functions:
            if fn.start_line <= line <= fn.end_line:
                if best is None or fn.start_line >= best.start_line:
                    best = fn
        return best


def line_of(node: Node) -> int:
    return node.start_point[0] + 1


def end_line_of(node: Node) -> int:
    return node.end_point[0] + 1


def node_text(node: Node) -> str:
    return node.text.decode("utf-8", errors="replace") if node.text is not None else ""


def walk(node: Node) -> Iterator[Node]:
    stack = [node]
    while stack:
        cur = stack.pop()
        yield cur
        stack.extend(reversed(cur.children))


def _error_lines(root: Node) -> tuple[int, ...]:
    if not root.has_error:
        return ()
    lines = set()
    stack = [root]
    while stack:
        cur = stack.pop()
        if cur.is_error or cur.is_missing:
            lines.add(line_of(cur))
            continue
        if cur.has_error:
            stack.extend(cur.children)
    return tuple(sorted(lines))


def _enclosing_names(node: Node) -> list[str]:
    names = []
    cur = node.parent
    while cur is not None:
        if cur.type in CLASS_NODE_TYPES:
            name = cur.child_by_field_name("name")
            if name is not None:
                names.append(node_text(name))
        elif cur.type == "object_creation_expression":
            names.append("<anon>")
        cur = cur.parent
    return list(reversed(names))


def _function_info(node: Node, unit: SourceUnit) -> Optional[FunctionInfo]:
    name_node = node.child_by_field_name("name")
    body = node.child_by_field_name("body")
    if name_node is None:
        return None
    params: list[tuple[str, int]] = []
    types: list[str] = []
    plist = node.child_by_field_name("parameters")
    if plist is not None:
        for p in plist.named_children:
            if p.type not in ("formal_parameter", "spread_parameter"):
                continue
            pname = p.child_by_field_name("name")
            if pname is None:
                # spread_parameter keeps its name inside a variable_declarator
                decl = next((c for c in p.named_children if c.type == "variable_declarator"), None)
                pname = decl.child_by_field_name("name") if decl is not None else None
            if pname is None:
                continue
            ptype = p.child_by_field_name("type")
            params.append((node_text(pname), line_of(pname)))
            types.append(node_text(ptype) if ptype is not None else "")
    name = node_text(name_node)
    qual = ".".join(_enclosing_names(node) + [name])
    return FunctionInfo(
        name=name,
        qualified_name=qual,
        params=tuple(params),
        param_types=tuple(types),
        start_line=line_of(node),
        body_line=line_of(body) if body is not None else end_line_of(node),
        end_line=end_line_of(node),
        unit=unit.path,
        node=node,
    )


def parse_unit(path: str, text: str | bytes) -> SyntaxTree:
    """Parse one file; never fails on malformed code, only on undecodable bytes."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"{path}: not valid UTF-8 ({exc.reason} at byte {exc.start})") from exc
    unit = SourceUnit(path=path, text=text)
    tree = make_parser().parse(text.encode("utf-8"))
    root = tree.root_node
    functions = []
    for node in walk(root):
        if node.type in FUNCTION_NODE_TYPES:
            info = _function_info(node, unit)
            if info is not None:
                functions.append(info)
    functions.sort(key=lambda f: (f.start_line, f.qualified_name))
    return SyntaxTree(
        unit=unit, root=root, functions=tuple(functions), error_lines=_error_lines(root), tree=tree
    )


def discover_sources(root: str, extensions: tuple[str, ...] = SOURCE_EXTENSIONS) -> list[str]:
    """All files under ``root`` with a matching extension, sorted for determinism."""
    found = []
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            if name.endswith(extensions):
                found.append(os.path.join(dirpath, name))
    return found


def load_unit(path: str, relative_to: Optional[str] = None) -> SyntaxTree:
    with open(path, "rb") as fh:
        data = fh.read()
    label = os.path.relpath(path, relative_to) if relative_to else path
    return parse_unit(label, data)
