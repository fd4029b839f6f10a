"""Line-annotated S-expression form of a syntax tree.

This is the wire format extractor programs read on standard input::

    (local_variable_declaration 9:9
      (integral_type 9:9 field=type "int")
      (variable_declarator 9:9 field=declarator
        (identifier 9:9 field=name "x")
        ("=" 9:9)
        ...))

Named node types are bare symbols, anonymous tokens are quoted and carry no
separate text.  Only named leaves carry their source text.  Comments and
zero-width recovery nodes are dropped.
"""

from __future__ import annotations

import json
from typing import Optional

from tree_sitter import Node

from .parsing import SyntaxTree, end_line_of, line_of, node_text


def _emit(node: Node, field_name: Optional[str], depth: int, out: list[str]) -> None:
    if node.is_missing or node.type in ("line_comment", "block_comment"):
        return
    head = node.type if node.is_named else json.dumps(node.type)
    parts = [f"{head} {line_of(node)}:{end_line_of(node)}"]
    if field_name:
        parts.append(f"field={field_name}")
    kids = [(c, node.field_name_for_child(i)) for i, c in enumerate(node.children)]
    kids = [(c, f) for c, f in kids if not c.is_missing and c.type not in ("line_comment", "block_comment")]
    if node.is_named and not kids:
        parts.append(json.dumps(node_text(node)))
    out.append("  " * depth + "(" + " ".join(parts))
    for child, fname in kids:
        _emit(child, fname, depth + 1, out)
    out[-1] += ")"


def serialize(tree: SyntaxTree | Node) -> str:
    root = tree.root if isinstance(tree, SyntaxTree) else tree
    out: list[str] = []
    _emit(root, None, 0, out)
    return "\n".join(out) + "\n"
