"""Skeleton that wraps every extractor program.

This module is self-contained: its source text is written verbatim in front
of the model-written ``extract(root)`` function and executed in the sandbox.
It reads the S-expression tree from standard input, calls ``extract`` and
prints one ``line<TAB>identifier`` per result.
"""

import json
import re
import sys

_TOKEN = re.compile(r'\s*(?:(\()|(\))|("(?:[^"\\]|\\.)*")|([^\s()"]+))')


class Node:
    __slots__ = ("type", "named", "line", "end_line", "field", "text", "children", "parent")

    def __init__(self, type_, named, line, end_line):
        self.type = type_
        self.named = named
        self.line = line
        self.end_line = end_line
        self.field = None
        self.text = None
        self.children = []
        self.parent = None

    def __repr__(self):
        return "Node(%s %d:%d)" % (self.type, self.line, self.end_line)

    @property
    def named_children(self):
        return [c for c in self.children if c.named]

    def child(self, field):
        """First child attached under ``field`` (or None)."""
        for c in self.children:
            if c.field == field:
                return c
        return None

    def children_by_field(self, field):
        return [c for c in self.children if c.field == field]

    def walk(self):
        """Pre-order traversal of this subtree."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def source(self):
        """Token text of the subtree, tokens joined without spaces except between words."""
        out = []
        for n in self.walk():
            if n.children:
                continue
            tok = n.text if n.named else n.type
            if out and tok and (out[-1][-1:].isalnum() or out[-1][-1:] == "_") and (tok[0].isalnum() or tok[0] == "_"):
                out.append(" ")
            out.append(tok or "")
        return "".join(out)

    def identifiers(self):
        return [n for n in self.walk() if n.type == "identifier"]

    def ancestors(self):
        cur = self.parent
        while cur is not None:
            yield cur
            cur = cur.parent


def parse_tree(text):
    """Parse the S-expression wire format into :class:`Node` objects."""
    pos = 0
    stack = []
    root = None
    while True:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        pos = m.end()
        opener, closer, string, atom = m.groups()
        if opener:
            stack.append([])
        elif closer:
            items = stack.pop()
            head = items[0]
            named = not head.startswith('"')
            type_ = json.loads(head) if not named else head
            start, end = items[1].split(":")
            node = Node(type_, named, int(start), int(end))
            for item in items[2:]:
                if isinstance(item, Node):
                    item.parent = node
                    node.children.append(item)
                elif item.startswith("field="):
                    node.field = item[len("field="):]
                else:
                    node.text = json.loads(item)
            if stack:
                stack[-1].append(node)
            else:
                root = node
        elif string:
            stack[-1].append(string)
        elif atom:
            stack[-1].append(atom)
    return root


def walk(node):
    return node.walk() if node is not None else iter(())


CALLS = ("method_invocation", "object_creation_expression")


def strip(node):
    """Drop parentheses and casts around an expression."""
    while node is not None:
        if node.type == "parenthesized_expression" and node.named_children:
            node = node.named_children[0]
        elif node.type == "cast_expression" and node.child("value") is not None:
            node = node.child("value")
        else:
            return node
    return node


def call_name(node):
    """Method name of a call, or the simple type name of ``new T(...)``."""
    if node.type == "method_invocation":
        name = node.child("name")
        return name.text if name is not None else ""
    if node.type == "object_creation_expression":
        typ = node.child("type")
        return typ.source().split("<")[0].split(".")[-1] if typ is not None else ""
    return ""


def call_arguments(node):
    args = node.child("arguments")
    return args.named_children if args is not None else []


def direct_identifiers(node):
    """Variables whose value flows straight into ``node``; calls are not entered."""
    out = []

    def visit(n):
        if n.type in CALLS or n.type in ("lambda_expression", "class_body", "method_reference"):
            return
        if n.type == "identifier":
            out.append(n)
            return
        if n.type == "field_access":
            obj = n.child("object")
            if obj is not None and not (obj.type == "identifier" and obj.text[:1].isupper()):
                visit(obj)
            return
        if n.type == "cast_expression":
            if n.child("value") is not None:
                visit(n.child("value"))
            return
        for c in n.named_children:
            if c.field != "type":
                visit(c)

    if node is not None:
        visit(node)
    return out


def assignments(root):
    """(target identifier node, value node) for every ``x = e`` and initialised declaration."""
    for n in root.walk():
        if n.type == "variable_declarator":
            name, value = n.child("name"), n.child("value")
            if name is not None and value is not None:
                yield name, value
        elif n.type == "assignment_expression":
            left, right = n.child("left"), n.child("right")
            op = n.child("operator")
            if left is not None and left.type == "identifier" and right is not None and (op is None or op.type == "="):
                yield left, right


def _ref(item):
    if isinstance(item, Node):
        return (item.line, item.text if item.text is not None else item.source())
    line, name = item
    return (int(line), str(name))


def _main():
    root = parse_tree(sys.stdin.read())
    found = extract(root) if root is not None else []
    refs = sorted(set(_ref(item) for item in (found or [])))
    for line, name in refs:
        sys.stdout.write("%d\t%s\n" % (line, name))


def _block_network():
    import socket

    def refuse(*args, **kwargs):
        raise OSError("network access is disabled for extractors")

    socket.socket = refuse
    socket.create_connection = refuse
    socket.getaddrinfo = refuse
