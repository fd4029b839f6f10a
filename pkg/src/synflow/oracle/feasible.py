"""Path feasibility by exhaustive search over a small integer domain.

Steps of a :class:`~synflow.paths.PathInfo` are executed in order.  Values
nobody assigned (parameters of the first frame, havocked variables, call
results, field reads) are free; each is bound lazily to every value of the
domain the first time it is read.  A path is feasible when some binding
passes every guard and assumption without dividing by zero.  Feasible
verdicts are exact; infeasible ones are exact only relative to the domain.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from ..paths import ASSIGN, BIND, GUARD, HAVOC, SINK, SOURCE, PathInfo, Step
from ..syntax.exprs import ExpressionSyntaxError, call_args, call_name, call_receiver, parse_expression
from ..syntax.parsing import node_text

INT_CONSTANTS = {
    "Integer.MIN_VALUE": -(2**31),
    "Integer.MAX_VALUE": 2**31 - 1,
    "Long.MIN_VALUE": -(2**63),
    "Long.MAX_VALUE": 2**63 - 1,
    "Short.MIN_VALUE": -(2**15),
    "Short.MAX_VALUE": 2**15 - 1,
    "Byte.MIN_VALUE": -(2**7),
    "Byte.MAX_VALUE": 2**7 - 1,
}
REAL_TYPES = {"float", "double", "Float", "Double"}
BOOL_TYPES = {"boolean", "Boolean"}


class UnsupportedPath(ValueError):
    pass


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Opaque:
    """A non-numeric value such as a string or an object; equal only to itself."""

    label: str


@dataclass(frozen=True)
class Free:
    key: tuple
    kind: str


class _Need(Exception):
    def __init__(self, free: Free):
        self.free = free


class _Pruned(Exception):
    pass


def _int_literal(text: str) -> int:
    t = text.replace("_", "").rstrip("lL")
    if t.lower().startswith("0x"):
        return int(t, 16)
    if t.lower().startswith("0b"):
        return int(t, 2)
    if len(t) > 1 and t.startswith("0"):
        return int(t, 8)
    return int(t)


def _trunc_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _num(v):
    if isinstance(v, bool) or not isinstance(v, (int, Fraction)):
        raise UnsupportedPath(f"arithmetic on non-numeric value {v!r}")
    return v


class _Evaluator:
    def __init__(self, env: Mapping[str, Mapping[str, object]], free: Mapping[tuple, object],
                 frame: str, step: int, types: Mapping[tuple[str, str], str]):
        self.env = env
        self.free = free
        self.frame = frame
        self.step = step
        self.types = types

    def resolve(self, value):
        if isinstance(value, Free):
            if value.key not in self.free:
                raise _Need(value)
            return self.free[value.key]
        return value

    def fresh(self, node, kind: str):
        return self.resolve(Free(("expr", self.step, self.frame, node.start_byte), kind))

    def lookup(self, name: str, kind: str):
        scope = self.env.get(self.frame, {})
        if name in scope:
            return self.resolve(scope[name])
        return self.resolve(Free(("init", self.frame, name), var_kind(self.types.get((self.frame, name)), kind)))

    def eval_text(self, text: str, kind: str = "num"):
        try:
            node = parse_expression(text)
        except ExpressionSyntaxError as exc:
            raise UnsupportedPath(str(exc)) from exc
        return self.eval(node, kind)

    def eval(self, n, kind: str = "num"):
        t = n.type
        if t == "parenthesized_expression":
            return self.eval(n.named_children[0], kind)
        if t == "identifier":
            return self.lookup(node_text(n), kind)
        if t in ("decimal_integer_literal", "hex_integer_literal", "octal_integer_literal", "binary_integer_literal"):
            return _int_literal(node_text(n))
        if t == "decimal_floating_point_literal":
            return Fraction(node_text(n).rstrip("fFdD"))
        if t == "true":
            return True
        if t == "false":
            return False
        if t == "null_literal":
            return Opaque("null")
        if t == "string_literal":
            return Opaque(node_text(n))
        if t == "character_literal":
            body = node_text(n)[1:-1]
            return ord(body) if len(body) == 1 else Opaque(body)
        if t == "field_access":
            text = "".join(node_text(n).split())
            if text in INT_CONSTANTS:
                return INT_CONSTANTS[text]
            return self.fresh(n, kind)
        if t == "method_invocation":
            return self.call(n, kind)
        if t in ("object_creation_expression", "array_creation_expression", "lambda_expression"):
            return Opaque(f"new@{self.step}:{n.start_byte}")
        if t in ("array_access", "instanceof_expression"):
            return self.fresh(n, "bool" if t == "instanceof_expression" else kind)
        if t == "cast_expression":
            value = self.eval(n.child_by_field_name("value"), kind)
            target = node_text(n.child_by_field_name("type"))
            if target in ("int", "long", "short", "byte") and isinstance(value, Fraction):
                return int(value)
            if target in REAL_TYPES and isinstance(value, int) and not isinstance(value, bool):
                return Fraction(value)
            return value
        if t == "unary_expression":
            op = node_text(n.child_by_field_name("operator"))
            if op == "!":
                v = self.eval(n.child_by_field_name("operand"), "bool")
                if not isinstance(v, bool):
                    raise UnsupportedPath("'!' applied to a non-boolean")
                return not v
            v = _num(self.eval(n.child_by_field_name("operand"), "num"))
            if op == "-":
                return -v
            if op == "+":
                return v
            if op == "~" and isinstance(v, int):
                return ~v
            raise UnsupportedPath(f"unary operator {op}")
        if t == "binary_expression":
            return self.binary(n)
        if t == "ternary_expression":
            cond = self.eval(n.child_by_field_name("condition"), "bool")
            branch = "consequence" if cond else "alternative"
            return self.eval(n.child_by_field_name(branch), kind)
        raise UnsupportedPath(f"unsupported expression {t}: {node_text(n)!r}")

    def call(self, n, kind: str):
        name = call_name(n)
        if call_receiver(n) == "Math" and name in ("abs", "min", "max"):
            args = [_num(self.eval(a, "num")) for a in call_args(n)]
            if name == "abs" and len(args) == 1:
                return abs(args[0])
            if len(args) == 2:
                return min(args) if name == "min" else max(args)
        return self.fresh(n, kind)

    def binary(self, n):
        op = node_text(n.child_by_field_name("operator"))
        left_node, right_node = n.child_by_field_name("left"), n.child_by_field_name("right")
        if op in ("&&", "||"):
            left = self.eval(left_node, "bool")
            if not isinstance(left, bool):
                raise UnsupportedPath(f"'{op}' applied to a non-boolean")
            if (op == "&&" and not left) or (op == "||" and left):
                return left
            right = self.eval(right_node, "bool")
            if not isinstance(right, bool):
                raise UnsupportedPath(f"'{op}' applied to a non-boolean")
            return right
        hint = "bool" if op in ("&", "|", "^") else "num"
        left = self.eval(left_node, hint)
        right = self.eval(right_node, hint)
        if op in ("==", "!="):
            if isinstance(left, bool) != isinstance(right, bool):
                raise UnsupportedPath("comparison between boolean and non-boolean")
            same = left == right
            return same if op == "==" else not same
        if op == "+" and (isinstance(left, Opaque) or isinstance(right, Opaque)):
            return Opaque(f"concat@{self.step}:{n.start_byte}")
        if op in ("&", "|", "^") and isinstance(left, bool) and isinstance(right, bool):
            return {"&": left and right, "|": left or right, "^": left != right}[op]
        a, b = _num(left), _num(right)
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op in ("/", "%"):
            if b == 0:
                raise _Pruned()
            if isinstance(a, int) and isinstance(b, int):
                q = _trunc_div(a, b)
                return q if op == "/" else a - b * q
            q = Fraction(a) / Fraction(b)
            return q if op == "/" else a - b * int(q)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        if isinstance(a, int) and isinstance(b, int):
            if op == "&":
                return a & b
            if op == "|":
                return a | b
            if op == "^":
                return a ^ b
            if op == "<<":
                return a << b
            if op == ">>":
                return a >> b
        raise UnsupportedPath(f"binary operator {op}")


def var_kind(declared: Optional[str], hint: str = "num") -> str:
    if declared in BOOL_TYPES:
        return "bool"
    if declared is not None:
        return "num"
    return hint


def _coerce(value, declared: Optional[str]):
    if declared in REAL_TYPES and isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    return value


_COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "%=": "%", "&=": "&", "|=": "|", "^=": "^"}


class _Search:
    def __init__(self, info: PathInfo, domain: tuple[int, int], budget: int):
        self.steps = info.steps
        self.types = info.type_map()
        self.domain = domain
        self.budget = budget
        self.visits = 0
        self.witness: Optional[dict] = None

    def values_for(self, free: Free) -> list:
        if free.kind == "bool":
            return [False, True]
        lo, hi = self.domain
        return list(range(lo, hi + 1))

    def apply(self, index: int, step: Step, env: dict, free: dict) -> Optional[dict]:
        ev = _Evaluator(env, free, step.frame, index, self.types)
        declared = self.types.get((step.frame, step.target))
        if step.kind in (SOURCE, SINK, GUARD):
            if not step.expr:
                return env
            value = ev.eval_text(step.expr, "bool")
            if not isinstance(value, bool):
                raise UnsupportedPath(f"condition {step.expr!r} is not boolean")
            expected = step.taken if step.kind == GUARD else True
            return env if value == expected else None
        scope = dict(env.get(step.frame, {}))
        if step.kind == HAVOC:
            scope[step.target] = Free(("havoc", index, step.frame, step.target), var_kind(declared))
        elif step.kind == BIND:
            src = _Evaluator(env, free, step.source_frame, index, self.types)
            value = src.eval_text(step.expr, var_kind(declared))
            scope[step.target] = _coerce(value, declared)
        elif step.kind == ASSIGN:
            if step.op in ("++", "--"):
                cur = _num(ev.lookup(step.target, "num"))
                scope[step.target] = cur + (1 if step.op == "++" else -1)
            elif not step.expr:
                scope[step.target] = Free(("decl", index, step.frame, step.target), var_kind(declared))
            elif step.op == "=":
                scope[step.target] = _coerce(ev.eval_text(step.expr, var_kind(declared)), declared)
            elif step.op in _COMPOUND:
                text = f"({step.target}) {_COMPOUND[step.op]} ({step.expr})"
                value = ev.eval_text(text, var_kind(declared))
                if declared in ("int", "long", "short", "byte") and isinstance(value, Fraction):
                    value = int(value)
                scope[step.target] = value
            else:
                raise UnsupportedPath(f"assignment operator {step.op}")
        else:
            raise UnsupportedPath(f"unknown step kind {step.kind}")
        out = dict(env)
        out[step.frame] = scope
        return out

    def run(self, index: int, env: dict, free: dict) -> bool:
        self.visits += 1
        if self.visits > self.budget:
            raise SearchBudgetExceeded(f"more than {self.budget} search states")
        if index == len(self.steps):
            self.witness = dict(free)
            return True
        try:
            nxt = self.apply(index, self.steps[index], env, free)
        except _Need as need:
            return any(
                self.run(index, env, {**free, need.free.key: v}) for v in self.values_for(need.free)
            )
        except _Pruned:
            return False
        if nxt is None:
            return False
        return self.run(index + 1, nxt, free)


def oracle_feasible(info: PathInfo, domain: tuple[int, int] = (-8, 8), budget: int = 200_000) -> bool:
    return _Search(info, domain, budget).run(0, {}, {})


def oracle_witness(info: PathInfo, domain: tuple[int, int] = (-8, 8), budget: int = 200_000) -> Optional[dict]:
    """The free-value binding that makes the path feasible, or None."""
    search = _Search(info, domain, budget)
    return search.witness if search.run(0, {}, {}) else None
