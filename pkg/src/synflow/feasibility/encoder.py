"""Deterministic SMT-LIB encoding of path information.

This is the encoding a competent synthesized validator would produce, and
the one the offline oracle backend answers with.  Each variable version of
each frame is one constant ``name__<frame>_<version>``.  Integer division
follows Java truncation through ``jdiv``/``jrem``, and every division that
executes asserts a non-zero divisor under the conditions that lead to it.
Calls other than ``Math.abs/min/max``, field reads and objects become fresh
unconstrained constants.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from ..paths import ASSIGN, BIND, GUARD, HAVOC, SINK, SOURCE, PathInfo, Step
from ..syntax.exprs import ExpressionSyntaxError, call_args, call_name, call_receiver, parse_expression
from ..syntax.parsing import node_text

INT, REAL, BOOL = "Int", "Real", "Bool"

PRELUDE = """(define-fun jdiv ((a Int) (b Int)) Int
  (ite (= (>= a 0) (> b 0)) (div (abs a) (abs b)) (- (div (abs a) (abs b)))))
(define-fun jrem ((a Int) (b Int)) Int (- a (* b (jdiv a b))))
"""

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
INTEGRAL_TYPES = {"int", "long", "short", "byte", "char", "Integer", "Long", "Short", "Byte"}
REAL_TYPES = {"float", "double", "Float", "Double"}
BOOL_TYPES = {"boolean", "Boolean"}


class EncodingError(ValueError):
    pass


def sort_of(declared: Optional[str], hint: str = INT) -> str:
    if declared in BOOL_TYPES:
        return BOOL
    if declared in REAL_TYPES:
        return REAL
    if declared is not None:
        return INT
    return hint


def int_lit(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


def real_lit(v: Fraction) -> str:
    num, den = abs(v.numerator), v.denominator
    text = f"{num}.0" if den == 1 else f"(/ {num}.0 {den}.0)"
    return text if v >= 0 else f"(- {text})"


def _frame_tag(frame: str) -> str:
    return frame.rsplit("#", 1)[-1] if "#" in frame else frame


class Encoder:
    def __init__(self, info: PathInfo):
        self.info = info
        self.types = info.type_map()
        self.versions: dict[tuple[str, str], int] = {}
        self.sorts: dict[str, str] = {}
        self.decls: list[str] = []
        self.asserts: list[str] = []
        self.fresh_count = 0
        self.ctx: list[str] = []
        self.frame = ""
        self.line = 0

    # -- symbols
    def declare(self, sym: str, sort: str) -> str:
        if sym not in self.sorts:
            self.sorts[sym] = sort
            self.decls.append(f"(declare-const {sym} {sort})")
        return sym

    def fresh(self, sort: str) -> tuple[str, str]:
        self.fresh_count += 1
        return self.declare(f"fresh_{self.fresh_count}", sort), sort

    def var_sort(self, frame: str, name: str, hint: str = INT) -> str:
        return sort_of(self.types.get((frame, name)), hint)

    def current(self, frame: str, name: str, hint: str = INT) -> tuple[str, str]:
        key = (frame, name)
        if key not in self.versions:
            self.versions[key] = 0
        sym = f"{name}__{_frame_tag(frame)}_{self.versions[key]}"
        existing = self.sorts.get(sym)
        sort = existing or self.var_sort(frame, name, hint)
        return self.declare(sym, sort), sort

    def bump(self, frame: str, name: str, sort: str) -> str:
        key = (frame, name)
        self.versions[key] = self.versions.get(key, -1) + 1
        return self.declare(f"{name}__{_frame_tag(frame)}_{self.versions[key]}", sort)

    # -- expressions
    def coerce(self, term: tuple[str, str], sort: str) -> str:
        text, have = term
        if have == sort:
            return text
        if have == INT and sort == REAL:
            return f"(to_real {text})"
        if have == REAL and sort == INT:
            return f"(ite (>= {text} 0.0) (to_int {text}) (- (to_int (- {text}))))"
        raise EncodingError(f"line {self.line}: cannot use a {have} value as {sort}")

    def arith(self, a: tuple[str, str], b: tuple[str, str]) -> tuple[str, str, str]:
        if BOOL in (a[1], b[1]):
            raise EncodingError(f"line {self.line}: arithmetic on a boolean")
        sort = REAL if REAL in (a[1], b[1]) else INT
        return self.coerce(a, sort), self.coerce(b, sort), sort

    def safe_divisor(self, divisor: str, sort: str) -> None:
        zero = "0.0" if sort == REAL else "0"
        cond = f"(not (= {divisor} {zero}))"
        if self.ctx:
            ctx = self.ctx[0] if len(self.ctx) == 1 else f"(and {' '.join(self.ctx)})"
            cond = f"(=> {ctx} {cond})"
        self.asserts.append(f"(assert {cond}) ; divisor on line {self.line}")

    def text(self, expr: str, frame: str, hint: str = INT) -> tuple[str, str]:
        try:
            node = parse_expression(expr)
        except ExpressionSyntaxError as exc:
            raise EncodingError(f"line {self.line}: {exc}") from exc
        saved = self.frame
        self.frame = frame
        try:
            return self.term(node, hint)
        finally:
            self.frame = saved

    def term(self, n, hint: str = INT) -> tuple[str, str]:
        t = n.type
        if t == "parenthesized_expression":
            return self.term(n.named_children[0], hint)
        if t == "identifier":
            return self.current(self.frame, node_text(n), hint)
        if t in ("decimal_integer_literal", "hex_integer_literal", "octal_integer_literal", "binary_integer_literal"):
            raw = node_text(n).replace("_", "").rstrip("lL")
            base = 16 if raw.lower().startswith("0x") else 2 if raw.lower().startswith("0b") else \
                8 if len(raw) > 1 and raw.startswith("0") else 10
            return int_lit(int(raw, base)), INT
        if t == "decimal_floating_point_literal":
            return real_lit(Fraction(node_text(n).rstrip("fFdD"))), REAL
        if t == "true":
            return "true", BOOL
        if t == "false":
            return "false", BOOL
        if t == "null_literal":
            return self.declare("null_ref", INT), INT
        if t == "character_literal":
            body = node_text(n)[1:-1]
            return (int_lit(ord(body)), INT) if len(body) == 1 else self.fresh(INT)
        if t == "field_access":
            text = "".join(node_text(n).split())
            if text in INT_CONSTANTS:
                return int_lit(INT_CONSTANTS[text]), INT
            return self.fresh(hint)
        if t == "method_invocation":
            return self.call(n, hint)
        if t == "instanceof_expression":
            return self.fresh(BOOL)
        if t in ("string_literal", "object_creation_expression", "array_creation_expression",
                 "array_access", "lambda_expression", "method_reference"):
            return self.fresh(hint if t == "array_access" else INT)
        if t == "cast_expression":
            inner = self.term(n.child_by_field_name("value"), hint)
            target = node_text(n.child_by_field_name("type"))
            if target in INTEGRAL_TYPES and inner[1] == REAL:
                return self.coerce(inner, INT), INT
            if target in REAL_TYPES and inner[1] == INT:
                return self.coerce(inner, REAL), REAL
            return inner
        if t == "unary_expression":
            op = node_text(n.child_by_field_name("operator"))
            if op == "!":
                inner = self.term(n.child_by_field_name("operand"), BOOL)
                return f"(not {self.coerce(inner, BOOL)})", BOOL
            inner = self.term(n.child_by_field_name("operand"), INT)
            if inner[1] == BOOL:
                raise EncodingError(f"line {self.line}: '{op}' on a boolean")
            if op == "-":
                return f"(- {inner[0]})", inner[1]
            if op == "+":
                return inner
            return self.fresh(inner[1])
        if t == "binary_expression":
            return self.binary(n)
        if t == "ternary_expression":
            cond = self.coerce(self.term(n.child_by_field_name("condition"), BOOL), BOOL)
            self.ctx.append(cond)
            a = self.term(n.child_by_field_name("consequence"), hint)
            self.ctx[-1] = f"(not {cond})"
            b = self.term(n.child_by_field_name("alternative"), hint)
            self.ctx.pop()
            if a[1] == b[1]:
                return f"(ite {cond} {a[0]} {b[0]})", a[1]
            x, y, sort = self.arith(a, b)
            return f"(ite {cond} {x} {y})", sort
        raise EncodingError(f"line {self.line}: unsupported expression {t}: {node_text(n)!r}")

    def call(self, n, hint: str) -> tuple[str, str]:
        name = call_name(n)
        args = call_args(n)
        if call_receiver(n) == "Math" and name in ("abs", "min", "max"):
            terms = [self.term(a, INT) for a in args]
            if name == "abs" and len(terms) == 1:
                x, sort = terms[0]
                zero = "0.0" if sort == REAL else "0"
                return f"(ite (>= {x} {zero}) {x} (- {x}))", sort
            if len(terms) == 2:
                a, b, sort = self.arith(*terms)
                cmp = "<=" if name == "min" else ">="
                return f"(ite ({cmp} {a} {b}) {a} {b})", sort
        return self.fresh(hint)

    def binary(self, n) -> tuple[str, str]:
        op = node_text(n.child_by_field_name("operator"))
        ln, rn = n.child_by_field_name("left"), n.child_by_field_name("right")
        if op in ("&&", "||"):
            left = self.coerce(self.term(ln, BOOL), BOOL)
            self.ctx.append(left if op == "&&" else f"(not {left})")
            right = self.coerce(self.term(rn, BOOL), BOOL)
            self.ctx.pop()
            return f"({'and' if op == '&&' else 'or'} {left} {right})", BOOL
        a = self.term(ln, BOOL if op in ("&", "|", "^") else INT)
        b = self.term(rn, BOOL if op in ("&", "|", "^") else INT)
        if op in ("==", "!="):
            if a[1] == b[1]:
                eq = f"(= {a[0]} {b[0]})"
            else:
                x, y, _ = self.arith(a, b)
                eq = f"(= {x} {y})"
            return (eq if op == "==" else f"(not {eq})"), BOOL
        if op in ("&", "|", "^"):
            if a[1] == BOOL and b[1] == BOOL:
                fn = {"&": "and", "|": "or", "^": "xor"}[op]
                return f"({fn} {a[0]} {b[0]})", BOOL
            return self.fresh(INT)
        if op in ("<<", ">>", ">>>"):
            return self.fresh(INT)
        x, y, sort = self.arith(a, b)
        if op in ("+", "-", "*"):
            return f"({op} {x} {y})", sort
        if op in ("<", "<=", ">", ">="):
            return f"({op} {x} {y})", BOOL
        if op in ("/", "%"):
            self.safe_divisor(y, sort)
            if sort == INT:
                return f"({'jdiv' if op == '/' else 'jrem'} {x} {y})", INT
            if op == "/":
                return f"(/ {x} {y})", REAL
            return f"(- {x} (* {y} (to_real (ite (>= (/ {x} {y}) 0.0) (to_int (/ {x} {y})) (- (to_int (- (/ {x} {y}))))))))", REAL
        raise EncodingError(f"line {self.line}: unsupported operator {op}")

    # -- steps
    def condition(self, expr: str, frame: str) -> str:
        return self.coerce(self.text(expr, frame, BOOL), BOOL)

    def step(self, s: Step) -> None:
        self.line = s.line
        note = f" ; {s.kind} [{s.frame}] line {s.line}"
        if s.kind in (SOURCE, SINK):
            if s.expr:
                self.asserts.append(f"(assert {self.condition(s.expr, s.frame)}){note}")
            return
        if s.kind == GUARD:
            cond = self.condition(s.expr, s.frame)
            self.asserts.append(f"(assert {cond if s.taken else f'(not {cond})'}){note}")
            return
        sort = self.var_sort(s.frame, s.target)
        if s.kind == HAVOC:
            self.bump(s.frame, s.target, sort)
            return
        if s.kind == BIND:
            value = self.text(s.expr, s.source_frame, sort)
            sort = sort if (s.frame, s.target) in self.types else value[1]
            rhs = self.coerce(value, sort)
            self.asserts.append(f"(assert (= {self.bump(s.frame, s.target, sort)} {rhs})){note}")
            return
        if s.kind != ASSIGN:
            raise EncodingError(f"unknown step kind {s.kind}")
        if s.op in ("++", "--"):
            old = self.current(s.frame, s.target, sort)
            one = "1.0" if old[1] == REAL else "1"
            rhs = f"({'+' if s.op == '++' else '-'} {old[0]} {one})"
            sort = old[1]
        elif not s.expr:
            self.bump(s.frame, s.target, sort)
            return
        elif s.op == "=":
            value = self.text(s.expr, s.frame, sort)
            if (s.frame, s.target) not in self.types:
                sort = value[1]
            rhs = self.coerce(value, sort)
        else:
            base = s.op[:-1]
            if base not in ("+", "-", "*", "/", "%", "&", "|", "^"):
                raise EncodingError(f"line {s.line}: unsupported assignment operator {s.op}")
            value = self.text(f"({s.target}) {base} ({s.expr})", s.frame, sort)
            rhs = self.coerce(value, sort) if value[1] != BOOL or sort == BOOL else value[0]
        self.asserts.append(f"(assert (= {self.bump(s.frame, s.target, sort)} {rhs})){note}")

    def program(self) -> str:
        for s in self.info.steps:
            self.step(s)
        body = "\n".join(self.decls + self.asserts)
        return f"; path {self.info.path_id}\n{PRELUDE}{body}\n"


def encode_path(info: PathInfo) -> str:
    """SMT-LIB 2 assertions whose satisfiability is the feasibility of the path."""
    return Encoder(info).program()
