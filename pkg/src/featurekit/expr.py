"""Statically typed expression language for per-feature compute programs.

Grammar (loosest to tightest binding): or, and, not, comparisons
(== != < <= > >=), + -, * /, unary -, ^ (right-associative). Identifiers
are [a-zA-Z_][a-zA-Z0-9_]*; calls use f(a, b); (e1, ..., ek) builds a
result tuple. Variables are scalars unless declared as arrays at compile
time. Arithmetic follows IEEE semantics: division by zero and domain
errors produce inf/nan, which propagate instead of raising.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Any, Callable

from .errors import ExpressionSyntaxError, ExpressionTypeError, UnknownFunction

SCALAR = "scalar"
BOOL = "bool"
ARRAY = "array"


def _tuple_type(k: int) -> str:
    return f"tuple[{k}]"


# -- lexer -------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)
  | (?P<ident>[a-zA-Z_][a-zA-Z0-9_]*)
  | (?P<op><=|>=|==|!=|[+\-*/^<>(),])
  | (?P<ws>\s+)
""", re.VERBOSE)


def _tokenize(source: str):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExpressionSyntaxError(
                f"unexpected character {source[pos]!r}", pos)
        if m.lastgroup == "num":
            tokens.append(("num", float(m.group()), pos))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group(), pos))
        elif m.lastgroup == "op":
            tokens.append(("op", m.group(), pos))
        pos = m.end()
    tokens.append(("end", None, len(source)))
    return tokens


# -- AST ------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: Any


@dataclass(frozen=True)
class Binary:
    op: str
    left: Any
    right: Any


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class TupleNode:
    elements: tuple


_BIN_PRECEDENCE = {
    "or": 10, "and": 20,
    "==": 40, "!=": 40, "<": 40, "<=": 40, ">": 40, ">=": 40,
    "+": 50, "-": 50, "*": 60, "/": 60, "^": 80,
}
_UNARY_MINUS_BP = 70
_NOT_BP = 30


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def advance(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect_op(self, op: str):
        kind, value, pos = self.advance()
        if kind != "op" or value != op:
            raise ExpressionSyntaxError(f"expected {op!r}", pos)

    def parse(self):
        expr = self.expression(0)
        kind, value, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected {value!r}", pos)
        return expr

    def expression(self, min_bp: int):
        left = self.prefix()
        while True:
            kind, value, _ = self.peek()
            op = value if kind == "op" else (
                value if kind == "ident" and value in ("and", "or") else None)
            if op is None or op not in _BIN_PRECEDENCE:
                break
            bp = _BIN_PRECEDENCE[op]
            if bp < min_bp:
                break
            self.advance()
            # ^ is right-associative, everything else left
            right = self.expression(bp if op == "^" else bp + 1)
            left = Binary(op, left, right)
        return left

    def prefix(self):
        kind, value, pos = self.advance()
        if kind == "num":
            return Num(value)
        if kind == "op" and value == "-":
            return Unary("-", self.expression(_UNARY_MINUS_BP))
        if kind == "op" and value == "(":
            first = self.expression(0)
            elements = [first]
            while self.peek()[:2] == ("op", ","):
                self.advance()
                elements.append(self.expression(0))
            self.expect_op(")")
            if len(elements) == 1:
                return first
            return TupleNode(tuple(elements))
        if kind == "ident":
            if value == "not":
                return Unary("not", self.expression(_NOT_BP))
            if self.peek()[:2] == ("op", "("):
                self.advance()
                args = []
                if self.peek()[:2] != ("op", ")"):
                    args.append(self.expression(0))
                    while self.peek()[:2] == ("op", ","):
                        self.advance()
                        args.append(self.expression(0))
                self.expect_op(")")
                return Call(value, tuple(args))
            return Var(value)
        raise ExpressionSyntaxError(f"unexpected {value!r}", pos)


# -- IEEE-flavored primitives ------------------------------------------------------

def _ieee_div(a: float, b: float) -> float:
    try:
        return a / b
    except ZeroDivisionError:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf,
                             math.copysign(1.0, a) * math.copysign(1.0, b))


def _ieee_pow(a: float, b: float) -> float:
    try:
        r = a ** b
    except ZeroDivisionError:
        return math.inf
    except OverflowError:
        return math.inf
    if isinstance(r, complex):
        return math.nan
    return r


def _safe_sqrt(a):
    return math.sqrt(a) if a >= 0 else math.nan


def _safe_log(a):
    if math.isnan(a) or a < 0:
        return math.nan
    if a == 0:
        return -math.inf
    return math.log(a)


def _safe_floor(a):
    return float(math.floor(a)) if math.isfinite(a) else a


def _array_sum(v):
    total = 0.0
    for x in v:
        total += x
    return total


def _array_mean(v):
    return _array_sum(v) / len(v) if v else math.nan


def _dot(u, v):
    if len(u) != len(v):
        return math.nan
    total = 0.0
    for a, b in zip(u, v):
        total += a * b
    return total


def _at(v, i):
    k = int(i)
    if not math.isfinite(i) or k != i or not 0 <= k < len(v):
        return math.nan
    return v[k]


def linfit(xs, ys) -> tuple[float, float]:
    """Closed-form least squares (slope, intercept).

    slope = (n*Sxy - Sx*Sy) / (n*Sxx - Sx^2), intercept = (Sy - slope*Sx)/n,
    evaluated in the algebraically identical mean-centered arrangement,
    which avoids catastrophic cancellation in the denominator.
    """
    n = len(xs)
    if n < 2 or len(ys) != n:
        return math.nan, math.nan
    mean_x = _array_sum(xs) / n
    mean_y = _array_sum(ys) / n
    num = den = 0.0
    for x, y in zip(xs, ys):
        dx = x - mean_x
        num += dx * (y - mean_y)
        den += dx * dx
    if den == 0.0:
        return math.nan, math.nan
    slope = num / den
    intercept = mean_y - slope * mean_x
    return slope, intercept


# signature: (argument types) -> result type, implementation
_BUILTINS: dict[str, tuple[tuple[str, ...], str, Callable]] = {
    "sqrt": ((SCALAR,), SCALAR, _safe_sqrt),
    "abs": ((SCALAR,), SCALAR, abs),
    "exp": ((SCALAR,), SCALAR, lambda a: math.exp(a) if a < 700 else math.inf),
    "log": ((SCALAR,), SCALAR, _safe_log),
    "floor": ((SCALAR,), SCALAR, _safe_floor),
    "min": ((SCALAR, SCALAR), SCALAR, min),
    "max": ((SCALAR, SCALAR), SCALAR, max),
    "pow": ((SCALAR, SCALAR), SCALAR, _ieee_pow),
    "len": ((ARRAY,), SCALAR, lambda v: float(len(v))),
    "sum": ((ARRAY,), SCALAR, _array_sum),
    "mean": ((ARRAY,), SCALAR, _array_mean),
    "dot": ((ARRAY, ARRAY), SCALAR, _dot),
    "at": ((ARRAY, SCALAR), SCALAR, _at),
    "linfit": ((ARRAY, ARRAY), _tuple_type(2), linfit),
}

_ARITH = {"+", "-", "*", "/", "^"}
_COMPARE = {"==", "!=", "<", "<=", ">", ">="}


class _Checker:
    def __init__(self, array_vars):
        self.array_vars = set(array_vars)
        self.free_vars: set[str] = set()

    def check(self, node) -> str:
        if isinstance(node, Num):
            return SCALAR
        if isinstance(node, Var):
            self.free_vars.add(node.name)
            return ARRAY if node.name in self.array_vars else SCALAR
        if isinstance(node, Unary):
            t = self.check(node.operand)
            if node.op == "-":
                if t != SCALAR:
                    raise ExpressionTypeError(f"unary - needs a scalar, got {t}")
                return SCALAR
            if t != BOOL:
                raise ExpressionTypeError(f"not needs a boolean, got {t}")
            return BOOL
        if isinstance(node, Binary):
            lt, rt = self.check(node.left), self.check(node.right)
            if node.op in _ARITH:
                if lt != SCALAR or rt != SCALAR:
                    raise ExpressionTypeError(
                        f"{node.op} needs scalars, got {lt} and {rt}")
                return SCALAR
            if node.op in _COMPARE:
                if lt != SCALAR or rt != SCALAR:
                    raise ExpressionTypeError(
                        f"{node.op} compares scalars, got {lt} and {rt}")
                return BOOL
            if lt != BOOL or rt != BOOL:
                raise ExpressionTypeError(
                    f"{node.op} needs booleans, got {lt} and {rt}")
            return BOOL
        if isinstance(node, Call):
            if node.name == "if":
                if len(node.args) != 3:
                    raise ExpressionTypeError("if takes (condition, a, b)")
                ct = self.check(node.args[0])
                at, bt = self.check(node.args[1]), self.check(node.args[2])
                if ct != BOOL:
                    raise ExpressionTypeError(
                        f"if condition must be boolean, got {ct}")
                if at != bt:
                    raise ExpressionTypeError(
                        f"if branches disagree: {at} vs {bt}")
                return at
            if node.name not in _BUILTINS:
                raise UnknownFunction(node.name)
            want, result, _ = _BUILTINS[node.name]
            if len(node.args) != len(want):
                raise ExpressionTypeError(
                    f"{node.name} takes {len(want)} arguments")
            for i, (arg, expected) in enumerate(zip(node.args, want)):
                got = self.check(arg)
                if got != expected:
                    raise ExpressionTypeError(
                        f"{node.name} argument {i + 1} must be {expected}, "
                        f"got {got}")
            return result
        if isinstance(node, TupleNode):
            for element in node.elements:
                t = self.check(element)
                if t not in (SCALAR, BOOL):
                    raise ExpressionTypeError(
                        f"tuple elements must be scalar, got {t}")
            return _tuple_type(len(node.elements))
        raise ExpressionTypeError(f"unexpected node {node!r}")


def _compile_node(node) -> Callable[[dict], Any]:
    """Compile the AST into nested closures over the variable environment."""
    if isinstance(node, Num):
        value = node.value
        return lambda env: value
    if isinstance(node, Var):
        name = node.name
        return lambda env: env[name]
    if isinstance(node, Unary):
        operand = _compile_node(node.operand)
        if node.op == "-":
            return lambda env: -operand(env)
        return lambda env: not operand(env)
    if isinstance(node, Binary):
        left = _compile_node(node.left)
        right = _compile_node(node.right)
        op = node.op
        if op == "+":
            return lambda env: left(env) + right(env)
        if op == "-":
            return lambda env: left(env) - right(env)
        if op == "*":
            return lambda env: left(env) * right(env)
        if op == "/":
            return lambda env: _ieee_div(left(env), right(env))
        if op == "^":
            return lambda env: _ieee_pow(left(env), right(env))
        if op == "==":
            return lambda env: left(env) == right(env)
        if op == "!=":
            return lambda env: left(env) != right(env)
        if op == "<":
            return lambda env: left(env) < right(env)
        if op == "<=":
            return lambda env: left(env) <= right(env)
        if op == ">":
            return lambda env: left(env) > right(env)
        if op == ">=":
            return lambda env: left(env) >= right(env)
        if op == "and":
            return lambda env: left(env) and right(env)
        return lambda env: left(env) or right(env)
    if isinstance(node, Call):
        args = [_compile_node(a) for a in node.args]
        if node.name == "if":
            cond, then, other = args
            return lambda env: then(env) if cond(env) else other(env)
        fn = _BUILTINS[node.name][2]
        if len(args) == 1:
            a0 = args[0]
            return lambda env: fn(a0(env))
        if len(args) == 2:
            a0, a1 = args
            return lambda env: fn(a0(env), a1(env))
        return lambda env: fn(*(a(env) for a in args))
    if isinstance(node, TupleNode):
        parts = [_compile_node(e) for e in node.elements]
        return lambda env: tuple(p(env) for p in parts)
    raise ExpressionTypeError(f"unexpected node {node!r}")


@dataclass(frozen=True)
class Expression:
    """Compiled, type-checked expression."""

    source: str
    ast: Any
    result_type: str
    free_vars: frozenset[str]
    array_vars: frozenset[str]
    _fn: Callable[[dict], Any]

    @property
    def arity(self) -> int:
        """Number of output values (tuple width, else 1)."""
        if self.result_type.startswith("tuple["):
            return int(self.result_type[6:-1])
        return 1

    def evaluate(self, env: dict[str, Any]):
        return self._fn(env)


def compile_expression(source: str, array_vars=()) -> Expression:
    """Parse and type-check; variables listed in ``array_vars`` are arrays."""
    ast = _Parser(source).parse()
    checker = _Checker(array_vars)
    result_type = checker.check(ast)
    return Expression(source, ast, result_type,
                      frozenset(checker.free_vars),
                      frozenset(array_vars) & frozenset(checker.free_vars),
                      _compile_node(ast))
