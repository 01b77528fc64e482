"""One-parameter scalar maps ``f(x; p)`` with exact first derivatives.

Builtin families are the logistic, cubic and Gauss maps plus the linear
two-periodic map (``a*x`` at even times, ``b*x`` at odd times).  Arbitrary
maps can be given as expressions over ``x`` and one named parameter::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?
    atom    := NUMBER | 'x' | PARAM | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := 'exp' | 'sin' | 'cos'

Derivatives are propagated in forward mode through :class:`DualValue`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Union


class MapDomainError(ArithmeticError):
    """Evaluation left the real domain (division by zero, bad power)."""


class ExpressionSyntaxError(ValueError):
    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExpressionSyntaxError):
    pass


# {{{ dual numbers

class DualValue(NamedTuple):
    """A value together with its derivative with respect to ``x``."""

    value: float
    derivative: float

    def __add__(self, other):
        other = _lift(other)
        return DualValue(self.value + other.value, self.derivative + other.derivative)

    __radd__ = __add__

    def __sub__(self, other):
        other = _lift(other)
        return DualValue(self.value - other.value, self.derivative - other.derivative)

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        other = _lift(other)
        return DualValue(
            self.value * other.value,
            self.derivative * other.value + self.value * other.derivative,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _lift(other)
        if other.value == 0.0:
            raise MapDomainError("division by zero")
        q = self.value / other.value
        return DualValue(q, (self.derivative - q * other.derivative) / other.value)

    def __rtruediv__(self, other):
        return _lift(other) / self

    def __neg__(self):
        return DualValue(-self.value, -self.derivative)

    def __pow__(self, other):
        return _dual_pow(self, _lift(other))

    def __rpow__(self, other):
        return _dual_pow(_lift(other), self)


def _lift(v) -> DualValue:
    if isinstance(v, DualValue):
        return v
    return DualValue(float(v), 0.0)


def _real_pow(base: float, expo: float) -> float:
    if base == 0.0 and expo < 0.0:
        raise MapDomainError("zero raised to a negative power")
    if base < 0.0 and not float(expo).is_integer():
        raise MapDomainError("negative base with non-integer exponent")
    try:
        return base**expo
    except OverflowError:
        if base < 0.0 and int(expo) % 2:
            return -math.inf
        return math.inf


def _dual_pow(base: DualValue, expo: DualValue) -> DualValue:
    v = _real_pow(base.value, expo.value)
    if expo.derivative == 0.0:
        if expo.value == 0.0:
            return DualValue(v, 0.0)
        d = expo.value * _real_pow(base.value, expo.value - 1.0) * base.derivative
        return DualValue(v, d)
    if base.value <= 0.0:
        raise MapDomainError("variable exponent requires a positive base")
    d = v * (expo.derivative * math.log(base.value) + expo.value * base.derivative / base.value)
    return DualValue(v, d)


def _dual_exp(u: DualValue) -> DualValue:
    e = math.exp(u.value)
    return DualValue(e, e * u.derivative)


def _dual_sin(u: DualValue) -> DualValue:
    return DualValue(math.sin(u.value), math.cos(u.value) * u.derivative)


def _dual_cos(u: DualValue) -> DualValue:
    return DualValue(math.cos(u.value), -math.sin(u.value) * u.derivative)

# }}}


# {{{ expression AST

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Param, Neg, BinOp, Call]

_FUNCS: dict[str, tuple[Callable[[float], float], Callable[[DualValue], DualValue]]] = {
    "exp": (math.exp, _dual_exp),
    "sin": (math.sin, _dual_sin),
    "cos": (math.cos, _dual_cos),
}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


class _Token(NamedTuple):
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.lastgroup is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str, parameter_name: str) -> None:
        self.tokens = _tokenize(text)
        self.pos = 0
        self.parameter_name = parameter_name

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, op: str) -> None:
        tok = self.take()
        if tok.kind != "op" or tok.text != op:
            found = tok.text or "end of input"
            raise ExpressionSyntaxError(f"expected {op!r}, found {found!r}", tok.offset)

    def parse(self) -> Node:
        node = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {tok.text!r}", tok.offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self) -> Node:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.take()
            # right-associative, and binds tighter than a leading minus
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Node:
        tok = self.take()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.kind == "name":
            if tok.text in _FUNCS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Call(tok.text, arg)
            if tok.text == "x":
                return Var()
            if tok.text == self.parameter_name:
                return Param(tok.text)
            raise UnknownIdentifierError(f"unknown identifier {tok.text!r}", tok.offset)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        found = tok.text or "end of input"
        raise ExpressionSyntaxError(f"unexpected {found!r}", tok.offset)


def _evaluate(node: Node, x, p: float):
    """Evaluate ``node`` for a float or :class:`DualValue` argument ``x``."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return x
    if isinstance(node, Param):
        return p
    if isinstance(node, Neg):
        return -_evaluate(node.operand, x, p)
    if isinstance(node, Call):
        arg = _evaluate(node.arg, x, p)
        plain, dual = _FUNCS[node.func]
        if isinstance(arg, DualValue):
            return dual(arg)
        return plain(arg)

    left = _evaluate(node.left, x, p)
    right = _evaluate(node.right, x, p)
    op = node.op
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        if isinstance(left, DualValue) or isinstance(right, DualValue):
            return _lift(left) / right
        if right == 0.0:
            raise MapDomainError("division by zero")
        return left / right
    if isinstance(left, DualValue) or isinstance(right, DualValue):
        return _dual_pow(_lift(left), _lift(right))
    return _real_pow(left, right)


def format_expression(node: Node) -> str:
    """Fully parenthesized rendering of an AST (used in JSON output)."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Param):
        return node.name
    if isinstance(node, Neg):
        return f"(-{format_expression(node.operand)})"
    if isinstance(node, Call):
        return f"{node.func}({format_expression(node.arg)})"
    return f"({format_expression(node.left)} {node.op} {format_expression(node.right)})"

# }}}


# {{{ map specification

BUILTIN_KINDS = ("logistic", "cubic", "gauss")


@dataclass(frozen=True)
class MapSpec:
    """A scalar map ``f(x; parameter)``.

    ``kind`` is one of ``linear2``, ``logistic``, ``cubic``, ``gauss`` or
    ``expression``.  For ``linear2`` the pair ``(a, b)`` is held in
    ``parameter`` and ``second``; evaluation then needs the time parity.
    """

    kind: str
    parameter: float
    second: float = 0.0
    ast: Node | None = field(default=None, compare=True)
    parameter_name: str = "p"
    source: str = ""

    @property
    def parity_dependent(self) -> bool:
        return self.kind == "linear2"

    def with_parameter(self, value: float) -> "MapSpec":
        return replace(self, parameter=float(value))

    def describe(self) -> str:
        if self.kind == "expression":
            return self.source
        return self.kind

    def __call__(self, x: float, t: int = 0) -> float:
        return evaluate(self, x, t)


def linear_two_periodic(a: float, b: float) -> MapSpec:
    return MapSpec("linear2", float(a), float(b))


def logistic(lam: float) -> MapSpec:
    return MapSpec("logistic", float(lam), parameter_name="lambda")


def cubic(beta: float) -> MapSpec:
    return MapSpec("cubic", float(beta), parameter_name="beta")


def gauss(beta: float) -> MapSpec:
    return MapSpec("gauss", float(beta), parameter_name="beta")


def builtin(kind: str, parameter: float) -> MapSpec:
    try:
        factory = {"logistic": logistic, "cubic": cubic, "gauss": gauss}[kind]
    except KeyError:
        raise ValueError(f"unknown builtin map {kind!r}") from None
    return factory(parameter)


def parse_map(expr: str, parameter_name: str, parameter: float = 0.0) -> MapSpec:
    """Parse ``expr`` into an expression-backed :class:`MapSpec`.

    >>> m = parse_map("l*x*(1-x)", "l", 2.8)
    >>> round(evaluate(m, 0.5), 12)
    0.7
    """
    if not expr or not expr.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    if not re.fullmatch(r"[A-Za-z_]\w*", parameter_name) or parameter_name == "x" \
            or parameter_name in _FUNCS:
        raise ValueError(f"invalid parameter name {parameter_name!r}")
    ast = _Parser(expr, parameter_name).parse()
    return MapSpec("expression", float(parameter), ast=ast,
                   parameter_name=parameter_name, source=expr)


def evaluate(spec: MapSpec, x: float, t: int = 0) -> float:
    """Return ``f(x)``; ``t`` is only consulted for the two-periodic map."""
    kind = spec.kind
    p = spec.parameter
    if kind == "logistic":
        return p * x * (1.0 - x)
    if kind == "cubic":
        return p * x * (6.0 - x**2)
    if kind == "gauss":
        return math.exp(-7.5 * x**2) + p
    if kind == "linear2":
        return (p if t % 2 == 0 else spec.second) * x
    if kind == "expression":
        assert spec.ast is not None
        try:
            return float(_evaluate(spec.ast, x, p))
        except (OverflowError, ZeroDivisionError) as exc:
            raise MapDomainError(str(exc)) from exc
    raise ValueError(f"unknown map kind {kind!r}")


def eval_with_derivative(spec: MapSpec, x: float, t: int = 0) -> DualValue:
    """Return ``(f(x), f'(x))``."""
    kind = spec.kind
    p = spec.parameter
    if kind == "logistic":
        return DualValue(p * x * (1.0 - x), p * (1.0 - 2.0 * x))
    if kind == "cubic":
        return DualValue(p * x * (6.0 - x**2), p * (6.0 - 3.0 * x**2))
    if kind == "gauss":
        e = math.exp(-7.5 * x**2)
        return DualValue(e + p, -15.0 * x * e)
    if kind == "linear2":
        c = p if t % 2 == 0 else spec.second
        return DualValue(c * x, c)
    if kind == "expression":
        assert spec.ast is not None
        try:
            out = _evaluate(spec.ast, DualValue(float(x), 1.0), p)
        except (OverflowError, ZeroDivisionError) as exc:
            raise MapDomainError(str(exc)) from exc
        return _lift(out)
    raise ValueError(f"unknown map kind {kind!r}")

# }}}

# vim: foldmethod=marker
