"""Scalar expressions in one variable ``x``, evaluated with f, f' and f''.

Grammar (lowest to highest precedence)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('-' | '+') unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | 'x' | FUNC '(' expr ')' | '(' expr ')'

``^`` is right-associative and binds tighter than unary minus, so ``-x^2``
is ``-(x^2)`` and ``2^3^2`` is ``2^(3^2)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Union

__all__ = [
    "Const",
    "Var",
    "Unary",
    "Binary",
    "Expr",
    "Jet2",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "ExprDomainError",
    "FUNCTIONS",
    "parse",
    "eval_jet",
    "evaluate",
    "to_string",
]

FUNCTIONS = ("log", "exp", "sqrt", "sin", "cos")
BINARY_OPS = ("add", "sub", "mul", "div", "pow")


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.message = message
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at byte offset {offset}")


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name: str, offset: int, text: str = ""):
        self.name = name
        super().__init__(f"unknown identifier {name!r}", offset, text)


class ExprDomainError(ExprError):
    """Raised when a sub-expression is evaluated outside its domain."""

    def __init__(self, message: str, node: "Expr"):
        self.node = node
        super().__init__(f"{message} in {to_string(node)!r}")


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Const:
    value: float


@dataclass(frozen=True, slots=True)
class Var:
    name: str = "x"


@dataclass(frozen=True, slots=True)
class Unary:
    op: str  # "neg" or one of FUNCTIONS
    arg: "Expr"


@dataclass(frozen=True, slots=True)
class Binary:
    op: str  # one of BINARY_OPS
    left: "Expr"
    right: "Expr"


Expr = Union[Const, Var, Unary, Binary]


# ---------------------------------------------------------------------------
# Second-order jets
# ---------------------------------------------------------------------------


def _mul(a: float, b: float) -> float:
    # 0 * inf would poison derivatives of terms that vanish identically
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


@dataclass(frozen=True, slots=True)
class Jet2:
    """Truncated Taylor data ``(f, f', f'')`` at a point."""

    value: float
    d1: float = 0.0
    d2: float = 0.0

    @classmethod
    def variable(cls, x: float) -> "Jet2":
        return cls(float(x), 1.0, 0.0)

    @classmethod
    def constant(cls, c: float) -> "Jet2":
        return cls(float(c), 0.0, 0.0)

    def __iter__(self):
        return iter((self.value, self.d1, self.d2))

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value + other.value, self.d1 + other.d1, self.d2 + other.d2)

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value - other.value, self.d1 - other.d1, self.d2 - other.d2)

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.d1, -self.d2)

    def __mul__(self, other: "Jet2") -> "Jet2":
        a, b = self, other
        return Jet2(
            a.value * b.value,
            a.d1 * b.value + a.value * b.d1,
            a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2,
        )

    def __truediv__(self, other: "Jet2") -> "Jet2":
        a, b = self, other
        q = a.value / b.value
        q1 = (a.d1 - q * b.d1) / b.value
        q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.value
        return Jet2(q, q1, q2)

    def compose(self, g0: float, g1: float, g2: float) -> "Jet2":
        """Chain rule for ``g(self)`` given ``g, g', g''`` at ``self.value``."""
        return Jet2(g0, g1 * self.d1, g2 * self.d1 * self.d1 + g1 * self.d2)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # "num", "name", "op", "end"
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
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append(_Token(kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    tokens.append(_Token("end", "", _byte_offset(text, n)))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: _Token | None = None):
        tok = tok or self.tok
        raise ExprSyntaxError(message, tok.offset, self.text)

    def expect(self, op: str) -> None:
        if self.tok.kind != "op" or self.tok.text != op:
            found = self.tok.text or "end of input"
            self.error(f"expected {op!r}, found {found!r}")
        self.advance()

    def parse(self) -> Expr:
        node = self.expr()
        if self.tok.kind != "end":
            self.error(f"unexpected {self.tok.text!r}")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = "add" if self.advance().text == "+" else "sub"
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = "mul" if self.advance().text == "*" else "div"
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Unary("neg", self.unary())
        if self.tok.kind == "op" and self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return Binary("pow", base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Const(float(tok.text))
        if tok.kind == "name":
            self.advance()
            if tok.text == "x":
                return Var("x")
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(tok.text, arg)
            raise UnknownIdentifierError(tok.text, tok.offset, self.text)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if tok.kind == "end":
            self.error("unexpected end of input")
        self.error(f"unexpected {tok.text!r}")


def parse(text: str) -> Expr:
    """Parse ``text`` into an expression tree over the variable ``x``."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5
_BINARY_PREC = {"add": _PREC_ADD, "sub": _PREC_ADD, "mul": _PREC_MUL, "div": _PREC_MUL, "pow": _PREC_POW}
_BINARY_SYMBOL = {"add": " + ", "sub": " - ", "mul": "*", "div": "/", "pow": "^"}


def _format_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _BINARY_PREC[e.op]
    if isinstance(e, Unary) and e.op == "neg":
        return _PREC_NEG
    if isinstance(e, Const) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return _PREC_NEG
    return _PREC_ATOM


def _wrap(e: Expr, min_prec: int) -> str:
    s = to_string(e)
    return f"({s})" if _prec(e) < min_prec else s


def to_string(e: Expr) -> str:
    """Render with the minimum parentheses needed to re-parse to the same tree."""
    if isinstance(e, Const):
        return _format_number(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return "-" + _wrap(e.arg, _PREC_NEG)
        return f"{e.op}({to_string(e.arg)})"
    if e.op == "pow":
        return _wrap(e.left, _PREC_ATOM) + "^" + _wrap(e.right, _PREC_NEG)
    p = _BINARY_PREC[e.op]
    return _wrap(e.left, p) + _BINARY_SYMBOL[e.op] + _wrap(e.right, p + 1)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def _safe(fn: Callable[..., float], *args: float) -> float:
    try:
        return fn(*args)
    except OverflowError:
        return math.inf


def _ipow(b: float, n: int) -> float:
    if n == 0:
        return 1.0
    return _safe(math.pow, b, n)


def _pow_int(base: Jet2, n: int, node: Expr) -> Jet2:
    b = base.value
    if n == 0:
        return Jet2(1.0, 0.0, 0.0)
    if b == 0.0 and n < 0:
        raise ExprDomainError("zero raised to a negative power", node)
    v = _ipow(b, n)
    g1 = n * _ipow(b, n - 1) if n != 0 else 0.0
    g2 = n * (n - 1) * _ipow(b, n - 2) if n not in (0, 1) else 0.0
    return Jet2(v, _mul(g1, base.d1), _mul(g2, base.d1 * base.d1) + _mul(g1, base.d2))


def _pow_real(base: Jet2, c: float, node: Expr) -> Jet2:
    b = base.value
    if not b > 0.0:
        raise ExprDomainError("non-positive base with non-integer exponent", node)
    v = _safe(math.pow, b, c)
    g1 = c * _safe(math.pow, b, c - 1.0)
    g2 = c * (c - 1.0) * _safe(math.pow, b, c - 2.0)
    return Jet2(v, _mul(g1, base.d1), _mul(g2, base.d1 * base.d1) + _mul(g1, base.d2))


def _unary(op: str, u: Jet2, node: Expr) -> Jet2:
    v = u.value
    if op == "neg":
        return -u
    if op == "log":
        if not v > 0.0:
            raise ExprDomainError(f"log of non-positive value {v!r}", node)
        return u.compose(math.log(v), 1.0 / v, -1.0 / (v * v))
    if op == "exp":
        ev = _safe(math.exp, v)
        return u.compose(ev, ev, ev)
    if op == "sqrt":
        if not v > 0.0:
            raise ExprDomainError(f"sqrt of non-positive value {v!r}", node)
        s = math.sqrt(v)
        return u.compose(s, 0.5 / s, -0.25 / (s * v))
    if op == "sin":
        s, c = math.sin(v), math.cos(v)
        return u.compose(s, c, -s)
    if op == "cos":
        s, c = math.sin(v), math.cos(v)
        return u.compose(c, -s, -c)
    raise ExprError(f"unknown unary operator {op!r}")


def _eval(e: Expr, x: Jet2) -> Jet2:
    if isinstance(e, Const):
        return Jet2(e.value, 0.0, 0.0)
    if isinstance(e, Var):
        return x
    if isinstance(e, Unary):
        return _unary(e.op, _eval(e.arg, x), e)
    a = _eval(e.left, x)
    b = _eval(e.right, x)
    if e.op == "add":
        return a + b
    if e.op == "sub":
        return a - b
    if e.op == "mul":
        return a * b
    if e.op == "div":
        if b.value == 0.0:
            raise ExprDomainError("division by zero", e)
        return a / b
    if e.op == "pow":
        if b.d1 == 0.0 and b.d2 == 0.0:
            c = b.value
            if math.isfinite(c) and c.is_integer():
                return _pow_int(a, int(c), e)
            return _pow_real(a, c, e)
        # variable exponent: a^b = exp(b*log(a))
        if not a.value > 0.0:
            raise ExprDomainError("non-positive base with variable exponent", e)
        la = a.compose(math.log(a.value), 1.0 / a.value, -1.0 / (a.value * a.value))
        t = b * la
        ev = _safe(math.exp, t.value)
        return t.compose(ev, ev, ev)
    raise ExprError(f"unknown binary operator {e.op!r}")


def eval_jet(e: Expr, x: float) -> Jet2:
    """Return ``(f(x), f'(x), f''(x))`` by second-order forward-mode AD."""
    return _eval(e, Jet2.variable(x))


def evaluate(e: Expr, x: float) -> float:
    return eval_jet(e, x).value
