"""Parse, differentiate, evaluate, and print concrete coefficient functions.

The verifier needs p(x), q(x) as actual functions of x together with their
derivatives up to the order the lifted coefficients mention.  This module
supplies a tiny closed-under-differentiation expression language:

    expr  := term (('+'|'-') term)*
    term  := unary (('*'|'/') unary)*
    unary := '-' unary | power
    power := atom ('^' int)?
    atom  := number | 'x' | func '(' expr ')' | '(' expr ')'
    func  := 'sin' | 'cos' | 'exp' | 'ln'

Trees are immutable.  `diff_expr` applies the textbook rules and folds
arithmetic on numeric literals, nothing more; repeated differentiation
grows trees, which stays tractable at the orders used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Call",
    "FUNCTIONS",
    "ExprSyntaxError",
    "ExprDomainError",
    "parse_expr",
    "diff_expr",
    "eval_expr",
    "format_expr",
]

FUNCTIONS = ("sin", "cos", "exp", "ln")


@dataclass(frozen=True)
class Num:
    """Numeric literal."""

    value: float


@dataclass(frozen=True)
class Var:
    """The independent variable x."""


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    """Integer power; the exponent may be negative."""

    base: "Expr"
    exponent: int

    def __post_init__(self) -> None:
        if not isinstance(self.exponent, int) or isinstance(self.exponent, bool):
            raise TypeError("exponent must be an int")


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"

    def __post_init__(self) -> None:
        if self.func not in FUNCTIONS:
            raise ValueError(f"unknown function {self.func!r}")


Expr = Union[Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call]


# --------------------------------------------------------------------------
# parsing


class ExprSyntaxError(ValueError):
    """Raised on malformed input, carrying the byte offset of the problem."""

    def __init__(self, position: int, expected: tuple, found: str):
        self.position = position
        self.expected = expected
        self.found = found
        want = " or ".join(expected) if expected else "nothing"
        super().__init__(
            f"syntax error at offset {position}: expected {want}, found {found}"
        )


_OPERATORS = frozenset("+-*/^()")


class _Scanner:
    """Tokens: (kind, value, offset) with kind in num/name/op/end."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.token = self._advance()

    def _advance(self):
        text = self.text
        i = self.pos
        while i < len(text) and text[i] in " \t":
            i += 1
        if i >= len(text):
            return ("end", "", len(text))
        ch = text[i]
        if ch in _OPERATORS:
            self.pos = i + 1
            return ("op", ch, i)
        if ch.isdigit() or ch == ".":
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            if j < len(text) and text[j] == ".":
                j += 1
                if j >= len(text) or not text[j].isdigit():
                    raise ExprSyntaxError(i, ("number",), repr(text[i:j]))
                while j < len(text) and text[j].isdigit():
                    j += 1
            self.pos = j
            return ("num", text[i:j], i)
        if ch.isalpha():
            j = i
            while j < len(text) and text[j].isalpha():
                j += 1
            word = text[i:j]
            if word != "x" and word not in FUNCTIONS:
                raise ExprSyntaxError(i, ("'x'",) + tuple(FUNCTIONS), repr(word))
            self.pos = j
            return ("name", word, i)
        raise ExprSyntaxError(i, ("number", "'x'", "function", "'('"), repr(ch))

    def shift(self):
        tok = self.token
        self.token = self._advance()
        return tok

    def found(self) -> str:
        kind, value, _ = self.token
        return "end of input" if kind == "end" else repr(value)


def parse_expr(text: str) -> Expr:
    """Parse `text` into an Expr tree.

    Standard precedence (^ binds tighter than unary minus, which binds
    tighter than * and /, which bind tighter than + and -); the four
    binary operators associate to the left.
    """
    sc = _Scanner(text)
    tree = _parse_sum(sc)
    if sc.token[0] != "end":
        raise ExprSyntaxError(sc.token[2], ("end of input",), sc.found())
    return tree


def _parse_sum(sc: _Scanner) -> Expr:
    node = _parse_term(sc)
    while sc.token[:2] in (("op", "+"), ("op", "-")):
        op = sc.shift()[1]
        rhs = _parse_term(sc)
        node = Add(node, rhs) if op == "+" else Sub(node, rhs)
    return node


def _parse_term(sc: _Scanner) -> Expr:
    node = _parse_unary(sc)
    while sc.token[:2] in (("op", "*"), ("op", "/")):
        op = sc.shift()[1]
        rhs = _parse_unary(sc)
        node = Mul(node, rhs) if op == "*" else Div(node, rhs)
    return node


def _parse_unary(sc: _Scanner) -> Expr:
    if sc.token[:2] == ("op", "-"):
        sc.shift()
        return Neg(_parse_unary(sc))
    return _parse_power(sc)


def _parse_power(sc: _Scanner) -> Expr:
    base = _parse_atom(sc)
    if sc.token[:2] == ("op", "^"):
        sc.shift()
        sign = 1
        if sc.token[:2] == ("op", "-"):
            sc.shift()
            sign = -1
        kind, value, offset = sc.token
        if kind != "num" or "." in value:
            raise ExprSyntaxError(offset, ("integer exponent",), sc.found())
        sc.shift()
        return Pow(base, sign * int(value))
    return base


def _parse_atom(sc: _Scanner) -> Expr:
    kind, value, offset = sc.token
    if kind == "num":
        sc.shift()
        return Num(float(value))
    if kind == "name":
        sc.shift()
        if value == "x":
            return Var()
        _expect_op(sc, "(")
        arg = _parse_sum(sc)
        _expect_op(sc, ")")
        return Call(value, arg)
    if (kind, value) == ("op", "("):
        sc.shift()
        inner = _parse_sum(sc)
        _expect_op(sc, ")")
        return inner
    raise ExprSyntaxError(offset, ("number", "'x'", "function", "'('", "'-'"), sc.found())


def _expect_op(sc: _Scanner, op: str) -> None:
    if sc.token[:2] != ("op", op):
        raise ExprSyntaxError(sc.token[2], (f"'{op}'",), sc.found())
    sc.shift()


# --------------------------------------------------------------------------
# differentiation

# Smart constructors fold arithmetic when both sides are finite literals and
# drop 0/1 identities so derivative chains stay readable.  parse_expr never
# calls these: a parsed tree is exactly what the text says.


def _is_num(e: Expr, value=None) -> bool:
    return isinstance(e, Num) and (value is None or e.value == value)


def _fold(value: float) -> Expr:
    return Num(value) if math.isfinite(value) else None


def _add(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        folded = _fold(a.value + b.value)
        if folded is not None:
            return folded
    if _is_num(a, 0.0):
        return b
    if _is_num(b, 0.0):
        return a
    return Add(a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        folded = _fold(a.value - b.value)
        if folded is not None:
            return folded
    if _is_num(b, 0.0):
        return a
    if _is_num(a, 0.0):
        return _neg(b)
    return Sub(a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b):
        folded = _fold(a.value * b.value)
        if folded is not None:
            return folded
    if _is_num(a, 0.0) or _is_num(b, 0.0):
        return Num(0.0)
    if _is_num(a, 1.0):
        return b
    if _is_num(b, 1.0):
        return a
    return Mul(a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_num(a) and _is_num(b) and b.value != 0.0:
        folded = _fold(a.value / b.value)
        if folded is not None:
            return folded
    if _is_num(b, 1.0):
        return a
    return Div(a, b)


def _neg(a: Expr) -> Expr:
    if _is_num(a):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _pow(base: Expr, exponent: int) -> Expr:
    if exponent == 0:
        return Num(1.0)
    if exponent == 1:
        return base
    return Pow(base, exponent)


def diff_expr(e: Expr) -> Expr:
    """Derivative of `e` with respect to x."""
    if isinstance(e, Num):
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0)
    if isinstance(e, Neg):
        return _neg(diff_expr(e.arg))
    if isinstance(e, Add):
        return _add(diff_expr(e.left), diff_expr(e.right))
    if isinstance(e, Sub):
        return _sub(diff_expr(e.left), diff_expr(e.right))
    if isinstance(e, Mul):
        return _add(
            _mul(diff_expr(e.left), e.right),
            _mul(e.left, diff_expr(e.right)),
        )
    if isinstance(e, Div):
        numerator = _sub(
            _mul(diff_expr(e.left), e.right),
            _mul(e.left, diff_expr(e.right)),
        )
        return _div(numerator, _pow(e.right, 2))
    if isinstance(e, Pow):
        chain = _mul(Num(float(e.exponent)), _pow(e.base, e.exponent - 1))
        return _mul(chain, diff_expr(e.base))
    if isinstance(e, Call):
        inner = diff_expr(e.arg)
        if e.func == "sin":
            return _mul(Call("cos", e.arg), inner)
        if e.func == "cos":
            return _mul(_neg(Call("sin", e.arg)), inner)
        if e.func == "exp":
            return _mul(Call("exp", e.arg), inner)
        return _div(inner, e.arg)  # ln
    raise TypeError(f"not an Expr: {e!r}")


# --------------------------------------------------------------------------
# evaluation


class ExprDomainError(ValueError):
    """Raised when evaluation leaves a node's domain; names node and x."""

    def __init__(self, node: Expr, x: float, reason: str):
        self.node = node
        self.x = x
        super().__init__(f"{format_expr(node)} undefined at x={x!r}: {reason}")


def eval_expr(e: Expr, x: float) -> float:
    """Evaluate `e` at `x` in IEEE double precision.

    Raises ExprDomainError for ln of a nonpositive value, division by
    zero, zero raised to a negative power, and overflow.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return float(x)
    if isinstance(e, Neg):
        return -eval_expr(e.arg, x)
    if isinstance(e, Add):
        return eval_expr(e.left, x) + eval_expr(e.right, x)
    if isinstance(e, Sub):
        return eval_expr(e.left, x) - eval_expr(e.right, x)
    if isinstance(e, Mul):
        return eval_expr(e.left, x) * eval_expr(e.right, x)
    if isinstance(e, Div):
        denominator = eval_expr(e.right, x)
        if denominator == 0.0:
            raise ExprDomainError(e, x, "division by zero")
        return eval_expr(e.left, x) / denominator
    if isinstance(e, Pow):
        base = eval_expr(e.base, x)
        if base == 0.0 and e.exponent < 0:
            raise ExprDomainError(e, x, "zero raised to a negative power")
        try:
            return base ** e.exponent
        except OverflowError:
            raise ExprDomainError(e, x, "overflow") from None
    if isinstance(e, Call):
        arg = eval_expr(e.arg, x)
        if e.func == "ln":
            if arg <= 0.0:
                raise ExprDomainError(e, x, f"argument {arg!r} is not positive")
            return math.log(arg)
        try:
            return getattr(math, e.func)(arg)
        except OverflowError:
            raise ExprDomainError(e, x, "overflow") from None
    raise TypeError(f"not an Expr: {e!r}")


# --------------------------------------------------------------------------
# printing

# Precedence levels used for parenthesization; a child is wrapped when its
# level is below what its position requires.
_LEVEL_SUM = 1
_LEVEL_TERM = 2
_LEVEL_UNARY = 3
_LEVEL_POWER = 4
_LEVEL_ATOM = 5


def format_expr(e: Expr) -> str:
    """Render `e` so that parse_expr(format_expr(e)) rebuilds it.

    Parser output round-trips structurally.  Trees built by hand or by
    folding may hold negative literals, which print as unary minus and
    reparse as Neg of a positive literal: a different tree with the
    same values everywhere.
    """
    return _format(e, _LEVEL_SUM)


def _format(e: Expr, need: int) -> str:
    if isinstance(e, Num):
        text, level = _format_number(e.value)
    elif isinstance(e, Var):
        text, level = "x", _LEVEL_ATOM
    elif isinstance(e, Neg):
        text, level = "-" + _format(e.arg, _LEVEL_UNARY), _LEVEL_UNARY
    elif isinstance(e, Add):
        text = _format(e.left, _LEVEL_SUM) + " + " + _format(e.right, _LEVEL_TERM)
        level = _LEVEL_SUM
    elif isinstance(e, Sub):
        text = _format(e.left, _LEVEL_SUM) + " - " + _format(e.right, _LEVEL_TERM)
        level = _LEVEL_SUM
    elif isinstance(e, Mul):
        text = _format(e.left, _LEVEL_TERM) + "*" + _format(e.right, _LEVEL_UNARY)
        level = _LEVEL_TERM
    elif isinstance(e, Div):
        text = _format(e.left, _LEVEL_TERM) + "/" + _format(e.right, _LEVEL_UNARY)
        level = _LEVEL_TERM
    elif isinstance(e, Pow):
        text = _format(e.base, _LEVEL_ATOM) + "^" + str(e.exponent)
        level = _LEVEL_POWER
    elif isinstance(e, Call):
        text, level = f"{e.func}({_format(e.arg, _LEVEL_SUM)})", _LEVEL_ATOM
    else:
        raise TypeError(f"not an Expr: {e!r}")
    return "(" + text + ")" if level < need else text


def _format_number(value: float) -> tuple:
    if value < 0.0 or math.copysign(1.0, value) < 0.0:
        return "-" + _positive_literal(-value), _LEVEL_UNARY
    return _positive_literal(value), _LEVEL_ATOM


def _positive_literal(value: float) -> str:
    text = repr(value)
    if "e" in text or "E" in text:
        # repr fell back to scientific notation, which the grammar lacks
        text = f"{value:.17f}".rstrip("0")
        if text.endswith("."):
            text += "0"
        if float(text) != value:
            raise ValueError(f"literal {value!r} has no grammar representation")
    return text
