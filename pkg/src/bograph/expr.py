"""Exact parameter expressions.

A :class:`ParamExpr` is a small immutable tree over rational constants and
named parameters.  Trees stay unevaluated while equations are assembled; they
are only collapsed when a canonical rational form is requested or when all
parameters are bound to numbers.

The textual syntax is the usual infix one (``+ - * / ^``, parentheses, unary
minus, integer exponents).  :func:`format_expr` and :func:`parse_expr` are
inverse on every tree the parser can produce.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Union

__all__ = [
    "ParamExpr",
    "Const",
    "Param",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Neg",
    "Pow",
    "ExprSyntaxError",
    "MissingBinding",
    "DivisionByZero",
    "as_expr",
    "parse_expr",
    "format_expr",
    "parameters_of",
    "evaluate",
    "canonical",
    "canonical_str",
    "is_literal_zero",
    "ZERO",
    "ONE",
]


class ExprSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at offset {pos})")
        self.pos = pos


class MissingBinding(LookupError):
    """A parameter has no numeric value during instantiation."""

    def __init__(self, name: str):
        super().__init__(f"no binding for parameter '{name}'")
        self.name = name


class DivisionByZero(ArithmeticError):
    pass


Number = Union[int, Fraction]


class ParamExpr:
    """Base class; arithmetic operators build simplified trees."""

    __slots__ = ()

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __str__(self) -> str:
        return format_expr(self)


@dataclass(frozen=True, repr=False)
class Const(ParamExpr):
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))

    def __repr__(self) -> str:
        return f"Const({self.value})"


@dataclass(frozen=True, repr=False)
class Param(ParamExpr):
    name: str

    def __repr__(self) -> str:
        return f"Param({self.name})"


@dataclass(frozen=True, repr=False)
class Add(ParamExpr):
    left: ParamExpr
    right: ParamExpr

    def __repr__(self) -> str:
        return f"Add({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Sub(ParamExpr):
    left: ParamExpr
    right: ParamExpr

    def __repr__(self) -> str:
        return f"Sub({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Mul(ParamExpr):
    left: ParamExpr
    right: ParamExpr

    def __repr__(self) -> str:
        return f"Mul({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Div(ParamExpr):
    left: ParamExpr
    right: ParamExpr

    def __repr__(self) -> str:
        return f"Div({self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Neg(ParamExpr):
    operand: ParamExpr

    def __repr__(self) -> str:
        return f"Neg({self.operand!r})"


@dataclass(frozen=True, repr=False)
class Pow(ParamExpr):
    base: ParamExpr
    exponent: int

    def __repr__(self) -> str:
        return f"Pow({self.base!r}, {self.exponent})"


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def as_expr(x) -> ParamExpr:
    if isinstance(x, ParamExpr):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Const(Fraction(x))
    if isinstance(x, str):
        return parse_expr(x)
    raise TypeError(f"cannot convert {type(x).__name__} to ParamExpr")


def is_literal_zero(e: ParamExpr) -> bool:
    return isinstance(e, Const) and e.value == 0


def _is_const(e: ParamExpr, v) -> bool:
    return isinstance(e, Const) and e.value == v


# -- simplifying constructors -------------------------------------------------


def add(a: ParamExpr, b: ParamExpr) -> ParamExpr:
    if is_literal_zero(a):
        return b
    if is_literal_zero(b):
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if isinstance(b, Neg):
        return Sub(a, b.operand)
    return Add(a, b)


def sub(a: ParamExpr, b: ParamExpr) -> ParamExpr:
    if is_literal_zero(b):
        return a
    if is_literal_zero(a):
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if isinstance(b, Neg):
        return Add(a, b.operand)
    return Sub(a, b)


def mul(a: ParamExpr, b: ParamExpr) -> ParamExpr:
    if is_literal_zero(a) or is_literal_zero(b):
        return ZERO
    if _is_const(a, 1):
        return b
    if _is_const(b, 1):
        return a
    if _is_const(a, -1):
        return neg(b)
    if _is_const(b, -1):
        return neg(a)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if isinstance(a, Neg) and isinstance(b, Neg):
        return mul(a.operand, b.operand)
    if isinstance(a, Neg):
        return neg(mul(a.operand, b))
    if isinstance(b, Neg):
        return neg(mul(a, b.operand))
    return Mul(a, b)


def div(a: ParamExpr, b: ParamExpr) -> ParamExpr:
    if is_literal_zero(b):
        raise DivisionByZero("division by literal zero")
    if is_literal_zero(a):
        return ZERO
    if _is_const(b, 1):
        return a
    if _is_const(b, -1):
        return neg(a)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value / b.value)
    if isinstance(a, Neg):
        return neg(div(a.operand, b))
    if isinstance(b, Neg):
        return neg(div(a, b.operand))
    if isinstance(b, Div) and _is_const(b.left, 1):
        return mul(a, b.right)
    return Div(a, b)


def neg(a: ParamExpr) -> ParamExpr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


# -- parsing ------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExprSyntaxError(f"unexpected character {text[pos:].lstrip()[0]!r}", pos)
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("end", "", n))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect_op(self, op: str):
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ExprSyntaxError(f"expected {op!r}", pos)

    def parse(self) -> ParamExpr:
        e = self.expr()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", pos)
        return e

    def expr(self) -> ParamExpr:
        left = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                right = self.term()
                left = Add(left, right) if val == "+" else Sub(left, right)
            else:
                return left

    def term(self) -> ParamExpr:
        left = self.unary()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                right = self.unary()
                left = Mul(left, right) if val == "*" else Div(left, right)
            else:
                return left

    def unary(self) -> ParamExpr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            nk, nv, _ = self.peek()
            after = self.peek(1)
            if nk == "num" and not (after[0] == "op" and after[1] == "^"):
                self.take()
                return Const(-Fraction(nv))
            return Neg(self.unary())
        return self.power()

    def power(self) -> ParamExpr:
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            sign = 1
            k, v, pos = self.peek()
            if k == "op" and v == "-":
                self.take()
                sign = -1
            k, v, pos = self.take()
            if k != "num" or "." in v:
                raise ExprSyntaxError("exponent must be an integer", pos)
            return Pow(base, sign * int(v))
        return base

    def atom(self) -> ParamExpr:
        kind, val, pos = self.take()
        if kind == "num":
            return Const(Fraction(val))
        if kind == "ident":
            return Param(val)
        if kind == "op" and val == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        if kind == "end":
            raise ExprSyntaxError("unexpected end of expression", pos)
        raise ExprSyntaxError(f"unexpected token {val!r}", pos)


def parse_expr(text: str) -> ParamExpr:
    return _Parser(text).parse()


# -- printing -----------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e: ParamExpr) -> int:
    if isinstance(e, (Add, Sub)):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Pow):
        return _PREC_POW
    if isinstance(e, Const) and (e.value < 0 or not _terminates(e.value)):
        return _PREC_NEG
    return _PREC_ATOM


def _terminates(v: Fraction) -> bool:
    d = v.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    return d == 1


def _format_const(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    if _terminates(v):
        sign = "-" if v < 0 else ""
        a = abs(v)
        digits = 0
        while (a * 10**digits).denominator != 1:
            digits += 1
        scaled = int(a * 10**digits)
        whole, frac = divmod(scaled, 10**digits)
        return f"{sign}{whole}.{frac:0{digits}d}"
    # Not representable as a single literal; prints as a quotient.
    return f"({v.numerator}/{v.denominator})"


def format_expr(e: ParamExpr) -> str:
    if isinstance(e, Const):
        return _format_const(e.value)
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Neg):
        inner = format_expr(e.operand)
        if isinstance(e.operand, Const) or _prec(e.operand) < _PREC_NEG:
            inner = f"({inner})"
        return "-" + inner
    if isinstance(e, Pow):
        b = format_expr(e.base)
        if _prec(e.base) < _PREC_ATOM:
            b = f"({b})"
        return f"{b}^{e.exponent}"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    p = _prec(e)
    ls = format_expr(e.left)
    rs = format_expr(e.right)
    if _prec(e.left) < p:
        ls = f"({ls})"
    if _prec(e.right) <= p:
        rs = f"({rs})"
    return f"{ls}{op}{rs}"


# -- inspection and evaluation -------------------------------------------------


def parameters_of(e: ParamExpr) -> frozenset:
    if isinstance(e, Param):
        return frozenset({e.name})
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Neg):
        return parameters_of(e.operand)
    if isinstance(e, Pow):
        return parameters_of(e.base)
    return parameters_of(e.left) | parameters_of(e.right)


def evaluate(e: ParamExpr, bindings: Mapping[str, Number]) -> Fraction:
    """Exact value of ``e`` with every parameter bound to a rational."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Param):
        if e.name not in bindings:
            raise MissingBinding(e.name)
        return Fraction(bindings[e.name])
    if isinstance(e, Neg):
        return -evaluate(e.operand, bindings)
    if isinstance(e, Pow):
        b = evaluate(e.base, bindings)
        if b == 0 and e.exponent < 0:
            raise DivisionByZero(f"zero raised to {e.exponent}")
        return b**e.exponent
    a = evaluate(e.left, bindings)
    b = evaluate(e.right, bindings)
    if isinstance(e, Add):
        return a + b
    if isinstance(e, Sub):
        return a - b
    if isinstance(e, Mul):
        return a * b
    if b == 0:
        raise DivisionByZero(f"division by zero in {format_expr(e)}")
    return a / b


# -- canonical rational form ---------------------------------------------------


@dataclass(frozen=True)
class Canonical:
    """Reduced fraction num/den over parameter monomials.

    Each polynomial is a tuple of ``(coefficient, ((name, exp), ...))`` terms
    in lexicographic monomial order with variables sorted by name.  Integer
    coefficients share no common factor and the leading denominator
    coefficient is positive.
    """

    num: tuple
    den: tuple

    @property
    def is_zero(self) -> bool:
        return not self.num

    def __str__(self) -> str:
        return _render(self)


def _to_sympy(e: ParamExpr, sp, symbols: dict):
    if isinstance(e, Const):
        return sp.Rational(e.value.numerator, e.value.denominator)
    if isinstance(e, Param):
        if e.name not in symbols:
            symbols[e.name] = sp.Symbol(e.name)
        return symbols[e.name]
    if isinstance(e, Neg):
        return -_to_sympy(e.operand, sp, symbols)
    if isinstance(e, Pow):
        base = _to_sympy(e.base, sp, symbols)
        if e.exponent < 0 and base == 0:
            raise DivisionByZero(f"division by zero in {format_expr(e)}")
        return base ** e.exponent
    a = _to_sympy(e.left, sp, symbols)
    b = _to_sympy(e.right, sp, symbols)
    if isinstance(e, Add):
        return a + b
    if isinstance(e, Sub):
        return a - b
    if isinstance(e, Mul):
        return a * b
    if b == 0:
        raise DivisionByZero(f"division by zero in {format_expr(e)}")
    return a / b


@lru_cache(maxsize=65536)
def canonical(e: ParamExpr) -> Canonical:
    import math

    import sympy as sp

    symbols: dict = {}
    s = _to_sympy(e, sp, symbols)
    num, den = sp.fraction(sp.cancel(sp.together(s)))
    if num == 0:
        return Canonical((), ((1, ()),))
    names = sorted(symbols)
    gens = [symbols[n] for n in names]
    if not gens:
        v = Fraction(int(sp.numer(s)), int(sp.denom(s))) if s != 0 else Fraction(0)
        return Canonical(((v.numerator, ()),), ((v.denominator, ()),))
    pn = sp.Poly(num, *gens)
    pd = sp.Poly(den, *gens)

    def terms(p):
        return [(Fraction(int(c.p), int(c.q)), m) for m, c in p.terms(order="lex")]

    tn, td = terms(pn), terms(pd)
    lcm = 1
    for c, _ in tn + td:
        lcm = lcm * c.denominator // math.gcd(lcm, c.denominator)
    ints_n = [(int(c * lcm), m) for c, m in tn]
    ints_d = [(int(c * lcm), m) for c, m in td]
    g = 0
    for c, _ in ints_n + ints_d:
        g = math.gcd(g, c)
    if ints_d[0][0] < 0:
        g = -g
    ints_n = [(c // g, m) for c, m in ints_n]
    ints_d = [(c // g, m) for c, m in ints_d]

    def mono(m):
        return tuple((names[i], k) for i, k in enumerate(m) if k)

    return Canonical(
        tuple((c, mono(m)) for c, m in ints_n),
        tuple((c, mono(m)) for c, m in ints_d),
    )


def _render_poly(terms: tuple) -> str:
    parts = []
    for idx, (c, mono) in enumerate(terms):
        body = "*".join(n if k == 1 else f"{n}^{k}" for n, k in mono)
        mag = abs(c)
        if not body:
            txt = str(mag)
        elif mag == 1:
            txt = body
        else:
            txt = f"{mag}*{body}"
        if idx == 0:
            parts.append(("-" if c < 0 else "") + txt)
        else:
            parts.append((" - " if c < 0 else " + ") + txt)
    return "".join(parts)


def _render(c: Canonical) -> str:
    if c.is_zero:
        return "0"
    num = _render_poly(c.num)
    if c.den == ((1, ()),):
        return num
    if len(c.num) > 1:
        num = f"({num})"
    den = _render_poly(c.den)
    coef, mono = c.den[0]
    single = len(c.den) == 1 and (not mono or (coef == 1 and len(mono) == 1))
    if not single:
        den = f"({den})"
    return f"{num}/{den}"


def canonical_str(e: ParamExpr) -> str:
    return str(canonical(e))
