"""Complex-analytic expressions in one variable z.

Grammar (whitespace insensitive)::

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := ("-" | "+") unary | power
    power    := atom ("^" exponent)?
    exponent := ["-"] INT | "(" ["-"] INT ")"
    atom     := NUMBER | "i" | "z" | FUNC "(" expr ")" | "(" expr ")"
    FUNC     := "exp" | "log"
    NUMBER   := decimal real, optional exponent part (1, 0.5, .5, 2e-3)

Exponents are integers in [-64, 64]. log is the principal branch.

Evaluation is vectorized over numpy arrays. A divisor that evaluates to
exactly zero is a pole; in strict mode that raises, otherwise the entry
becomes nan so callers can repair removable singularities.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np

MAX_EXPONENT = 64
FUNCTIONS = ("exp", "log")


class ExprError(ValueError):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, offset: int, expected=()):
        self.offset = offset
        self.expected = tuple(sorted(expected))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class ExponentRangeError(ParseError):
    pass


class EvaluationError(ExprError, ArithmeticError):
    pass


class PoleError(EvaluationError):
    pass


class LogZeroError(EvaluationError):
    pass


# --------------------------------------------------------------------------
# AST

@dataclass(frozen=True)
class Num:
    value: complex
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class ImagUnit:
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Var:
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Neg:
    arg: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"
    pos: int = field(default=-1, compare=False)


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int
    pos: int = field(default=-1, compare=False)

    def __post_init__(self):
        if not -MAX_EXPONENT <= self.exponent <= MAX_EXPONENT:
            raise ExponentRangeError(f"exponent {self.exponent} out of range", self.pos)


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"
    pos: int = field(default=-1, compare=False)


Expr = Union[Num, ImagUnit, Var, Neg, BinOp, Pow, Func]


# --------------------------------------------------------------------------
# Parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass
class _Tok:
    kind: str  # num, name, op, end
    text: str
    pos: int  # byte offset


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    i = 0
    n = len(text)

    def byte_offset(k):
        return len(text[:k].encode("utf-8"))

    while True:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            break
        m = _TOKEN.match(text, i)
        if m is None or m.end() == i:
            raise ParseError(f"unexpected character {text[i]!r}", byte_offset(i),
                             ("number", "z", "i", "(", "-", *FUNCTIONS))
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), byte_offset(start)))
        i = m.end()
    toks.append(_Tok("end", "", len(text.encode("utf-8"))))
    return toks


_ATOM_START = ("number", "z", "i", "(", "-", "+", *FUNCTIONS)


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.k = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.k]

    def advance(self) -> _Tok:
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect_op(self, op: str) -> _Tok:
        if self.tok.kind != "op" or self.tok.text != op:
            raise ParseError(f"unexpected {self._describe()}", self.tok.pos, (op,))
        return self.advance()

    def _describe(self) -> str:
        return "end of input" if self.tok.kind == "end" else f"token {self.tok.text!r}"

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            raise ParseError(f"unexpected {self._describe()}", self.tok.pos,
                             ("+", "-", "*", "/", "^", "end of input"))
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            t = self.advance()
            left = BinOp(t.text, left, self.term(), t.pos)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            t = self.advance()
            left = BinOp(t.text, left, self.unary(), t.pos)
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            t = self.advance()
            return Neg(self.unary(), t.pos)
        if self.tok.kind == "op" and self.tok.text == "+":
            self.advance()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            t = self.advance()
            return Pow(base, self.exponent(), t.pos)
        return base

    def exponent(self) -> int:
        paren = False
        if self.tok.kind == "op" and self.tok.text == "(":
            self.advance()
            paren = True
        sign = 1
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            sign = -1
        t = self.tok
        if t.kind != "num" or not t.text.isdigit():
            expected = ("integer",) if paren or sign < 0 else ("integer", "-", "(")
            raise ParseError(f"expected integer exponent, got {self._describe()}", t.pos, expected)
        self.advance()
        value = sign * int(t.text)
        if not -MAX_EXPONENT <= value <= MAX_EXPONENT:
            raise ExponentRangeError(
                f"exponent {value} outside [-{MAX_EXPONENT}, {MAX_EXPONENT}]", t.pos)
        if paren:
            self.expect_op(")")
        return value

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(complex(float(t.text)), t.pos)
        if t.kind == "name":
            self.advance()
            if t.text == "z":
                return Var(t.pos)
            if t.text == "i":
                return ImagUnit(t.pos)
            if t.text in FUNCTIONS:
                self.expect_op("(")
                arg = self.expr()
                self.expect_op(")")
                return Func(t.text, arg, t.pos)
            raise ParseError(f"unknown identifier {t.text!r}", t.pos, ("z", "i", *FUNCTIONS))
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected {self._describe()}", t.pos, _ATOM_START)


def parse(text: str) -> Expr:
    if not text or not text.strip():
        raise ParseError("empty expression", 0, _ATOM_START)
    return _Parser(text).parse()


# --------------------------------------------------------------------------
# Printing

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _fmt_real(x: float) -> str:
    if np.isfinite(x) and x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _num_repr(v: complex) -> tuple[str, int]:
    re_, im = v.real, v.imag
    if im == 0:
        if re_ >= 0:
            return _fmt_real(re_), _PREC_ATOM
        return "-" + _fmt_real(-re_), _PREC_NEG
    if re_ == 0:
        if im == 1:
            return "i", _PREC_ATOM
        if im == -1:
            return "-i", _PREC_NEG
        if im > 0:
            return f"{_fmt_real(im)}*i", _PREC_MUL
        return f"-{_fmt_real(-im)}*i", _PREC_NEG
    sign = "+" if im > 0 else "-"
    return f"({_fmt_real(re_)} {sign} {_fmt_real(abs(im))}*i)", _PREC_ATOM


def _show(e: Expr) -> tuple[str, int]:
    if isinstance(e, Num):
        return _num_repr(e.value)
    if isinstance(e, ImagUnit):
        return "i", _PREC_ATOM
    if isinstance(e, Var):
        return "z", _PREC_ATOM
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})", _PREC_ATOM
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, _PREC_NEG), _PREC_NEG
    if isinstance(e, Pow):
        exp = str(e.exponent)
        return f"{_wrap(e.base, _PREC_ATOM)}^{exp}", _PREC_POW
    if isinstance(e, BinOp):
        if e.op in "+-":
            return f"{_wrap(e.left, _PREC_ADD)} {e.op} {_wrap(e.right, _PREC_MUL)}", _PREC_ADD
        return f"{_wrap(e.left, _PREC_MUL)}{e.op}{_wrap(e.right, _PREC_NEG)}", _PREC_MUL
    raise TypeError(f"not an expression node: {e!r}")


def _wrap(e: Expr, min_prec: int) -> str:
    s, p = _show(e)
    return s if p >= min_prec else f"({s})"


def to_text(e: Expr) -> str:
    """Print an expression so that parse(to_text(e)) == e for parsed trees."""
    return _show(e)[0]


# --------------------------------------------------------------------------
# Evaluation

def _eval(e: Expr, z: np.ndarray, bad: np.ndarray | None) -> np.ndarray:
    if isinstance(e, Num):
        return np.full(z.shape, e.value, dtype=complex)
    if isinstance(e, ImagUnit):
        return np.full(z.shape, 1j, dtype=complex)
    if isinstance(e, Var):
        return z
    if isinstance(e, Neg):
        return -_eval(e.arg, z, bad)
    if isinstance(e, BinOp):
        a = _eval(e.left, z, bad)
        b = _eval(e.right, z, bad)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        zero = b == 0
        if zero.any():
            if bad is None:
                raise PoleError(f"division by zero (operator at offset {e.pos})")
            bad |= zero
            b = np.where(zero, np.nan, b)
        return a / b
    if isinstance(e, Pow):
        a = _eval(e.base, z, bad)
        if e.exponent < 0:
            zero = a == 0
            if zero.any():
                if bad is None:
                    raise PoleError(f"negative power of zero (offset {e.pos})")
                bad |= zero
                a = np.where(zero, np.nan, a)
        return a ** e.exponent
    if isinstance(e, Func):
        a = _eval(e.arg, z, bad)
        if e.name == "exp":
            return np.exp(a)
        zero = a == 0
        if zero.any():
            if bad is None:
                raise LogZeroError(f"log(0) (offset {e.pos})")
            bad |= zero
            a = np.where(zero, np.nan, a)
        return np.log(a)
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e: Expr, z, strict: bool = True):
    """Evaluate e at z (scalar or array).

    strict=True raises PoleError/LogZeroError on an exact-zero divisor or
    log argument; strict=False puts nan at those entries instead.
    """
    scalar = np.ndim(z) == 0
    za = np.asarray(z, dtype=complex)
    bad = None if strict else np.zeros(za.shape, dtype=bool)
    with np.errstate(all="ignore"):
        out = _eval(e, za, bad)
        if bad is not None and bad.any():
            out = np.where(bad, np.nan + 0j, out)
    if scalar:
        return complex(out)
    return out


# --------------------------------------------------------------------------
# Constant-folding constructors and differentiation

def _const(e: Expr) -> complex | None:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, ImagUnit):
        return 1j
    return None


def add(a: Expr, b: Expr) -> Expr:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Num(ca + cb)
    if ca == 0:
        return b
    if cb == 0:
        return a
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Num(ca - cb)
    if cb == 0:
        return a
    if ca == 0:
        return neg(b)
    return BinOp("-", a, b)


def neg(a: Expr) -> Expr:
    ca = _const(a)
    if ca is not None:
        return Num(-ca)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def mul(a: Expr, b: Expr) -> Expr:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None:
        return Num(ca * cb)
    if ca == 0 or cb == 0:
        return Num(0j)
    if ca == 1:
        return b
    if cb == 1:
        return a
    if ca == -1:
        return neg(b)
    if cb == -1:
        return neg(a)
    if cb is not None:
        # keep constants on the left: 2*z rather than z*2
        return mul(b, a)
    if ca is not None and isinstance(b, BinOp) and b.op == "*" and _const(b.left) is not None:
        return mul(Num(ca * _const(b.left)), b.right)
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    ca, cb = _const(a), _const(b)
    if ca is not None and cb is not None and cb != 0:
        return Num(ca / cb)
    if ca == 0 and cb != 0:
        return Num(0j)
    if cb == 1:
        return a
    if isinstance(a, Neg):
        return neg(div(a.arg, b))
    if ca is not None and ca.real < 0 and ca.imag == 0:
        return neg(div(Num(-ca), b))
    return BinOp("/", a, b)


def power(a: Expr, n: int) -> Expr:
    if n == 0:
        return Num(1 + 0j)
    if n == 1:
        return a
    ca = _const(a)
    if ca is not None and (ca != 0 or n > 0):
        return Num(ca**n)
    if isinstance(a, Pow) and abs(a.exponent * n) <= MAX_EXPONENT:
        return power(a.base, a.exponent * n)
    if abs(n) > MAX_EXPONENT:
        step = MAX_EXPONENT if n > 0 else -MAX_EXPONENT
        return mul(Pow(a, step), power(a, n - step))
    return Pow(a, n)


def differentiate(e: Expr) -> Expr:
    """Symbolic d/dz with constant folding of literal subtrees."""
    if isinstance(e, (Num, ImagUnit)):
        return Num(0j)
    if isinstance(e, Var):
        return Num(1 + 0j)
    if isinstance(e, Neg):
        return neg(differentiate(e.arg))
    if isinstance(e, BinOp):
        da, db = differentiate(e.left), differentiate(e.right)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, e.right), mul(e.left, db))
        # quotient rule, with the common 1/v case kept compact
        if _const(da) == 0:
            return neg(div(mul(e.left, db), power(e.right, 2)))
        return div(sub(mul(da, e.right), mul(e.left, db)), power(e.right, 2))
    if isinstance(e, Pow):
        n = e.exponent
        return mul(mul(Num(complex(n)), power(e.base, n - 1)), differentiate(e.base))
    if isinstance(e, Func):
        du = differentiate(e.arg)
        if e.name == "exp":
            return mul(du, e)
        return div(du, e.arg)
    raise TypeError(f"not an expression node: {e!r}")


def fold(e: Expr) -> Expr:
    """Rebuild e through the folding constructors."""
    if isinstance(e, (Num, ImagUnit, Var)):
        return e
    if isinstance(e, Neg):
        return neg(fold(e.arg))
    if isinstance(e, BinOp):
        a, b = fold(e.left), fold(e.right)
        return {"+": add, "-": sub, "*": mul, "/": div}[e.op](a, b)
    if isinstance(e, Pow):
        return power(fold(e.base), e.exponent)
    if isinstance(e, Func):
        return Func(e.name, fold(e.arg))
    raise TypeError(f"not an expression node: {e!r}")


def depends_on_z(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, (Num, ImagUnit)):
        return False
    if isinstance(e, (Neg, Func)):
        return depends_on_z(e.arg)
    if isinstance(e, Pow):
        return depends_on_z(e.base)
    return depends_on_z(e.left) or depends_on_z(e.right)


def pole_probe(e: Expr, z0: complex, radius: float = 1e-4, n: int = 32) -> dict:
    """Sample e on two small circles around z0 and report magnitude growth.

    A removable singularity (or regular point) keeps max|e| bounded as the
    radius halves; a pole of order k multiplies it by about 2**k.
    """
    angles = np.exp(2j * np.pi * np.arange(n) / n)
    m1 = np.max(np.abs(evaluate(e, z0 + radius * angles, strict=False)))
    m2 = np.max(np.abs(evaluate(e, z0 + 0.5 * radius * angles, strict=False)))
    growth = m2 / m1 if m1 > 0 else 1.0
    mean = complex(np.mean(evaluate(e, z0 + radius * angles, strict=False)))
    return {"max_outer": float(m1), "max_inner": float(m2), "growth": float(growth),
            "pole": bool(growth > 1.5 or not np.isfinite(m2)), "mean": mean}


# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AnalyticFn:
    """An expression together with its (lazily built) symbolic derivative."""

    ast: Expr

    @classmethod
    def from_text(cls, text: str) -> "AnalyticFn":
        return cls(parse(text))

    @property
    def text(self) -> str:
        return to_text(self.ast)

    @cached_property
    def derivative_ast(self) -> Expr:
        return differentiate(self.ast)

    @cached_property
    def derivative(self) -> "AnalyticFn":
        return AnalyticFn(self.derivative_ast)

    @cached_property
    def is_constant(self) -> bool:
        return not depends_on_z(self.ast)

    def __call__(self, z, strict: bool = True):
        return evaluate(self.ast, z, strict=strict)

    def __str__(self) -> str:
        return self.text
