"""Closed-form expressions in complex parameters ``t1..tr``.

Expression trees are immutable; they support exact evaluation at a complex
parameter point, exact symbolic differentiation with respect to any single
parameter, parsing from a small arithmetic grammar and printing back to
re-parseable source.

Grammar (integer exponents only, ``i`` and ``pi`` are literals)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := unary ('^' int)?
    unary  := '-'? atom
    atom   := number | 'i' | 'pi' | param | func '(' expr ')' | '(' expr ')'
    param  := 't' int
    func   := 'exp' | 'log' | 'sqrt' | 'sin' | 'cos'

All multivalued functions use principal branches (as in :mod:`cmath`).
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import (
    EvalSingularError,
    ExprSyntaxError,
    ParamRangeError,
    UnknownIdentifierError,
)

__all__ = [
    "ParamExpr", "Const", "Param", "Neg", "Add", "Sub", "Mul", "Div", "Pow",
    "Exp", "Log", "Sqrt", "Sin", "Cos",
    "ParameterPoint", "as_parameter_point",
    "parse_expr", "eval_expr", "diff_expr", "expr_to_src", "const", "param",
]

_ZERO = 0j
_ONE = 1 + 0j


# --- parameter points ---------------------------------------------------------

@dataclass(frozen=True)
class ParameterPoint:
    """A point t = (t_1, ..., t_r) in complex parameter space (r may be 0)."""

    coords: tuple

    @classmethod
    def of(cls, *vals) -> "ParameterPoint":
        return cls(tuple(complex(v) for v in vals))

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self) -> Iterator[complex]:
        return iter(self.coords)

    def __getitem__(self, k) -> complex:
        return self.coords[k]


def as_parameter_point(t, num_params=None) -> ParameterPoint:
    """Coerce a number / sequence of numbers / ParameterPoint; check arity."""
    if isinstance(t, ParameterPoint):
        pt = t
    elif isinstance(t, (int, float, complex)):
        pt = ParameterPoint((complex(t),))
    else:
        pt = ParameterPoint(tuple(complex(v) for v in t))
    if num_params is not None and len(pt) != num_params:
        raise ParamRangeError(
            f"parameter point has {len(pt)} coordinates, expected {num_params}")
    return pt


# --- AST nodes ----------------------------------------------------------------

class ParamExpr:
    """Base node. Subclasses implement ``_eval``, ``_diff`` and ``_src``.

    Arithmetic operators build new trees (with light constant folding), so
    expressions compose naturally: ``param(1) * const(2) - 1``.
    """

    prec = 5  # atoms; binary nodes override

    def _eval(self, t: tuple) -> complex:
        raise NotImplementedError

    def _diff(self, j: int) -> "ParamExpr":
        raise NotImplementedError

    def _src(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self._src()

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self._src()!r})"

    # operator sugar -----------------------------------------------------------
    def __add__(self, other):
        return _add(self, _coerce(other))

    def __radd__(self, other):
        return _add(_coerce(other), self)

    def __sub__(self, other):
        return _sub(self, _coerce(other))

    def __rsub__(self, other):
        return _sub(_coerce(other), self)

    def __mul__(self, other):
        return _mul(self, _coerce(other))

    def __rmul__(self, other):
        return _mul(_coerce(other), self)

    def __truediv__(self, other):
        return _div(self, _coerce(other))

    def __rtruediv__(self, other):
        return _div(_coerce(other), self)

    def __neg__(self):
        return _neg(self)

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("exponent must be a Python int")
        return _pow(self, k)


@dataclass(frozen=True, repr=False)
class Const(ParamExpr):
    value: complex

    def _eval(self, t):
        return self.value

    def _diff(self, j):
        return Const(_ZERO)

    def _src(self):
        return _format_const(self.value)


@dataclass(frozen=True, repr=False)
class Param(ParamExpr):
    """1-based parameter reference t<index>."""

    index: int

    def _eval(self, t):
        if not 1 <= self.index <= len(t):
            raise ParamRangeError(
                f"t{self.index} evaluated at a point with {len(t)} coordinates")
        return t[self.index - 1]

    def _diff(self, j):
        return Const(_ONE if j == self.index else _ZERO)

    def _src(self):
        return f"t{self.index}"


@dataclass(frozen=True, repr=False)
class Neg(ParamExpr):
    arg: ParamExpr
    prec = 3

    def _eval(self, t):
        return -self.arg._eval(t)

    def _diff(self, j):
        return _neg(self.arg._diff(j))

    def _src(self):
        return "-" + _wrap(self.arg, 5)


@dataclass(frozen=True, repr=False)
class Add(ParamExpr):
    lhs: ParamExpr
    rhs: ParamExpr
    prec = 1

    def _eval(self, t):
        return self.lhs._eval(t) + self.rhs._eval(t)

    def _diff(self, j):
        return _add(self.lhs._diff(j), self.rhs._diff(j))

    def _src(self):
        return _wrap(self.lhs, 1) + "+" + _wrap(self.rhs, 2)


@dataclass(frozen=True, repr=False)
class Sub(ParamExpr):
    lhs: ParamExpr
    rhs: ParamExpr
    prec = 1

    def _eval(self, t):
        return self.lhs._eval(t) - self.rhs._eval(t)

    def _diff(self, j):
        return _sub(self.lhs._diff(j), self.rhs._diff(j))

    def _src(self):
        return _wrap(self.lhs, 1) + "-" + _wrap(self.rhs, 2)


@dataclass(frozen=True, repr=False)
class Mul(ParamExpr):
    lhs: ParamExpr
    rhs: ParamExpr
    prec = 2

    def _eval(self, t):
        return self.lhs._eval(t) * self.rhs._eval(t)

    def _diff(self, j):
        return _add(_mul(self.lhs._diff(j), self.rhs),
                    _mul(self.lhs, self.rhs._diff(j)))

    def _src(self):
        return _wrap(self.lhs, 2) + "*" + _wrap(self.rhs, 3)


@dataclass(frozen=True, repr=False)
class Div(ParamExpr):
    lhs: ParamExpr
    rhs: ParamExpr
    prec = 2

    def _eval(self, t):
        num = self.lhs._eval(t)
        den = self.rhs._eval(t)
        return num / den  # ZeroDivisionError surfaces via eval_expr

    def _diff(self, j):
        # (u/v)' = u'/v - u v'/v^2
        u, v = self.lhs, self.rhs
        return _sub(_div(u._diff(j), v), _div(_mul(u, v._diff(j)), _pow(v, 2)))

    def _src(self):
        return _wrap(self.lhs, 2) + "/" + _wrap(self.rhs, 3)


@dataclass(frozen=True, repr=False)
class Pow(ParamExpr):
    """Integer power; exponent may be negative."""

    base: ParamExpr
    exponent: int
    prec = 4

    def _eval(self, t):
        return self.base._eval(t) ** self.exponent

    def _diff(self, j):
        k = self.exponent
        if k == 0:
            return Const(_ZERO)
        return _mul(_mul(Const(complex(k)), _pow(self.base, k - 1)),
                    self.base._diff(j))

    def _src(self):
        if isinstance(self.base, Neg):
            base = "-" + _wrap(self.base.arg, 5)
        else:
            base = _wrap(self.base, 5)
        return f"{base}^{self.exponent}"


class _UnaryFunc(ParamExpr):
    """Shared behaviour for the named one-argument functions."""

    name = ""

    def _eval(self, t):
        return self._apply(self.arg._eval(t))

    @staticmethod
    def _apply(z):
        raise NotImplementedError

    def _src(self):
        return f"{self.name}({self.arg._src()})"


@dataclass(frozen=True, repr=False)
class Exp(_UnaryFunc):
    arg: ParamExpr
    name = "exp"
    _apply = staticmethod(cmath.exp)

    def _diff(self, j):
        return _mul(self, self.arg._diff(j))


@dataclass(frozen=True, repr=False)
class Log(_UnaryFunc):
    arg: ParamExpr
    name = "log"
    _apply = staticmethod(cmath.log)

    def _diff(self, j):
        return _div(self.arg._diff(j), self.arg)


@dataclass(frozen=True, repr=False)
class Sqrt(_UnaryFunc):
    arg: ParamExpr
    name = "sqrt"
    _apply = staticmethod(cmath.sqrt)

    def _diff(self, j):
        return _div(self.arg._diff(j), _mul(Const(2 + 0j), self))


@dataclass(frozen=True, repr=False)
class Sin(_UnaryFunc):
    arg: ParamExpr
    name = "sin"
    _apply = staticmethod(cmath.sin)

    def _diff(self, j):
        return _mul(Cos(self.arg), self.arg._diff(j))


@dataclass(frozen=True, repr=False)
class Cos(_UnaryFunc):
    arg: ParamExpr
    name = "cos"
    _apply = staticmethod(cmath.cos)

    def _diff(self, j):
        return _neg(_mul(Sin(self.arg), self.arg._diff(j)))


_FUNCS = {"exp": Exp, "log": Log, "sqrt": Sqrt, "sin": Sin, "cos": Cos}


# --- smart constructors (light constant folding) ------------------------------

def _coerce(v) -> ParamExpr:
    if isinstance(v, ParamExpr):
        return v
    if isinstance(v, (int, float, complex)):
        return Const(complex(v))
    raise TypeError(f"cannot use {type(v).__name__} in an expression")


def _is_const(e, value=None):
    return isinstance(e, Const) and (value is None or e.value == value)


def _add(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value + b.value)
    if _is_const(a, _ZERO):
        return b
    if _is_const(b, _ZERO):
        return a
    return Add(a, b)


def _sub(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value - b.value)
    if _is_const(b, _ZERO):
        return a
    if _is_const(a, _ZERO):
        return _neg(b)
    return Sub(a, b)


def _mul(a, b):
    if _is_const(a) and _is_const(b):
        return Const(a.value * b.value)
    if _is_const(a, _ZERO) or _is_const(b, _ZERO):
        return Const(_ZERO)
    if _is_const(a, _ONE):
        return b
    if _is_const(b, _ONE):
        return a
    return Mul(a, b)


def _div(a, b):
    # never fold away a potentially singular denominator
    if _is_const(a) and _is_const(b) and b.value != 0:
        return Const(a.value / b.value)
    if _is_const(b, _ONE):
        return a
    return Div(a, b)


def _neg(a):
    if _is_const(a):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _pow(a, k):
    if k == 1:
        return a
    if k == 0:
        return Const(_ONE)  # z^0 == 1 for all z, including 0
    if _is_const(a) and not (a.value == 0 and k < 0):
        return Const(a.value ** k)
    return Pow(a, k)


def const(v) -> Const:
    """Constant node from any number."""
    return Const(complex(v))


def param(j: int) -> Param:
    """Parameter node t_j (1-based)."""
    if j < 1:
        raise ParamRangeError(f"parameter index must be >= 1, got {j}")
    return Param(j)


# --- public operations --------------------------------------------------------

def eval_expr(e: ParamExpr, t) -> complex:
    """Evaluate ``e`` at parameter point ``t`` (principal branches).

    Raises EvalSingularError when the point hits a pole of the expression
    (division by zero, log/sqrt branch point at 0 for log, overflow).
    """
    pt = t.coords if isinstance(t, ParameterPoint) else tuple(complex(v) for v in t)
    try:
        return complex(e._eval(pt))
    except ZeroDivisionError:
        raise EvalSingularError("division by zero", expr=e._src(), at=pt) from None
    except ValueError as exc:  # cmath.log(0), 0**negative on some paths
        raise EvalSingularError(str(exc), expr=e._src(), at=pt) from None
    except OverflowError as exc:
        raise EvalSingularError(f"overflow: {exc}", expr=e._src(), at=pt) from None


def diff_expr(e: ParamExpr, j: int) -> ParamExpr:
    """Exact derivative of ``e`` with respect to parameter t_j (1-based)."""
    if j < 1:
        raise ParamRangeError(f"parameter index must be >= 1, got {j}")
    return e._diff(j)


def expr_to_src(e: ParamExpr) -> str:
    """Print to source that re-parses to an evaluation-identical tree."""
    return e._src()


# --- printing helpers ---------------------------------------------------------

def _wrap(e: ParamExpr, need: int) -> str:
    s = e._src()
    return f"({s})" if e.prec < need else s


def _format_real(v: float) -> str:
    return repr(v)


def _format_const(z: complex) -> str:
    re_, im = z.real, z.imag
    if im == 0.0:
        if re_ >= 0:
            return _format_real(re_)
        return f"(-{_format_real(-re_)})"
    if re_ == 0.0:
        if im == 1.0:
            return "i"
        if im > 0:
            return f"({_format_real(im)}*i)"
        return f"(-{_format_real(-im)}*i)"
    re_part = _format_real(re_) if re_ >= 0 else f"-{_format_real(-re_)}"
    if im > 0:
        return f"({re_part}+{_format_real(im)}*i)"
    return f"({re_part}-{_format_real(-im)}*i)"


# --- parser -------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<num>  (?:\d+\.\d*|\.\d+|\d+) (?:[eE][+-]?\d+)? )
  | (?P<name> [A-Za-z][A-Za-z0-9]* )
  | (?P<sym>  [-+*/^()] )
    """,
    re.VERBOSE,
)

_PARAM_NAME_RE = re.compile(r"^t(\d+)$")


def _tokenize(src: str):
    toks = []
    pos = 0
    n = len(src)
    while pos < n:
        ch = src[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ExprSyntaxError(
                f"unexpected character {ch!r}", position=pos,
                expected="number, identifier, operator or parenthesis")
        kind = m.lastgroup
        toks.append((kind, m.group(), pos))
        pos = m.end()
    toks.append(("end", "", n))
    return toks


class _Parser:
    def __init__(self, src: str, num_params: int):
        self.src = src
        self.num_params = num_params
        self.toks = _tokenize(src)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def advance(self):
        tok = self.toks[self.k]
        self.k += 1
        return tok

    def fail(self, expected: str):
        kind, text, pos = self.peek()
        got = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(
            f"expected {expected}, got {got}", position=pos, expected=expected)

    def accept_sym(self, *syms) -> str | None:
        kind, text, _ = self.peek()
        if kind == "sym" and text in syms:
            self.advance()
            return text
        return None

    def parse(self) -> ParamExpr:
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail("end of input or operator")
        return e

    def expr(self) -> ParamExpr:
        e = self.term()
        while True:
            op = self.accept_sym("+", "-")
            if op is None:
                return e
            rhs = self.term()
            e = _add(e, rhs) if op == "+" else _sub(e, rhs)

    def term(self) -> ParamExpr:
        e = self.factor()
        while True:
            op = self.accept_sym("*", "/")
            if op is None:
                return e
            rhs = self.factor()
            e = _mul(e, rhs) if op == "*" else _div(e, rhs)

    def factor(self) -> ParamExpr:
        e = self.unary()
        if self.accept_sym("^"):
            e = _pow(e, self.int_exponent())
        return e

    def int_exponent(self) -> int:
        sign = -1 if self.accept_sym("-") else 1
        kind, text, pos = self.peek()
        if kind != "num" or not text.isdigit():
            self.fail("integer exponent")
        self.advance()
        return sign * int(text)

    def unary(self) -> ParamExpr:
        if self.accept_sym("-"):
            return _neg(self.atom())
        return self.atom()

    def atom(self) -> ParamExpr:
        kind, text, pos = self.peek()
        if kind == "num":
            self.advance()
            return Const(complex(float(text)))
        if kind == "name":
            self.advance()
            return self.named(text, pos)
        if self.accept_sym("("):
            e = self.expr()
            if not self.accept_sym(")"):
                self.fail("')'")
            return e
        self.fail("number, identifier or '('")

    def named(self, text: str, pos: int) -> ParamExpr:
        if text == "i":
            return Const(1j)
        if text == "pi":
            return Const(complex(math.pi))
        if text in _FUNCS:
            if not self.accept_sym("("):
                self.fail(f"'(' after {text}")
            e = self.expr()
            if not self.accept_sym(")"):
                self.fail("')'")
            return _FUNCS[text](e)
        m = _PARAM_NAME_RE.match(text)
        if m:
            idx = int(m.group(1))
            if not 1 <= idx <= self.num_params:
                raise ParamRangeError(
                    f"parameter t{idx} out of range 1..{self.num_params}",
                    position=pos)
            return Param(idx)
        raise UnknownIdentifierError(f"unknown identifier {text!r}", position=pos)


def parse_expr(src: str, num_params: int) -> ParamExpr:
    """Parse expression source with parameters ``t1 .. t<num_params>``."""
    if isinstance(src, ParamExpr):
        return src
    return _Parser(src, num_params).parse()
