"""A small expression language for scalar fields and form components.

Grammar (whitespace is insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary ('^' exponent)?
    unary  := '-'? atom
    atom   := number | 'i' | identifier | identifier '(' expr ')' | '(' expr ')'

The exponent of ``^`` is a real constant.  It is written as a signed literal
(``x^-1``, ``y^2.5``) or as a parenthesized expression built only from
literals (``r^(1/3)``), which is folded when parsing; ``^`` associates to the
right.  Note that unary minus binds tighter than ``^``: ``-x^2`` is ``(-x)^2``.

``i`` is the imaginary unit.  Functions: exp, log, sqrt, sin, cos, tan, conj.
``conj`` evaluates its argument with ``i`` replaced by ``-i``; every other leaf
(number, chart variable, parameter) is real.
"""

from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import jets
from .jets import Jet, SingularConstantTerm

__all__ = [
    "Expr",
    "Num",
    "Imag",
    "Var",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Neg",
    "Call",
    "ParseError",
    "UnboundIdentifier",
    "FUNCTIONS",
    "parse",
    "pretty",
    "eval_jet",
    "eval_value",
    "free_names",
    "substitute",
    "denominators",
    "conj_expr",
]

FUNCTIONS = ("exp", "log", "sqrt", "sin", "cos", "tan", "conj")
CONSTANTS = {"pi": math.pi}


class ParseError(ValueError):
    """Malformed input; carries the byte offset and the expected tokens."""

    def __init__(self, offset: int, message: str, expected: Iterable[str] = ()):
        self.offset = offset
        self.message = message
        self.expected = frozenset(expected)
        exp = ""
        if self.expected:
            exp = " (expected " + ", ".join(sorted(repr(e) for e in self.expected)) + ")"
        super().__init__(f"offset {offset}: {message}{exp}")


class UnboundIdentifier(KeyError):
    pass


# ----------------------------------------------------------------------
# AST


class Expr:
    """Base class of expression nodes (immutable)."""

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True, eq=True)
class Num(Expr):
    value: float


@dataclass(frozen=True, eq=True)
class Imag(Expr):
    pass


I = Imag()


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, eq=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exponent: float


@dataclass(frozen=True, eq=True)
class Neg(Expr):
    operand: Expr


@dataclass(frozen=True, eq=True)
class Call(Expr):
    func: str
    arg: Expr


_BINARY = {"+": Add, "-": Sub, "*": Mul, "/": Div}

# ----------------------------------------------------------------------
# tokenizer

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'num', 'ident', 'op', 'end'
    text: str
    offset: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            toks.append(_Tok("end", "", n))
            return toks
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), m.start(kind)))
        pos = m.end()


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.k]

    def advance(self) -> _Tok:
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind == "end":
            raise ParseError(self.tok.offset, f"missing {text!r}", {text})
        self.advance()

    def fail(self, message: str, expected: Iterable[str]):
        raise ParseError(self.tok.offset, message, expected)

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "end":
            self.fail(f"unexpected {self.tok.text!r}", {"+", "-", "*", "/", "^", "end of input"})
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            left = _BINARY[op](left, self.term())
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            left = _BINARY[op](left, self.factor())
        return left

    def factor(self) -> Expr:
        base = self.unary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> float:
        start = self.tok.offset
        node = self.unary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            node = Pow(node, self.exponent())
        try:
            value = _fold_constant(node)
        except (TypeError, ValueError, ZeroDivisionError, OverflowError):
            value = None
        if value is None or abs(value.imag) > 0 or not math.isfinite(value.real):
            raise ParseError(start, "exponent must be a real constant", {"number"})
        return value.real

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.atom())
        return self.atom()

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Num(float(t.text))
        if t.kind == "ident":
            self.advance()
            if self.tok.kind == "op" and self.tok.text == "(":
                if t.text not in FUNCTIONS:
                    raise ParseError(t.offset, f"unknown function {t.text!r}", FUNCTIONS)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(t.text, arg)
            if t.text in FUNCTIONS:
                raise ParseError(self.tok.offset, f"function {t.text!r} needs an argument", {"("})
            if t.text == "i":
                return I
            return Var(t.text)
        if t.kind == "op" and t.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.fail(
            "expected an operand" if t.kind != "end" else "unexpected end of input",
            {"number", "identifier", "i", "("},
        )


def _fold_constant(e: Expr) -> complex | None:
    """Value of a literal-only expression, or None if it mentions names."""
    if isinstance(e, Num):
        return complex(e.value)
    if isinstance(e, Neg):
        v = _fold_constant(e.operand)
        return None if v is None else -v
    if isinstance(e, (Add, Sub, Mul, Div)):
        a, b = _fold_constant(e.left), _fold_constant(e.right)
        if a is None or b is None:
            return None
        if isinstance(e, Add):
            return a + b
        if isinstance(e, Sub):
            return a - b
        if isinstance(e, Mul):
            return a * b
        return a / b
    if isinstance(e, Pow):
        v = _fold_constant(e.base)
        if v is None:
            return None
        return complex(v.real ** e.exponent) if v.imag == 0 and v.real > 0 else v**e.exponent
    return None


def parse(text: str) -> Expr:
    """Parse DSL text into an :class:`Expr`; raises :class:`ParseError`."""
    if not isinstance(text, str):
        raise TypeError("parse expects a string")
    return _Parser(text).parse()


# ----------------------------------------------------------------------
# printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Pow: 3, Neg: 4}


def _fmt_num(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _prec(e: Expr) -> int:
    return _PREC.get(type(e), 5)


def pretty(e: Expr) -> str:
    """Canonical text form; ``parse(pretty(e)) == e`` for every AST."""
    if isinstance(e, Num):
        s = _fmt_num(e.value)
        return s if e.value >= 0 else f"({s})"
    if isinstance(e, Imag):
        return "i"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({pretty(e.arg)})"
    if isinstance(e, Neg):
        inner = pretty(e.operand)
        if _prec(e.operand) < 5 or (isinstance(e.operand, Num) and e.operand.value < 0):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Pow):
        base = pretty(e.base)
        if _prec(e.base) < 5 or (isinstance(e.base, Num) and e.base.value < 0):
            base = f"({base})"
        x = e.exponent
        ex = _fmt_num(x) if x >= 0 else "-" + _fmt_num(-x)
        return f"{base}^{ex}"
    if isinstance(e, (Add, Sub, Mul, Div)):
        p = _prec(e)
        op = {Add: " + ", Sub: " - ", Mul: "*", Div: "/"}[type(e)]
        left = pretty(e.left)
        if _prec(e.left) < p:
            left = f"({left})"
        right = pretty(e.right)
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left}{op}{right}"
    raise TypeError(f"not an expression node: {e!r}")


# ----------------------------------------------------------------------
# tree utilities


def _children(e: Expr) -> tuple[Expr, ...]:
    if isinstance(e, (Add, Sub, Mul, Div)):
        return (e.left, e.right)
    if isinstance(e, Pow):
        return (e.base,)
    if isinstance(e, Neg):
        return (e.operand,)
    if isinstance(e, Call):
        return (e.arg,)
    return ()


def free_names(e: Expr) -> set[str]:
    """All identifiers referenced by ``e``."""
    if isinstance(e, Var):
        return {e.name}
    out: set[str] = set()
    for c in _children(e):
        out |= free_names(c)
    return out


def substitute(e: Expr, defs: Mapping[str, Expr]) -> Expr:
    """Replace variables by expressions (used for complex-coordinate shorthands)."""
    if isinstance(e, Var):
        return defs.get(e.name, e)
    if isinstance(e, (Add, Sub, Mul, Div)):
        return type(e)(substitute(e.left, defs), substitute(e.right, defs))
    if isinstance(e, Pow):
        return Pow(substitute(e.base, defs), e.exponent)
    if isinstance(e, Neg):
        return Neg(substitute(e.operand, defs))
    if isinstance(e, Call):
        return Call(e.func, substitute(e.arg, defs))
    return e


def conj_expr(e: Expr) -> Expr:
    return Call("conj", e)


def denominators(e: Expr) -> list[Expr]:
    """Subexpressions whose vanishing makes ``e`` singular."""
    out: list[Expr] = []
    if isinstance(e, Div):
        out.append(e.right)
    elif isinstance(e, Pow) and (e.exponent < 0 or not float(e.exponent).is_integer()):
        out.append(e.base)
    elif isinstance(e, Call) and e.func in ("log", "sqrt"):
        out.append(e.arg)
    elif isinstance(e, Call) and e.func == "tan":
        out.append(Call("cos", e.arg))
    for c in _children(e):
        out.extend(denominators(c))
    return out


# ----------------------------------------------------------------------
# evaluation


def _num_call(func: str, v: complex) -> complex:
    if func in ("log", "sqrt") and v == 0:
        raise SingularConstantTerm(f"{func} of zero")
    return {
        "exp": cmath.exp,
        "log": cmath.log,
        "sqrt": cmath.sqrt,
        "sin": cmath.sin,
        "cos": cmath.cos,
        "tan": cmath.tan,
    }[func](v)


def _num_pow(v: complex, r: float) -> complex:
    if float(r).is_integer():
        if v == 0 and r < 0:
            raise SingularConstantTerm("negative power of zero")
        return v ** int(r)
    if v == 0:
        raise SingularConstantTerm("fractional power of zero")
    return cmath.exp(r * cmath.log(v))


def _evaluate(e: Expr, env: Mapping[str, object], conj: bool):
    """Evaluate to a python complex or a Jet, depending on the leaves."""
    if isinstance(e, Num):
        return complex(e.value)
    if isinstance(e, Imag):
        return -1j if conj else 1j
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            if e.name in CONSTANTS:
                return complex(CONSTANTS[e.name])
            raise UnboundIdentifier(e.name) from None
    if isinstance(e, Neg):
        return -_evaluate(e.operand, env, conj)
    if isinstance(e, Add):
        return _evaluate(e.left, env, conj) + _evaluate(e.right, env, conj)
    if isinstance(e, Sub):
        return _evaluate(e.left, env, conj) - _evaluate(e.right, env, conj)
    if isinstance(e, Mul):
        return _evaluate(e.left, env, conj) * _evaluate(e.right, env, conj)
    if isinstance(e, Div):
        a = _evaluate(e.left, env, conj)
        b = _evaluate(e.right, env, conj)
        if not isinstance(b, Jet) and b == 0:
            raise SingularConstantTerm("division by zero")
        return a / b
    if isinstance(e, Pow):
        v = _evaluate(e.base, env, conj)
        if isinstance(v, Jet):
            return jets.power(v, e.exponent)
        return _num_pow(v, e.exponent)
    if isinstance(e, Call):
        if e.func == "conj":
            return _evaluate(e.arg, env, not conj)
        v = _evaluate(e.arg, env, conj)
        if isinstance(v, Jet):
            return jets.jet_elementary(e.func, v)
        return _num_call(e.func, v)
    raise TypeError(f"not an expression node: {e!r}")


def _env(
    variables: Sequence[str],
    values: Sequence,
    params: Mapping[str, float] | None,
) -> dict[str, object]:
    env: dict[str, object] = {}
    for name, val in (params or {}).items():
        if isinstance(val, Jet):
            # a real-valued field supplied as a jet (e.g. a numerically
            # integrated function); conj leaves it untouched like any real leaf
            env[name] = val
            continue
        v = complex(val)
        if v.imag != 0:
            raise ValueError(f"parameter {name!r} must be real")
        env[name] = v
    for name, val in zip(variables, values):
        env[name] = val
    return env


def eval_jet(
    e: Expr | str,
    point: Sequence[float],
    params: Mapping[str, float] | None = None,
    dim: int | None = None,
    order: int = 6,
    variables: Sequence[str] | None = None,
    coords: Sequence[Jet] | None = None,
) -> Jet:
    """Jet of ``e`` at ``point``.

    ``variables`` names the chart coordinates (defaults to x0, x1, ...).  When
    ``coords`` is given those jets are used for the coordinates instead of
    fresh coordinate jets, which allows evaluating on a larger chart.
    """
    if isinstance(e, str):
        e = parse(e)
    if coords is None:
        dim = len(point) if dim is None else dim
        if dim != len(point):
            raise ValueError(f"point has {len(point)} entries but dim={dim}")
        coords = jets.coordinate_jets([float(p) for p in point], order)
    ref = coords[0]
    if variables is None:
        variables = [f"x{k}" for k in range(len(coords))]
    env = _env(variables, coords, params)
    out = _evaluate(e, env, False)
    return jets.as_jet(out, ref.dim, ref.order)


def eval_value(
    e: Expr | str,
    point: Sequence[float],
    params: Mapping[str, float] | None = None,
    variables: Sequence[str] | None = None,
) -> complex:
    """Plain complex value of ``e`` at ``point`` (no derivatives)."""
    if isinstance(e, str):
        e = parse(e)
    if variables is None:
        variables = [f"x{k}" for k in range(len(point))]
    env = _env(variables, [complex(float(p)) for p in point], params)
    return complex(_evaluate(e, env, False))
