"""Closed-form scalar expressions: parsing, evaluation, exact differentiation.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := "-" factor | power
    power  := atom ("^" factor)?
    atom   := number | symbol | func "(" expr ")" | "(" expr ")"

``pi`` is a reserved constant. Trees are immutable; :func:`differentiate`
folds constants and drops trivial ``x*0`` / ``x*1`` factors but does no other
algebraic rewriting.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

__all__ = [
    "Expr", "Num", "Sym", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Call",
    "ExprError", "ExprSyntaxError", "UnknownSymbolError", "UnknownFunctionError",
    "EvalDomainError", "FUNCTIONS", "parse", "evaluate", "differentiate",
    "to_string", "symbols_of", "compile_exprs",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh")
RESERVED = {"pi": math.pi}


class ExprError(ValueError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class UnknownSymbolError(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown symbol {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class UnknownFunctionError(ExprError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown function {name!r} at offset {offset}")
        self.name = name
        self.offset = offset


class EvalDomainError(ExprError, ArithmeticError):
    def __init__(self, message: str, subexpr: "Expr | None" = None):
        where = f" in {to_string(subexpr)!r}" if subexpr is not None else ""
        super().__init__(message + where)
        self.subexpr = subexpr


class Expr:
    """Base node. Subclasses are frozen dataclasses."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_string(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Sym(Expr):
    name: str


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Expr


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    end = len(text.rstrip())
    while pos < end:
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            offset = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[offset]!r}", offset)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, symbols: frozenset[str] | None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.symbols = symbols

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str) -> None:
        kind, text, offset = self.take()
        if text != value or kind != "op":
            found = text or "end of input"
            raise ExprSyntaxError(f"expected {value!r}, found {found!r}", offset)

    def expr(self) -> Expr:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            rhs = self.factor()
            node = Mul(node, rhs) if op == "*" else Div(node, rhs)
        return node

    def factor(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.take()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, text, _ = self.peek()
        if kind == "op" and text == "^":
            self.take()
            return Pow(base, self.factor())
        return base

    def atom(self) -> Expr:
        kind, text, offset = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            nxt = self.peek()
            if nxt[0] == "op" and nxt[1] == "(":
                if text not in FUNCTIONS:
                    raise UnknownFunctionError(text, offset)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            if text in FUNCTIONS:
                raise ExprSyntaxError(f"expected '(' after {text}", nxt[2])
            if text in RESERVED:
                return Sym(text)
            if self.symbols is not None and text not in self.symbols:
                raise UnknownSymbolError(text, offset)
            return Sym(text)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = text or "end of input"
        raise ExprSyntaxError(f"unexpected {found!r}", offset)


def parse(text: str, symbols: Iterable[str] | None = None) -> Expr:
    """Parse ``text``; if ``symbols`` is given, any other free name is an error."""
    allowed = frozenset(symbols) if symbols is not None else None
    parser = _Parser(text, allowed)
    node = parser.expr()
    kind, tail, offset = parser.peek()
    if kind != "end":
        raise ExprSyntaxError(f"unexpected {tail!r}", offset)
    return node


# ---------------------------------------------------------------------------
# evaluation


def _pow(a: float, b: float) -> float:
    return math.pow(a, b)


def _apply(func: str, x: float) -> float:
    if func == "log" and x <= 0.0:
        raise ValueError("log of non-positive value")
    if func == "sqrt" and x < 0.0:
        raise ValueError("sqrt of negative value")
    return getattr(math, func)(x)


def evaluate(e: Expr, env: Mapping[str, float]) -> float:
    """IEEE double evaluation; domain violations name the offending node."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Sym):
        if e.name in env:
            return float(env[e.name])
        if e.name in RESERVED:
            return RESERVED[e.name]
        raise UnknownSymbolError(e.name, -1)
    if isinstance(e, Neg):
        return -evaluate(e.arg, env)
    if isinstance(e, Call):
        x = evaluate(e.arg, env)
        try:
            return _apply(e.func, x)
        except (ValueError, OverflowError) as exc:
            raise EvalDomainError(str(exc), e) from None
    a = evaluate(e.left if not isinstance(e, Pow) else e.base, env)
    b = evaluate(e.right if not isinstance(e, Pow) else e.exponent, env)
    if isinstance(e, Add):
        return a + b
    if isinstance(e, Sub):
        return a - b
    if isinstance(e, Mul):
        return a * b
    if isinstance(e, Div):
        if b == 0.0:
            raise EvalDomainError("division by zero", e)
        return a / b
    if isinstance(e, Pow):
        try:
            return _pow(a, b)
        except (ValueError, OverflowError, ZeroDivisionError) as exc:
            raise EvalDomainError(f"invalid power ({exc})", e) from None
    raise TypeError(f"not an expression node: {e!r}")


def symbols_of(e: Expr) -> frozenset[str]:
    if isinstance(e, Sym):
        return frozenset() if e.name in RESERVED else frozenset((e.name,))
    if isinstance(e, Num):
        return frozenset()
    if isinstance(e, (Neg, Call)):
        return symbols_of(e.arg)
    if isinstance(e, Pow):
        return symbols_of(e.base) | symbols_of(e.exponent)
    return symbols_of(e.left) | symbols_of(e.right)


# ---------------------------------------------------------------------------
# folding constructors used by the differentiator

ZERO = Num(0.0)
ONE = Num(1.0)


def _is(e: Expr, value: float) -> bool:
    return isinstance(e, Num) and e.value == value


def _add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value + b.value)
    if _is(a, 0.0):
        return b
    if _is(b, 0.0):
        return a
    if isinstance(b, Neg):
        return _sub(a, b.arg)
    return Add(a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value - b.value)
    if _is(b, 0.0):
        return a
    if _is(a, 0.0):
        return _neg(b)
    return Sub(a, b)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Num):
        return Num(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def _mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num):
        return Num(a.value * b.value)
    if _is(a, 0.0) or _is(b, 0.0):
        return ZERO
    if _is(a, 1.0):
        return b
    if _is(b, 1.0):
        return a
    if _is(a, -1.0):
        return _neg(b)
    if _is(b, -1.0):
        return _neg(a)
    return Mul(a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Num) and isinstance(b, Num) and b.value != 0.0:
        return Num(a.value / b.value)
    if _is(a, 0.0):
        return ZERO
    if _is(b, 1.0):
        return a
    return Div(a, b)


def _powe(a: Expr, b: Expr) -> Expr:
    if _is(b, 0.0):
        return ONE
    if _is(b, 1.0):
        return a
    if isinstance(a, Num) and isinstance(b, Num):
        try:
            return Num(_pow(a.value, b.value))
        except (ValueError, OverflowError, ZeroDivisionError):
            pass
    return Pow(a, b)


def _call(func: str, a: Expr) -> Expr:
    if isinstance(a, Num):
        try:
            return Num(_apply(func, a.value))
        except (ValueError, OverflowError):
            pass
    return Call(func, a)


def _derivative_of_call(func: str, a: Expr) -> Expr:
    """d/du f(u) evaluated at u = a."""
    if func == "sin":
        return _call("cos", a)
    if func == "cos":
        return _neg(_call("sin", a))
    if func == "tan":
        return _div(ONE, _powe(_call("cos", a), Num(2.0)))
    if func == "exp":
        return _call("exp", a)
    if func == "log":
        return _div(ONE, a)
    if func == "sqrt":
        return _div(ONE, _mul(Num(2.0), _call("sqrt", a)))
    if func == "sinh":
        return _call("cosh", a)
    if func == "cosh":
        return _call("sinh", a)
    if func == "tanh":
        return _sub(ONE, _powe(_call("tanh", a), Num(2.0)))
    raise UnknownFunctionError(func, -1)


def differentiate(e: Expr, sym: str) -> Expr:
    """Exact partial derivative of ``e`` with respect to ``sym``."""
    if isinstance(e, Num):
        return ZERO
    if isinstance(e, Sym):
        return ONE if e.name == sym else ZERO
    if sym not in symbols_of(e):
        return ZERO
    if isinstance(e, Neg):
        return _neg(differentiate(e.arg, sym))
    if isinstance(e, Add):
        return _add(differentiate(e.left, sym), differentiate(e.right, sym))
    if isinstance(e, Sub):
        return _sub(differentiate(e.left, sym), differentiate(e.right, sym))
    if isinstance(e, Mul):
        da = differentiate(e.left, sym)
        db = differentiate(e.right, sym)
        return _add(_mul(da, e.right), _mul(e.left, db))
    if isinstance(e, Div):
        da = differentiate(e.left, sym)
        db = differentiate(e.right, sym)
        if _is(db, 0.0):
            return _div(da, e.right)
        num = _sub(_mul(da, e.right), _mul(e.left, db))
        return _div(num, _powe(e.right, Num(2.0)))
    if isinstance(e, Pow):
        a, b = e.base, e.exponent
        da = differentiate(a, sym)
        if sym not in symbols_of(b):
            # d(a^c) = c a^(c-1) da
            return _mul(_mul(b, _powe(a, _sub(b, ONE))), da)
        db = differentiate(b, sym)
        if sym not in symbols_of(a):
            return _mul(_mul(e, _call("log", a)), db)
        inner = _add(_mul(db, _call("log", a)), _div(_mul(b, da), a))
        return _mul(e, inner)
    if isinstance(e, Call):
        return _mul(_derivative_of_call(e.func, e.arg), differentiate(e.arg, sym))
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# printing

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}


def _prec(e: Expr) -> int:
    if isinstance(e, Num):
        return 3 if (e.value < 0 or math.copysign(1.0, e.value) < 0) else 5
    return _PREC.get(type(e), 5)


def _fmt_num(v: float) -> str:
    if v == math.pi:
        return "pi"
    text = repr(abs(v))
    return "-" + text if math.copysign(1.0, v) < 0 else text


def to_string(e: Expr) -> str:
    """Render so that :func:`parse` reproduces an equal-valued tree."""

    def wrap(child: Expr, minimum: int) -> str:
        s = to_string(child)
        return f"({s})" if _prec(child) < minimum else s

    if isinstance(e, Num):
        return _fmt_num(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Neg):
        return "-" + wrap(e.arg, 3)
    if isinstance(e, Call):
        return f"{e.func}({to_string(e.arg)})"
    if isinstance(e, Pow):
        return f"{wrap(e.base, 5)}^{wrap(e.exponent, 3)}"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    lo = _PREC[type(e)]
    return f"{wrap(e.left, lo)} {op} {wrap(e.right, lo + 1)}"


# ---------------------------------------------------------------------------
# compilation to Python callables


def _pysrc(e: Expr, names: Mapping[str, str]) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Sym):
        if e.name in names:
            return names[e.name]
        return repr(RESERVED[e.name])
    if isinstance(e, Neg):
        return f"(-{_pysrc(e.arg, names)})"
    if isinstance(e, Call):
        return f"_f(_{e.func}, {_pysrc(e.arg, names)})"
    if isinstance(e, Pow):
        return f"_pow({_pysrc(e.base, names)}, {_pysrc(e.exponent, names)})"
    op = {Add: "+", Sub: "-", Mul: "*", Div: "/"}[type(e)]
    return f"({_pysrc(e.left, names)} {op} {_pysrc(e.right, names)})"


def _checked(fn: Callable[[float], float], x: float) -> float:
    if fn is math.log and x <= 0.0:
        raise ValueError("log of non-positive value")
    if fn is math.sqrt and x < 0.0:
        raise ValueError("sqrt of negative value")
    return fn(x)


def compile_exprs(
    exprs: Sequence[Expr], coords: Sequence[str]
) -> Callable[..., tuple[float, ...]]:
    """Compile several trees into one function ``f(*coords) -> tuple``.

    Uses the same floating-point operations as :func:`evaluate`, so results
    agree bit for bit. Domain violations raise :class:`EvalDomainError`.
    """
    names = {c: f"a{k}" for k, c in enumerate(coords)}
    body = ", ".join(_pysrc(e, names) for e in exprs)
    args = ", ".join(names[c] for c in coords)
    src = f"def _compiled({args}):\n    return ({body}{',' if len(exprs) == 1 else ''})\n"
    namespace = {"_pow": _pow, "_f": _checked}
    namespace.update({f"_{f}": getattr(math, f) for f in FUNCTIONS})
    exec(compile(src, "<expr>", "exec"), namespace)  # noqa: S102
    raw = namespace["_compiled"]

    def call(*values: float) -> tuple[float, ...]:
        try:
            return raw(*values)
        except ZeroDivisionError:
            raise EvalDomainError("division by zero") from None
        except (ValueError, OverflowError) as exc:
            raise EvalDomainError(str(exc)) from None

    return call
