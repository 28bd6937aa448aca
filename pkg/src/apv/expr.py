"""A small expression language for integrands, with exact differentiation.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := ('-' | '+') factor | base ('^' integer)?
    base   := number | 'x' | ident | '(' expr ')' | func '(' expr ')'
    func   := 'exp' | 'ln' | 'sin' | 'cos'

Exponents are (optionally signed) integer literals, which keeps the
language closed under differentiation. Nodes are immutable and may be
shared; derivatives reuse subtrees, and evaluation memoizes per node so
repeated differentiation grows cost roughly linearly rather than
exponentially.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import IntegrandSpec
from .errors import EvaluationFailure, ExprSyntaxError, UnboundParameter, UnknownIdentifier

FUNCTIONS = ("exp", "ln", "sin", "cos")


class Node:
    __slots__ = ()


@dataclass(frozen=True, eq=False)
class Const(Node):
    value: float


@dataclass(frozen=True, eq=False)
class Var(Node):
    pass


@dataclass(frozen=True, eq=False)
class Param(Node):
    name: str


@dataclass(frozen=True, eq=False)
class Neg(Node):
    arg: Node


@dataclass(frozen=True, eq=False)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True, eq=False)
class Pow(Node):
    base: Node
    exponent: int


@dataclass(frozen=True, eq=False)
class Func(Node):
    name: str
    arg: Node


X = Var()
ZERO = Const(0.0)
ONE = Const(1.0)


# constructors with constant folding

def _is(node, value):
    return isinstance(node, Const) and node.value == value


def const(v):
    return Const(float(v))


def neg(u):
    if isinstance(u, Const):
        return const(-u.value)
    if isinstance(u, Neg):
        return u.arg
    return Neg(u)


def add(u, v):
    if isinstance(u, Const) and isinstance(v, Const):
        return const(u.value + v.value)
    if _is(u, 0):
        return v
    if _is(v, 0):
        return u
    return BinOp("+", u, v)


def sub(u, v):
    if isinstance(u, Const) and isinstance(v, Const):
        return const(u.value - v.value)
    if _is(v, 0):
        return u
    if _is(u, 0):
        return neg(v)
    return BinOp("-", u, v)


def mul(u, v):
    if isinstance(u, Const) and isinstance(v, Const):
        return const(u.value * v.value)
    if _is(u, 0) or _is(v, 0):
        return ZERO
    if _is(u, 1):
        return v
    if _is(v, 1):
        return u
    if _is(u, -1):
        return neg(v)
    if _is(v, -1):
        return neg(u)
    return BinOp("*", u, v)


def div(u, v):
    if isinstance(u, Const) and isinstance(v, Const) and v.value != 0:
        return const(u.value / v.value)
    if _is(u, 0) and not _is(v, 0):
        return ZERO
    if _is(v, 1):
        return u
    return BinOp("/", u, v)


def power(u, k):
    k = int(k)
    if k == 0:
        return ONE
    if k == 1:
        return u
    if isinstance(u, Const) and (u.value != 0 or k > 0):
        return const(u.value**k)
    if isinstance(u, Pow):
        return power(u.base, u.exponent * k)
    return Pow(u, k)


def func(name, u):
    if isinstance(u, Const):
        try:
            return const(_SCALAR_FUNCS[name](u.value))
        except ValueError:
            pass
    return Func(name, u)


_SCALAR_FUNCS = {"exp": math.exp, "ln": math.log, "sin": math.sin, "cos": math.cos}


# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<ident>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[bad]!r}", bad)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, parameters):
        self.tokens = _tokenize(text)
        self.i = 0
        self.parameters = frozenset(parameters)

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value):
        kind, text, pos = self.tok
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", pos)
        self.take()

    def expr(self):
        node = self.term()
        while self.tok[1] in ("+", "-") and self.tok[0] == "op":
            op = self.take()[1]
            rhs = self.term()
            node = BinOp(op, node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.tok[1] in ("*", "/") and self.tok[0] == "op":
            op = self.take()[1]
            rhs = self.factor()
            node = BinOp(op, node, rhs)
        return node

    def factor(self):
        kind, text, _ = self.tok
        if kind == "op" and text in ("-", "+"):
            self.take()
            inner = self.factor()
            return Neg(inner) if text == "-" else inner
        node = self.base()
        if self.tok[0] == "op" and self.tok[1] == "^":
            self.take()
            node = Pow(node, self.integer())
        return node

    def integer(self):
        sign = 1
        kind, text, pos = self.tok
        if kind == "op" and text in ("-", "+"):
            sign = -1 if text == "-" else 1
            self.take()
            kind, text, pos = self.tok
        if kind != "num":
            found = "end of input" if kind == "end" else repr(text)
            raise ExprSyntaxError(f"expected integer exponent, found {found}", pos)
        if not text.isdigit():
            raise ExprSyntaxError(f"exponent must be an integer, found {text!r}", pos)
        self.take()
        return sign * int(text)

    def base(self):
        kind, text, pos = self.tok
        if kind == "num":
            self.take()
            return Const(float(text))
        if kind == "ident":
            self.take()
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(text, arg)
            if text == "x":
                return X
            if text in self.parameters:
                return Param(text)
            raise UnknownIdentifier(f"unknown identifier {text!r}", pos)
        if kind == "op" and text == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ExprSyntaxError(f"unexpected {found}", pos)


def parse(text: str, parameters=()) -> Node:
    """Parse ``text`` into an expression tree.

    Identifiers other than ``x`` and the function names must be listed in
    ``parameters``.
    """
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    p = _Parser(text, parameters)
    node = p.expr()
    if p.tok[0] != "end":
        raise ExprSyntaxError(f"unexpected {p.tok[1]!r}", p.tok[2])
    return node


# printing

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_text(node: Node) -> str:
    """Render ``node`` in the input grammar; ``parse(to_text(n))`` rebuilds it."""
    return _show(node)[0]


def _show(node):
    """Return (text, precedence); atoms get precedence 4."""
    if isinstance(node, Const):
        s = repr(node.value)
        if node.value < 0 or s in ("inf", "-inf", "nan"):
            return f"({s})", 4
        return s, 4
    if isinstance(node, Var):
        return "x", 4
    if isinstance(node, Param):
        return node.name, 4
    if isinstance(node, Func):
        return f"{node.name}({to_text(node.arg)})", 4
    if isinstance(node, Neg):
        s, p = _show(node.arg)
        return f"-{s if p >= 3 else f'({s})'}", 3
    if isinstance(node, Pow):
        s, p = _show(node.base)
        e = node.exponent
        wrap = p < 4 or isinstance(node.base, Pow)  # the grammar has no x^a^b
        return f"{f'({s})' if wrap else s}^{e}", 4
    if isinstance(node, BinOp):
        prec = _PREC[node.op]
        ls, lp = _show(node.left)
        rs, rp = _show(node.right)
        if lp < prec:
            ls = f"({ls})"
        if rp <= prec:  # left associativity: a - (b - c), a / (b * c)
            rs = f"({rs})"
        return f"{ls} {node.op} {rs}", prec
    raise TypeError(f"not an expression node: {node!r}")


# differentiation

def differentiate(node: Node) -> Node:
    """Exact d/dx of ``node``; shared subtrees are differentiated once."""
    memo: dict[int, Node] = {}

    def d(u):
        key = id(u)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(u, (Const, Param)):
            r = ZERO
        elif isinstance(u, Var):
            r = ONE
        elif isinstance(u, Neg):
            r = neg(d(u.arg))
        elif isinstance(u, BinOp):
            du, dv = d(u.left), d(u.right)
            if u.op == "+":
                r = add(du, dv)
            elif u.op == "-":
                r = sub(du, dv)
            elif u.op == "*":
                r = add(mul(du, u.right), mul(u.left, dv))
            else:
                # (u/v)' = u'/v - (u/v) * v'/v keeps the denominator at v
                r = sub(div(du, u.right), mul(u, div(dv, u.right)))
        elif isinstance(u, Pow):
            k = u.exponent
            r = mul(mul(const(k), power(u.base, k - 1)), d(u.base))
        elif isinstance(u, Func):
            inner = d(u.arg)
            if u.name == "exp":
                r = mul(u, inner)
            elif u.name == "ln":
                r = div(inner, u.arg)
            elif u.name == "sin":
                r = mul(func("cos", u.arg), inner)
            else:
                r = neg(mul(func("sin", u.arg), inner))
        else:
            raise TypeError(f"not an expression node: {u!r}")
        memo[key] = r
        return r

    return d(node)


# evaluation

def free_parameters(node: Node) -> set[str]:
    seen: set[str] = set()
    stack = [node]
    visited: set[int] = set()
    while stack:
        u = stack.pop()
        if id(u) in visited:
            continue
        visited.add(id(u))
        if isinstance(u, Param):
            seen.add(u.name)
        elif isinstance(u, (Neg, Func)):
            stack.append(u.arg)
        elif isinstance(u, BinOp):
            stack += [u.left, u.right]
        elif isinstance(u, Pow):
            stack.append(u.base)
    return seen


def _offending(x, mask):
    xs = np.broadcast_to(x, mask.shape)[mask]
    return float(xs.flat[0]) if xs.size else None


def evaluate(node: Node, x, params: Mapping[str, float] | None = None):
    """Evaluate ``node`` at ``x`` (scalar or ndarray) with bound ``params``."""
    params = params or {}
    xa = np.asarray(x, dtype=float)
    memo: dict[int, np.ndarray] = {}

    def ev(u):
        key = id(u)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if isinstance(u, Const):
            r = np.float64(u.value)
        elif isinstance(u, Var):
            r = xa
        elif isinstance(u, Param):
            try:
                r = np.float64(params[u.name])
            except KeyError:
                raise UnboundParameter(f"parameter {u.name!r} has no value") from None
        elif isinstance(u, Neg):
            r = -ev(u.arg)
        elif isinstance(u, BinOp):
            lv, rv = ev(u.left), ev(u.right)
            if u.op == "+":
                r = lv + rv
            elif u.op == "-":
                r = lv - rv
            elif u.op == "*":
                r = lv * rv
            else:
                zero = np.asarray(rv == 0)
                if zero.any():
                    raise EvaluationFailure("division by zero", _offending(xa, np.broadcast_to(zero, np.broadcast(xa, zero).shape)))
                r = lv / rv
        elif isinstance(u, Pow):
            b = ev(u.base)
            if u.exponent < 0:
                zero = np.asarray(b == 0)
                if zero.any():
                    raise EvaluationFailure("division by zero", _offending(xa, np.broadcast_to(zero, np.broadcast(xa, zero).shape)))
                r = 1.0 / b ** (-u.exponent)
            else:
                r = b**u.exponent
        elif isinstance(u, Func):
            a = ev(u.arg)
            if u.name == "ln":
                bad = np.asarray(a <= 0)
                if bad.any():
                    raise EvaluationFailure("ln of non-positive value", _offending(xa, np.broadcast_to(bad, np.broadcast(xa, bad).shape)))
                r = np.log(a)
            else:
                r = getattr(np, u.name)(a)
        else:
            raise TypeError(f"not an expression node: {u!r}")
        memo[key] = r
        return r

    with np.errstate(over="ignore"):
        out = ev(node)
    out = np.broadcast_to(out, xa.shape)
    return float(out) if out.ndim == 0 else np.array(out)


def to_integrand(node: Node, params: Mapping[str, float] | None = None, label: str | None = None) -> IntegrandSpec:
    """Wrap an expression as an ``IntegrandSpec`` with exact derivatives of every order."""
    params = dict(params or {})
    missing = free_parameters(node) - params.keys()
    if missing:
        raise UnboundParameter(f"unbound parameter(s): {', '.join(sorted(missing))}")
    derivs = [node]

    def nth(k):
        while len(derivs) <= k:
            derivs.append(differentiate(derivs[-1]))
        return derivs[k]

    def derivatives(k):
        tree = nth(k)
        return lambda x: evaluate(tree, x, params)

    return IntegrandSpec(lambda x: evaluate(node, x, params), derivatives, math.inf, label=label or to_text(node))


def integrand(text: str, **params: float) -> IntegrandSpec:
    """Shorthand: ``integrand("(1-x)/(x+s)^2", s=0.5)``."""
    return to_integrand(parse(text, params.keys()), params, label=text)
