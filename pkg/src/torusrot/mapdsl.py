"""A small expression language for user-defined lifts.

Grammar (EBNF)::

    source   = expr ";" expr [ "inverse" expr ";" expr ] { "where" binding { "," binding } }
    binding  = NAME "=" [ "-" ] NUMBER
    expr     = term { ("+" | "-") term }
    term     = unary { ("*" | "/") unary }
    unary    = "-" unary | primary
    primary  = NUMBER | "pi" | "x" | "y" | NAME
             | ("sin" | "cos") "(" expr ")"
             | "(" expr ")"

Binary operators are left-associative; unary minus binds tighter than
``*`` and ``/``. Example::

    x + b*sin(2*pi*(y + a*sin(2*pi*x))) ; y + a*sin(2*pi*x) where a=0.5, b=0.5
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Union

import mpmath
import numpy as np

from .core import DEFAULT_SEED, LiftMap, MapError, translate_commutation_check

FUNCTIONS = ("sin", "cos")
RESERVED = {"x", "y", "pi", "where", "inverse", *FUNCTIONS}
LIFT_TOLERANCE = 1e-9


class DSLSyntaxError(MapError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # 'x' or 'y'


@dataclass(frozen=True)
class Const:
    name: str  # only 'pi'


@dataclass(frozen=True)
class Param:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "MapExpr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "MapExpr"
    right: "MapExpr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "MapExpr"


MapExpr = Union[Num, Var, Const, Param, Neg, BinOp, Call]


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/(),;=]))"
)


def tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos:].strip() == "":
            break
        m = _TOKEN_RE.match(source, pos)
        if m is None or m.end() == pos:
            bad = len(source) - len(source[pos:].lstrip())
            raise DSLSyntaxError(f"unexpected character {source[bad]!r}", bad)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def advance(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, value: str):
        kind, text, pos = self.tok
        if text != value or kind == "num":
            found = "end of input" if kind == "end" else repr(text)
            raise DSLSyntaxError(f"expected {value!r}, found {found}", pos)
        return self.advance()

    def at(self, value: str) -> bool:
        kind, text, _ = self.tok
        return kind != "num" and text == value

    def expr(self) -> MapExpr:
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> MapExpr:
        node = self.unary()
        while self.at("*") or self.at("/"):
            op, pos = self.advance()[1], self.tok[2]
            right = self.unary()
            if op == "/" and isinstance(right, Num) and right.value == 0.0:
                raise DSLSyntaxError("division by literal zero", pos)
            node = BinOp(op, node, right)
        return node

    def unary(self) -> MapExpr:
        if self.at("-"):
            self.advance()
            return Neg(self.unary())
        return self.primary()

    def primary(self) -> MapExpr:
        kind, text, pos = self.tok
        if kind == "num":
            self.advance()
            return Num(float(text))
        if kind == "name":
            self.advance()
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                if self.at(","):
                    raise DSLSyntaxError(f"{text}() takes exactly one argument", self.tok[2])
                self.expect(")")
                return Call(text, arg)
            if text in ("x", "y"):
                return Var(text)
            if text == "pi":
                return Const("pi")
            if text in RESERVED:
                raise DSLSyntaxError(f"unexpected keyword {text!r}", pos)
            if self.at("("):
                raise DSLSyntaxError(f"unknown function {text!r}", pos)
            return Param(text)
        if self.at("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise DSLSyntaxError(f"unexpected {found}", pos)

    def bindings(self) -> dict[str, float]:
        params: dict[str, float] = {}
        while self.at("where"):
            self.advance()
            while True:
                kind, name, pos = self.tok
                if kind != "name" or name in RESERVED:
                    raise DSLSyntaxError("expected parameter name", pos)
                self.advance()
                self.expect("=")
                sign = 1.0
                if self.at("-"):
                    self.advance()
                    sign = -1.0
                kind, text, pos = self.tok
                if kind != "num":
                    raise DSLSyntaxError("expected numeric parameter value", pos)
                self.advance()
                params[name] = sign * float(text)
                if not self.at(","):
                    break
                self.advance()
        return params


def parse_expr(source: str) -> MapExpr:
    """Parse a single expression (no ';' or 'where')."""
    p = _Parser(source)
    node = p.expr()
    if p.tok[0] != "end":
        raise DSLSyntaxError(f"unexpected {p.tok[1]!r}", p.tok[2])
    return node


def free_params(e: MapExpr) -> set[str]:
    if isinstance(e, Param):
        return {e.name}
    if isinstance(e, Neg):
        return free_params(e.operand)
    if isinstance(e, BinOp):
        return free_params(e.left) | free_params(e.right)
    if isinstance(e, Call):
        return free_params(e.arg)
    return set()


_NUMPY_BACKEND = {"sin": np.sin, "cos": np.cos, "pi": np.pi, "const": float}
_MP_BACKEND = {"sin": mpmath.sin, "cos": mpmath.cos, "pi": mpmath.pi, "const": mpmath.mpf}


def compile_expr(e: MapExpr, params: dict[str, float], backend=None) -> Callable:
    """Turn an AST into a closure ``f(x, y)``; unbound parameters raise here."""
    be = _NUMPY_BACKEND if backend is None else backend
    if isinstance(e, Num):
        c = be["const"](e.value)
        return lambda x, y: c
    if isinstance(e, Var):
        return (lambda x, y: x) if e.name == "x" else (lambda x, y: y)
    if isinstance(e, Const):
        if be is _MP_BACKEND:
            # unary plus rounds pi at the working precision of the call
            return lambda x, y: +mpmath.pi
        c = float(be["pi"])
        return lambda x, y: c
    if isinstance(e, Param):
        if e.name not in params:
            raise MapError(f"unbound parameter {e.name!r}")
        c = be["const"](params[e.name])
        return lambda x, y: c
    if isinstance(e, Neg):
        f = compile_expr(e.operand, params, be)
        return lambda x, y: -f(x, y)
    if isinstance(e, Call):
        f = compile_expr(e.arg, params, be)
        fn = be[e.func]
        return lambda x, y: fn(f(x, y))
    if isinstance(e, BinOp):
        a = compile_expr(e.left, params, be)
        b = compile_expr(e.right, params, be)
        if e.op == "+":
            return lambda x, y: a(x, y) + b(x, y)
        if e.op == "-":
            return lambda x, y: a(x, y) - b(x, y)
        if e.op == "*":
            return lambda x, y: a(x, y) * b(x, y)
        return lambda x, y: a(x, y) / b(x, y)
    raise TypeError(f"not a MapExpr: {e!r}")


def eval_expr(e: MapExpr, x: float, y: float, params: dict[str, float] | None = None) -> float:
    """Evaluate a single expression at one point; non-finite results raise."""
    f = compile_expr(e, params or {})
    with np.errstate(all="ignore"):
        value = float(f(np.float64(x), np.float64(y)))
    if not math.isfinite(value):
        raise MapError(f"non-finite value {value} at (x={x}, y={y})")
    return value


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def to_source(e: MapExpr) -> str:
    """Pretty-print with the minimal parentheses needed to re-parse identically."""
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, (Var, Const, Param)):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_source(e.arg)})"
    if isinstance(e, Neg):
        inner = to_source(e.operand)
        if isinstance(e.operand, BinOp):
            inner = f"({inner})"
        return f"-{inner}"
    prec = _PREC[e.op]
    left = to_source(e.left)
    if isinstance(e.left, BinOp) and _PREC[e.left.op] < prec:
        left = f"({left})"
    right = to_source(e.right)
    if isinstance(e.right, BinOp) and _PREC[e.right.op] <= prec:
        right = f"({right})"
    return f"{left} {e.op} {right}"


@dataclass(frozen=True)
class MapDefinition:
    fx: MapExpr
    fy: MapExpr
    params: dict[str, float] = field(default_factory=dict)
    inverse: tuple[MapExpr, MapExpr] | None = None

    def to_source(self) -> str:
        s = f"{to_source(self.fx)} ; {to_source(self.fy)}"
        if self.inverse is not None:
            s += f" inverse {to_source(self.inverse[0])} ; {to_source(self.inverse[1])}"
        if self.params:
            s += " where " + ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return s


def parse_definition(source: str) -> MapDefinition:
    """Parse without lift validation."""
    p = _Parser(source)
    fx = p.expr()
    p.expect(";")
    fy = p.expr()
    inverse = None
    if p.at("inverse"):
        p.advance()
        gx = p.expr()
        p.expect(";")
        inverse = (gx, p.expr())
    params = p.bindings()
    if p.tok[0] != "end":
        raise DSLSyntaxError(f"unexpected {p.tok[1]!r}", p.tok[2])
    exprs = [fx, fy] + (list(inverse) if inverse else [])
    for e in exprs:
        missing = free_params(e) - params.keys()
        if missing:
            raise MapError(f"unbound parameter {sorted(missing)[0]!r}")
    return MapDefinition(fx, fy, params, inverse)


class DSLLift(LiftMap):
    def __init__(self, definition: MapDefinition, source: str | None = None):
        self.definition = definition
        self.source = source if source is not None else definition.to_source()
        d = definition
        self._fx = compile_expr(d.fx, d.params)
        self._fy = compile_expr(d.fy, d.params)
        self._mx = compile_expr(d.fx, d.params, _MP_BACKEND)
        self._my = compile_expr(d.fy, d.params, _MP_BACKEND)
        self.has_inverse = d.inverse is not None
        if self.has_inverse:
            self._gx = compile_expr(d.inverse[0], d.params)
            self._gy = compile_expr(d.inverse[1], d.params)

    def __call__(self, x, y):
        return self._broadcast(self._fx(x, y), x), self._broadcast(self._fy(x, y), y)

    def inverse(self, x, y):
        if not self.has_inverse:
            return super().inverse(x, y)
        return self._broadcast(self._gx(x, y), x), self._broadcast(self._gy(x, y), y)

    def eval_mp(self, x, y):
        return self._mx(x, y), self._my(x, y)

    @staticmethod
    def _broadcast(value, like):
        # constant components ("0.3") must still follow the input's shape
        if isinstance(like, np.ndarray) and np.ndim(value) == 0:
            return np.full(like.shape, value, dtype=float)
        return value

    def describe(self) -> str:
        return f"dsl({self.source})"

    def __repr__(self):
        return f"DSLLift({self.source!r})"


def parse_map(source: str, validate: bool = True, seed: int = DEFAULT_SEED) -> DSLLift:
    """Parse a two-component map definition and check it is a valid lift.

    Validation runs :func:`torusrot.core.translate_commutation_check` on 1000
    seeded samples and rejects the map if the error exceeds 1e-9.
    """
    lift = DSLLift(parse_definition(source), source.strip())
    if validate:
        err = translate_commutation_check(lift, 1000, seed)
        if not err <= LIFT_TOLERANCE:
            raise MapError(
                f"not a lift of a torus map homotopic to the identity: "
                f"translation commutation error {err:.3g} > {LIFT_TOLERANCE:g}"
            )
    return lift


def translation(a: float, b: float) -> DSLLift:
    """Rigid translation lift z -> z + (a, b)."""
    return parse_map(f"x + {a!r} ; y + {b!r} inverse x - {a!r} ; y - {b!r}")


def identity() -> DSLLift:
    return parse_map("x ; y inverse x ; y")
