"""Recursive-descent parser for the operator expression language.

The language covers the renderer's output (so ``parse(render(a)) == a``)
plus the named constructors used by the catalog::

    dot(sigma, L) + hbar/2*r^-2*x1*p1
    T(3, 1, 2)            Y(1, 1, 1)
    H(case=6)             H(symbolic)
    Int(Y1, 1, 2)         cross(x, sigma)[3]
    herm(SX*p1)           adj(p1*x1)

Values are either scalar operators (``Node``) or three-component
vectors (``Vec``).  Field scalars may be raised to negative powers and
used as divisors; operators may not.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

from . import builders as B
from .field import RESERVED, SpatialPoly, jet, symbol
from .operators import OpExpr

__all__ = ["ParseError", "parse", "parse_expression", "Context"]


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int | None = None, text: str = ""):
        self.pos = pos
        self.text = text
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{msg}{where}")


_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*'*)
  | (?P<op>[-+*/^(),=\[\]])
""", re.VERBOSE)


@dataclass
class Tok:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Tok]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Tok(kind, m.group(), pos))
        pos = m.end()
    out.append(Tok("end", "", len(text)))
    return out


_FREE_CONST = re.compile(r"[cdk]\d+$")
_JET = re.compile(r"(V0|V1|f\d+)('*)$")
_VECTORS = {"x": B.X, "p": B.P, "sigma": B.SIGMA, "L": B.L, "J": B.J, "S": B.S,
            "Pi": B.PI}
_ATOM = re.compile(r"(x|p|sigma)([123])$")


@dataclass
class Context:
    """Hooks for constructors that need catalog data."""

    integral: Callable | None = None      # (id, i, j) -> Node | Vec
    hamiltonian: Callable | None = None   # case id -> Node


def _default_context() -> Context:
    from . import catalog

    return Context(integral=catalog.integral_value, hamiltonian=catalog.hamiltonian_node)


class _Parser:
    def __init__(self, text: str, ctx: Context):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0
        self.ctx = ctx

    # -- token helpers ---------------------------------------------------

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return ParseError(msg, tok.pos, self.text)

    def accept(self, text) -> bool:
        if self.tok.kind in ("op", "name") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            got = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, got {got!r}")

    def uint(self) -> int:
        if self.tok.kind != "num":
            raise self.error("expected an integer")
        v = int(self.tok.text)
        self.i += 1
        return v

    # -- grammar -----------------------------------------------------------

    def parse(self):
        v = self.expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return v

    def expr(self):
        if self.accept("-"):
            v = self.neg(self.term())
        else:
            self.accept("+")
            v = self.term()
        while True:
            if self.accept("+"):
                v = self.add(v, self.term())
            elif self.accept("-"):
                v = self.add(v, self.neg(self.term()))
            else:
                return v

    def term(self):
        v = self.unary()
        while True:
            if self.accept("*"):
                v = self.mul(v, self.unary())
            elif self.tok.text == "/" and self.tok.kind == "op":
                tok = self.tok
                self.i += 1
                d = self.unary()
                v = self.div(v, d, tok)
            else:
                return v

    def unary(self):
        if self.accept("-"):
            return self.neg(self.unary())
        return self.factor()

    def factor(self):
        v = self.postfix()
        if self.tok.text == "^" and self.tok.kind == "op":
            tok = self.tok
            self.i += 1
            negative = self.accept("-")
            n = self.uint()
            if negative:
                f = self.field_of(v)
                if f is None:
                    raise self.error("negative powers need an invertible scalar", tok)
                try:
                    return B.Scalar(SpatialPoly.scalar(f ** (-n)))
                except ZeroDivisionError:
                    raise self.error("zero denominator", tok) from None
            if isinstance(v, B.Vec):
                raise self.error("cannot raise a vector to a power", tok)
            f = self.field_of(v)
            if f is not None:
                return B.Scalar(SpatialPoly.scalar(f ** n))
            if n == 0:
                return B.Scalar(SpatialPoly.scalar(1))
            out = v
            for _ in range(n - 1):
                out = out * v
            return out
        return v

    def postfix(self):
        v = self.atom()
        while self.tok.text == "[" and self.tok.kind == "op":
            tok = self.tok
            self.i += 1
            k = self.uint()
            self.expect("]")
            if not isinstance(v, B.Vec):
                raise self.error("only vectors can be indexed", tok)
            if k not in (1, 2, 3):
                raise self.error("axis must be 1, 2 or 3", tok)
            v = v[k - 1]
        return v

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return B.Scalar(SpatialPoly.scalar(int(tok.text)))
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            v = self.expr()
            self.expect(")")
            return v
        if tok.kind != "name":
            raise self.error(f"unexpected {tok.text or 'end of input'!r}")
        self.i += 1
        name = tok.text
        if self.tok.text == "(" and self.tok.kind == "op":
            return self.call(name, tok)
        return self.identifier(name, tok)

    def identifier(self, name, tok):
        m = _JET.match(name)
        if m:
            return B.Scalar(SpatialPoly.scalar(jet(m.group(1), len(m.group(2)))))
        if "'" in name:
            raise self.error(f"unknown identifier {name!r}", tok)
        if name in RESERVED:
            return B.Scalar(SpatialPoly.scalar(symbol(name)))
        if _FREE_CONST.match(name):
            return B.Scalar(SpatialPoly.scalar(symbol(name)))
        m = _ATOM.match(name)
        if m:
            kind, k = m.group(1), int(m.group(2))
            if kind == "x":
                return B.Scalar(SpatialPoly.coord(k))
            return B.Atom(kind, k)
        if name in _VECTORS:
            return _VECTORS[name]
        raise self.error(f"unknown identifier {name!r}", tok)

    def args(self) -> list:
        self.expect("(")
        out = [self.expr()]
        while self.accept(","):
            out.append(self.expr())
        self.expect(")")
        return out

    def word(self) -> str:
        """Gather raw tokens up to the next ',' or ')' (for ids like 1c or Y12)."""
        start = self.tok.pos
        parts = []
        while not (self.tok.kind == "op" and self.tok.text in ",)") and self.tok.kind != "end":
            parts.append(self.tok.text)
            self.i += 1
        if not parts:
            raise ParseError("expected an identifier", start, self.text)
        return "".join(parts)

    def call(self, name, tok):
        if name in ("dot", "cross", "anti", "comm"):
            a = self.args()
            if len(a) != 2:
                raise self.error(f"{name} takes two arguments", tok)
            u, v = a
            if name in ("dot", "cross"):
                if not (isinstance(u, B.Vec) and isinstance(v, B.Vec)):
                    raise self.error(f"{name} needs two vectors", tok)
                return B.dot(u, v) if name == "dot" else B.cross(u, v)
            if isinstance(u, B.Vec) or isinstance(v, B.Vec):
                if isinstance(u, B.Vec) and isinstance(v, B.Vec):
                    raise self.error(f"{name} of two vectors is not defined", tok)
                if isinstance(u, B.Vec):
                    return B.Vec(self.pair(name, c, v) for c in u)
                return B.Vec(self.pair(name, u, c) for c in v)
            return self.pair(name, u, v)
        if name in ("L", "J", "S", "Pi"):
            self.expect("(")
            k = self.uint()
            self.expect(")")
            if k not in (1, 2, 3):
                raise self.error("axis must be 1, 2 or 3", tok)
            return _VECTORS[name][k - 1]
        if name in ("T", "Y"):
            self.expect("(")
            k = self.uint()
            self.expect(",")
            i = self.uint()
            self.expect(",")
            j = self.uint()
            self.expect(")")
            try:
                return B.tensor_node(name, k, i, j)
            except ValueError as e:
                raise self.error(str(e), tok) from None
        if name in ("adj", "herm"):
            a = self.args()
            if len(a) != 1:
                raise self.error(f"{name} takes one argument", tok)
            v = a[0]
            fn = B.Adjoint if name == "adj" else B.hermitian_part
            if isinstance(v, B.Vec):
                return B.Vec(fn(c) for c in v)
            return fn(v)
        if name == "sym":
            a = self.args()
            if any(isinstance(v, B.Vec) for v in a):
                raise self.error("sym takes scalar operators", tok)
            return B.Sym(a)
        if name == "H":
            self.expect("(")
            if self.accept("case"):
                self.expect("=")
                case = self.word()
            elif self.accept("symbolic"):
                case = "symbolic"
            else:
                raise self.error("expected case=<id> or symbolic")
            self.expect(")")
            if case == "symbolic":
                return B.primitive("H")
            if self.ctx.hamiltonian is None:
                raise self.error("no catalog available for H(case=...)", tok)
            try:
                return self.ctx.hamiltonian(case)
            except KeyError as e:
                raise self.error(str(e.args[0]) if e.args else "unknown case", tok) from None
        if name == "Int":
            self.expect("(")
            ident = self.word()
            idx = []
            while self.accept(","):
                idx.append(self.uint())
            self.expect(")")
            if self.ctx.integral is None:
                raise self.error("no catalog available for Int(...)", tok)
            try:
                return self.ctx.integral(ident, *idx)
            except (KeyError, ValueError) as e:
                raise self.error(str(e.args[0]) if e.args else "unknown integral", tok) from None
        raise self.error(f"unknown identifier {name!r}", tok)

    @staticmethod
    def pair(name, u, v):
        if name == "anti":
            return u * v + v * u
        return u * v - v * u

    # -- typed arithmetic --------------------------------------------------

    @staticmethod
    def field_of(v):
        if isinstance(v, B.Scalar):
            return v.field_value()
        return None

    def add(self, a, b):
        if isinstance(a, B.Vec) != isinstance(b, B.Vec):
            raise self.error("cannot add a vector and a scalar")
        return a + b

    @staticmethod
    def neg(a):
        return -a

    def mul(self, a, b):
        if isinstance(a, B.Vec) and isinstance(b, B.Vec):
            raise self.error("use dot or cross to combine two vectors")
        return a * b

    def div(self, a, d, tok):
        f = self.field_of(d)
        if f is None:
            raise self.error("can only divide by a scalar field element", tok)
        if not f:
            raise self.error("zero denominator", tok)
        try:
            return a / B.Scalar(SpatialPoly.scalar(f))
        except ZeroDivisionError:
            raise self.error("zero denominator", tok) from None


def parse(text: str, ctx: Context | None = None):
    """Parse ``text`` into a ``Node`` (scalar operator) or ``Vec``."""
    return _Parser(text, ctx or _default_context()).parse()


def parse_expression(text: str, ctx: Context | None = None) -> OpExpr:
    """Parse and normal-order a scalar operator expression."""
    v = parse(text, ctx)
    if isinstance(v, B.Vec):
        raise ParseError("expression is a vector; index it with [k]", None, text)
    return v.quantum()
