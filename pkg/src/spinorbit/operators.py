"""Normal-ordered matrix differential operators.

An ``OpExpr`` is a finite sum ``sum g(x) * sigma_a * p1^n1 p2^n2 p3^n3`` with
every position-dependent factor moved to the left, the momenta
``p_k = -i hbar d/dx_k`` to the right and the Pauli content reduced to the
basis ``I, sigma1, sigma2, sigma3``.  Pauli matrices act on the spinor
index only, so they commute with ``x`` and ``p``.
"""

from __future__ import annotations

import itertools
import math

from .field import (
    HBAR,
    HBAR_VAR,
    I,
    ONE,
    R_VAR,
    FieldElem,
    SpatialPoly,
    _xmul,
    as_field,
    d_dr_n,
    has_hbar_denominator,
    is_jet,
    is_jet_name,
    partial,
    symbol_index,
    var_base,
    var_order,
)

__all__ = [
    "OpExpr",
    "multiply",
    "commutator",
    "anticommutator",
    "adjoint",
    "is_zero",
    "specialize",
    "hbar_grade",
    "pauli_product",
    "SymbolExpr",
]

ZERO3 = (0, 0, 0)

# sigma_a sigma_b = phase * sigma_c, phase in {1, i, -i}
_LEVI = {(1, 2): 3, (2, 3): 1, (3, 1): 2}


def pauli_product(a: int, b: int):
    """Return ``(c, phase)`` with ``sigma_a sigma_b = phase * sigma_c``; phase is 1, 1j or -1j."""
    if a == 0:
        return b, 1
    if b == 0:
        return a, 1
    if a == b:
        return 0, 1
    c = _LEVI.get((a, b))
    if c is not None:
        return c, 1j
    return _LEVI[(b, a)], -1j


_PHASE = {1: ONE, 1j: I, -1j: -I}
_MINUS_I_HBAR = -I * HBAR


def _leibniz_coeff(phase, n: tuple, k: tuple) -> FieldElem:
    c = math.comb(n[0], k[0]) * math.comb(n[1], k[1]) * math.comb(n[2], k[2])
    return _PHASE[phase] * _MINUS_I_HBAR ** (k[0] + k[1] + k[2]) * c


_coeff_cache: dict = {}


def _coeff(phase, n, k):
    key = (phase, n, k)
    hit = _coeff_cache.get(key)
    if hit is None:
        hit = _leibniz_coeff(phase, n, k)
        _coeff_cache[key] = hit
    return hit


def _derivative(h: SpatialPoly, k: tuple, cache: dict) -> SpatialPoly:
    hit = cache.get(k)
    if hit is not None:
        return hit
    if k == ZERO3:
        out = h
    else:
        # peel one derivative off the first nonzero axis
        axis = next(a for a in range(3) if k[a])
        prev = list(k)
        prev[axis] -= 1
        out = partial(axis + 1, _derivative(h, tuple(prev), cache))
    cache[k] = out
    return out


class OpExpr:
    """Immutable normal-ordered operator ``{(pauli, p_exponents): SpatialPoly}``."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict | None = None):
        self.terms = terms if terms is not None else {}
        self._hash = None

    # -- constructors ------------------------------------------------------

    @staticmethod
    def scalar(f) -> "OpExpr":
        if isinstance(f, SpatialPoly):
            return OpExpr({(0, ZERO3): f}) if f.terms else OpExpr()
        f = as_field(f)
        if f is NotImplemented:
            raise TypeError("scalar must be a field element")
        return OpExpr({(0, ZERO3): SpatialPoly.scalar(f)}) if f.num else OpExpr()

    @staticmethod
    def x(k: int) -> "OpExpr":
        return OpExpr({(0, ZERO3): SpatialPoly.coord(k)})

    @staticmethod
    def p(k: int) -> "OpExpr":
        n = [0, 0, 0]
        n[k - 1] = 1
        return OpExpr({(0, tuple(n)): SpatialPoly.scalar(ONE)})

    @staticmethod
    def sigma(a: int) -> "OpExpr":
        return OpExpr({(a, ZERO3): SpatialPoly.scalar(ONE)})

    @staticmethod
    def term(pauli: int, pexp: tuple, coeff: SpatialPoly) -> "OpExpr":
        return OpExpr({(pauli, tuple(pexp)): coeff}) if coeff.terms else OpExpr()

    # -- structure -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def order(self) -> int:
        """Highest total momentum degree (``-1`` for the zero operator)."""
        return max((sum(n) for _, n in self.terms), default=-1)

    def items(self):
        return sorted(self.terms.items())

    # -- linear structure --------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, OpExpr):
            other = OpExpr.scalar(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for key, g in other.terms.items():
            h = out.get(key)
            if h is None:
                out[key] = g
            else:
                h = h + g
                if h.terms:
                    out[key] = h
                else:
                    del out[key]
        return OpExpr(out)

    __radd__ = __add__

    def __neg__(self):
        return OpExpr({k: -g for k, g in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, OpExpr):
            other = OpExpr.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, f) -> "OpExpr":
        f = as_field(f)
        if not f.num:
            return OpExpr()
        out = {}
        for k, g in self.terms.items():
            h = g.scale(f)
            if h.terms:
                out[k] = h
        return OpExpr(out)

    def __mul__(self, other):
        if isinstance(other, OpExpr):
            return multiply(self, other)
        f = as_field(other)
        if f is NotImplemented:
            return NotImplemented
        return self.scale(f)

    def __rmul__(self, other):
        f = as_field(other)
        if f is NotImplemented:
            return NotImplemented
        return self.scale(f)

    def map_coeffs(self, fn) -> "OpExpr":
        out = {}
        for k, g in self.terms.items():
            h = g.map_coeffs(fn)
            if h.terms:
                out[k] = h
        return OpExpr(out)

    # -- comparison ----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, OpExpr):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # -- rendering -----------------------------------------------------------

    def triples(self) -> list[dict]:
        """JSON-ready ``{"pauli", "p", "coeff"}`` records in a stable order."""
        return [
            {"pauli": a, "p": list(n), "coeff": g.render()}
            for (a, n), g in sorted(self.terms.items())
        ]

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (a, n), g in sorted(self.terms.items()):
            body = g.render()
            factors = [body if len(g.terms) == 1 else f"({body})"]
            if a:
                factors.append(f"sigma{a}")
            for k, e in enumerate(n):
                if e:
                    factors.append(f"p{k + 1}" + (f"^{e}" if e > 1 else ""))
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"OpExpr({self.render()!r})"


def multiply(a: OpExpr, b: OpExpr) -> OpExpr:
    """Normal-ordered product ``a*b``.

    Moving ``p^n`` through a coefficient ``h`` uses the multi-index Leibniz
    rule ``p^n h = sum_k C(n,k) (-i hbar)^|k| (d^k h) p^(n-k)``.
    """
    if not a.terms or not b.terms:
        return OpExpr()
    acc: dict = {}
    for (pb, m), h in b.terms.items():
        dcache: dict = {}
        for (pa, n), g in a.terms.items():
            pc, phase = pauli_product(pa, pb)
            for k in itertools.product(range(n[0] + 1), range(n[1] + 1), range(n[2] + 1)):
                dk = _derivative(h, k, dcache)
                if not dk.terms:
                    continue
                c = _coeff(phase, n, k)
                nout = (n[0] - k[0] + m[0], n[1] - k[1] + m[1], n[2] - k[2] + m[2])
                bucket = acc.setdefault((pc, nout), {})
                gc = g.scale(c)
                for e1, f1 in gc.terms.items():
                    for e2, f2 in dk.terms.items():
                        f = f1 * f2
                        if not f.num:
                            continue
                        for e, sgn, rp in _xmul(e1, e2):
                            if rp:
                                f_ = f.mul_mono(((R_VAR, rp),), sgn)
                            elif sgn != 1:
                                f_ = f.scale(sgn)
                            else:
                                f_ = f
                            bucket.setdefault(e, []).append(f_)
    out = {}
    for key, bucket in acc.items():
        sp = SpatialPoly._from_lists(bucket)
        if sp.terms:
            out[key] = sp
    return OpExpr(out)


def commutator(a: OpExpr, b: OpExpr) -> OpExpr:
    return multiply(a, b) - multiply(b, a)


def anticommutator(a: OpExpr, b: OpExpr) -> OpExpr:
    return multiply(a, b) + multiply(b, a)


def is_zero(a: OpExpr) -> bool:
    return not a.terms


def adjoint(a: OpExpr) -> OpExpr:
    """Formal adjoint: ``x, p, sigma`` self-adjoint, ``i -> -i``, order reversed."""
    out = OpExpr()
    for (pa, n), g in a.terms.items():
        left = OpExpr({(0, n): SpatialPoly.scalar(ONE)})
        right = OpExpr({(pa, ZERO3): g.conjugate()})
        out = out + multiply(left, right)
    return out


def _binding_map(expr_vars: set, bindings: dict) -> dict:
    """Translate ``{name: value}`` into ``{generator index: FieldElem}``."""
    values = {}
    jets = {}
    for name, val in bindings.items():
        val = as_field(val)
        if val is NotImplemented:
            raise TypeError(f"binding for {name!r} is not a field element")
        if name == "r":
            raise ValueError("cannot bind the radial coordinate")
        if is_jet_name(name):
            jets[name] = val
        else:
            values[symbol_index(name)] = val
    for v in expr_vars:
        if is_jet(v) and var_base(v) in jets:
            values[v] = d_dr_n(jets[var_base(v)], var_order(v))
    return values


def specialize(a, bindings: dict):
    """Substitute constants or radial functions; a jet binding fixes all its derivatives.

    Works on ``OpExpr``, ``SpatialPoly`` and ``FieldElem`` alike.
    """
    if not bindings:
        return a
    if isinstance(a, FieldElem):
        return a.subs(_binding_map(a.variables(), bindings))
    if isinstance(a, SpatialPoly):
        vs = set()
        for f in a.terms.values():
            vs |= f.variables()
        vals = _binding_map(vs, bindings)
        return a.map_coeffs(lambda f: f.subs(vals))
    vs = set()
    for g in a.terms.values():
        for f in g.terms.values():
            vs |= f.variables()
    vals = _binding_map(vs, bindings)
    return a.map_coeffs(lambda f: f.subs(vals))


def hbar_grade(a: OpExpr) -> dict[int, OpExpr]:
    """Split by total hbar degree, counting one unit for every momentum factor."""
    out: dict[int, dict] = {}
    for (pa, n), g in a.terms.items():
        for e, f in g.terms.items():
            if has_hbar_denominator(f):
                raise ValueError("hbar inside a denominator factor; grading undefined")
            split: dict[int, dict] = {}
            for mono, c in f.num.items():
                deg = dict(mono).get(HBAR_VAR, 0)
                split.setdefault(deg, {})[mono] = c
            for deg, num in split.items():
                grade = deg + sum(n)
                piece = FieldElem._make(num, dict(f.den)) if f.den else FieldElem(num)
                bucket = out.setdefault(grade, {})
                bucket.setdefault((pa, n), {}).setdefault(e, []).append(piece)
    result = {}
    for grade, bucket in sorted(out.items()):
        terms = {}
        for key, lists in bucket.items():
            sp = SpatialPoly._from_lists(lists)
            if sp.terms:
                terms[key] = sp
        if terms:
            result[grade] = OpExpr(terms)
    return result


class SymbolExpr:
    """Commutative image: ``{(sigma_label, xi_exponents): SpatialPoly}``.

    Momenta become classical variables ``xi1..xi3`` and Pauli matrices
    commuting labels of degree at most one.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = terms if terms is not None else {}

    @staticmethod
    def scalar(f) -> "SymbolExpr":
        return SymbolExpr(OpExpr.scalar(f).terms)

    @staticmethod
    def x(k):
        return SymbolExpr(OpExpr.x(k).terms)

    @staticmethod
    def xi(k):
        return SymbolExpr(OpExpr.p(k).terms)

    @staticmethod
    def sigma(a):
        return SymbolExpr(OpExpr.sigma(a).terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other):
        return SymbolExpr((OpExpr(self.terms) + OpExpr(other.terms)).terms)

    def __sub__(self, other):
        return SymbolExpr((OpExpr(self.terms) - OpExpr(other.terms)).terms)

    def __neg__(self):
        return SymbolExpr({k: -g for k, g in self.terms.items()})

    def scale(self, f):
        return SymbolExpr(OpExpr(self.terms).scale(f).terms)

    def __mul__(self, other):
        if not isinstance(other, SymbolExpr):
            return self.scale(other)
        acc: dict = {}
        for (a, n), g in self.terms.items():
            for (b, m), h in other.terms.items():
                if a and b:
                    raise ValueError("symbol mode allows at most one Pauli factor per term")
                key = (a or b, (n[0] + m[0], n[1] + m[1], n[2] + m[2]))
                acc.setdefault(key, []).append(g * h)
        out = {}
        for key, polys in acc.items():
            tot = polys[0]
            for q in polys[1:]:
                tot = tot + q
            if tot.terms:
                out[key] = tot
        return SymbolExpr(out)

    def __rmul__(self, other):
        return self.scale(other)

    def __eq__(self, other):
        if not isinstance(other, SymbolExpr):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def map_coeffs(self, fn):
        return SymbolExpr(OpExpr(self.terms).map_coeffs(fn).terms)

    def triples(self):
        return OpExpr(self.terms).triples()

    def render(self) -> str:
        return OpExpr(self.terms).render().replace("*p", "*xi")

    def __repr__(self):
        return f"SymbolExpr({self.render()!r})"
