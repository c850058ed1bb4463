"""Expression trees for named operators and the two tensor families.

Operators are assembled as small trees (``Node``) so the same construction
can be evaluated three ways: as a normal-ordered quantum operator, in the
commutative symbol algebra, or by direct application to test spinors
(see :mod:`spinorbit.oracle`).  Every node caches its evaluations.
"""

from __future__ import annotations

import math
from collections import Counter

from .field import HBAR, ONE, FieldElem, SpatialPoly, as_field, const, jet, r_power
from .operators import OpExpr, SymbolExpr, adjoint, multiply

__all__ = [
    "Node",
    "Scalar",
    "Atom",
    "Sum",
    "Prod",
    "Sym",
    "Adjoint",
    "hermitian_part",
    "Vec",
    "symmetrize",
    "primitive",
    "hamiltonian",
    "dot",
    "cross",
    "anti",
    "tensor_node",
    "tensor_component",
    "FAMILY_SIZE",
]


class Node:
    """Base class; subclasses implement ``_quantum`` and ``_symbol``."""

    __slots__ = ("_q", "_s")

    def __init__(self):
        self._q = None
        self._s = None

    def quantum(self) -> OpExpr:
        if self._q is None:
            self._q = self._quantum()
        return self._q

    def symbol(self) -> SymbolExpr:
        if self._s is None:
            self._s = self._symbol()
        return self._s

    # arithmetic builds new trees; nothing is evaluated here

    def __add__(self, other):
        if isinstance(other, Vec):
            return NotImplemented
        other = _node(other)
        if isinstance(self, Scalar) and isinstance(other, Scalar):
            return Scalar(self.poly + other.poly)
        return Sum(_sum_items(self) + _sum_items(other))

    def __radd__(self, other):
        return _node(other) + self

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-_node(other))

    def __rsub__(self, other):
        return _node(other) + (-self)

    def scale(self, f) -> "Node":
        f = as_field(f)
        if f is NotImplemented:
            raise TypeError("scale factor must be a field element")
        if isinstance(self, Scalar):
            return Scalar(self.poly.scale(f))
        if isinstance(self, Sum):
            return Sum(tuple((c * f, n) for c, n in self.items))
        return Sum(((f, self),))

    def __mul__(self, other):
        if isinstance(other, Vec):
            return Vec(self * c for c in other.c)
        if isinstance(other, Node):
            if isinstance(self, Scalar) and isinstance(other, Scalar):
                return Scalar(self.poly * other.poly)
            return Prod(_factors(self) + _factors(other))
        f = as_field(other)
        if f is NotImplemented:
            return NotImplemented
        return self.scale(f)

    def __rmul__(self, other):
        f = as_field(other)
        if f is NotImplemented:
            return NotImplemented
        return self.scale(f)

    def __truediv__(self, other):
        f = as_field(other)
        if f is NotImplemented:
            if isinstance(other, Scalar) and set(other.poly.terms) <= {(0, 0, 0)}:
                f = other.poly.terms.get((0, 0, 0))
                if f is None:
                    raise ZeroDivisionError("zero denominator")
            else:
                return NotImplemented
        return self.scale(ONE / f)

    def field_value(self):
        """The ``FieldElem`` this node stands for, or ``None`` if it is not a pure scalar."""
        return None


def _node(v) -> Node:
    if isinstance(v, Node):
        return v
    if isinstance(v, SpatialPoly):
        return Scalar(v)
    f = as_field(v)
    if f is NotImplemented:
        raise TypeError(f"cannot use {type(v).__name__} as an operator")
    return Scalar(SpatialPoly.scalar(f))


def _sum_items(n: Node) -> tuple:
    return n.items if isinstance(n, Sum) else ((ONE, n),)


def _factors(n: Node) -> tuple:
    return n.factors if isinstance(n, Prod) else (n,)


class Scalar(Node):
    """Multiplication by a coefficient function of position."""

    __slots__ = ("poly",)

    def __init__(self, poly):
        super().__init__()
        self.poly = poly if isinstance(poly, SpatialPoly) else SpatialPoly.scalar(poly)

    def _quantum(self):
        return OpExpr.scalar(self.poly)

    def _symbol(self):
        return SymbolExpr(OpExpr.scalar(self.poly).terms)

    def field_value(self):
        if not self.poly.terms:
            return FieldElem({})
        if set(self.poly.terms) == {(0, 0, 0)}:
            return self.poly.terms[(0, 0, 0)]
        return None

    def __repr__(self):
        return f"Scalar({self.poly.render()})"


class Atom(Node):
    """One of ``x_k``, ``p_k`` or ``sigma_k``."""

    __slots__ = ("kind", "k")

    def __init__(self, kind: str, k: int):
        super().__init__()
        if kind not in ("x", "p", "sigma") or k not in (1, 2, 3):
            raise ValueError(f"bad atom {kind}{k}")
        self.kind = kind
        self.k = k

    def _quantum(self):
        return {"x": OpExpr.x, "p": OpExpr.p, "sigma": OpExpr.sigma}[self.kind](self.k)

    def _symbol(self):
        return {"x": SymbolExpr.x, "p": SymbolExpr.xi, "sigma": SymbolExpr.sigma}[self.kind](self.k)

    def __repr__(self):
        return f"{self.kind}{self.k}"


class Sum(Node):
    __slots__ = ("items",)

    def __init__(self, items):
        super().__init__()
        self.items = tuple(items)

    def _quantum(self):
        out = OpExpr()
        for c, n in self.items:
            out = out + n.quantum().scale(c)
        return out

    def _symbol(self):
        out = SymbolExpr()
        for c, n in self.items:
            out = out + n.symbol().scale(c)
        return out

    def __repr__(self):
        return "Sum(" + ", ".join(f"{c.render()}*{n!r}" for c, n in self.items) + ")"


class Prod(Node):
    """Ordered product of factors."""

    __slots__ = ("factors",)

    def __init__(self, factors):
        super().__init__()
        self.factors = tuple(factors)

    def _quantum(self):
        out = self.factors[0].quantum()
        for f in self.factors[1:]:
            out = multiply(out, f.quantum())
        return out

    def _symbol(self):
        out = self.factors[0].symbol()
        for f in self.factors[1:]:
            out = out * f.symbol()
        return out

    def __repr__(self):
        return "Prod(" + ", ".join(map(repr, self.factors)) + ")"


class Sym(Node):
    """Permutation average of a factor list."""

    __slots__ = ("factors",)

    def __init__(self, factors):
        super().__init__()
        self.factors = tuple(factors)
        if not self.factors:
            raise ValueError("symmetrize needs at least one factor")

    def _quantum(self):
        return symmetrize([f.quantum() for f in self.factors])

    def _symbol(self):
        return Prod(self.factors).symbol()

    def __repr__(self):
        return "Sym(" + ", ".join(map(repr, self.factors)) + ")"


class Adjoint(Node):
    """Formal adjoint of a subtree.  The symbol side conjugates coefficients."""

    __slots__ = ("child",)

    def __init__(self, child):
        super().__init__()
        self.child = _node(child)

    def _quantum(self):
        return adjoint(self.child.quantum())

    def _symbol(self):
        return self.child.symbol().map_coeffs(lambda f: f.conjugate())

    def __repr__(self):
        return f"Adjoint({self.child!r})"


def hermitian_part(n: Node) -> Node:
    """``(A + A^dagger) / 2``."""
    return (n + Adjoint(n)).scale(const("1/2"))


def symmetrize(factors: list) -> OpExpr:
    """``(1/n!) * sum`` of the ordered products over all permutations.

    Equal factors are grouped, so the work is over distinct arrangements
    of the multiset and shared prefixes are multiplied only once.
    """
    if not factors:
        raise ValueError("symmetrize needs at least one factor")
    counts = Counter(factors)
    distinct = list(counts)
    n = len(factors)
    weight = math.prod(math.factorial(m) for m in counts.values())
    total = OpExpr()
    remaining = [counts[d] for d in distinct]

    def walk(prefix, left):
        nonlocal total
        if left == 0:
            total = total + prefix
            return
        for idx, d in enumerate(distinct):
            if remaining[idx]:
                remaining[idx] -= 1
                walk(d if prefix is None else multiply(prefix, d), left - 1)
                remaining[idx] += 1

    walk(None, n)
    return total.scale(const(weight) / math.factorial(n))


class Vec:
    """Three operator components; ``v[0]`` is the first axis."""

    __slots__ = ("c",)

    def __init__(self, comps):
        self.c = tuple(_node(x) for x in comps)
        if len(self.c) != 3:
            raise ValueError("a vector has three components")

    def __getitem__(self, k):
        return self.c[k]

    def __iter__(self):
        return iter(self.c)

    def __add__(self, other):
        if not isinstance(other, Vec):
            return NotImplemented
        return Vec(a + b for a, b in zip(self.c, other.c))

    def __sub__(self, other):
        if not isinstance(other, Vec):
            return NotImplemented
        return Vec(a - b for a, b in zip(self.c, other.c))

    def __neg__(self):
        return Vec(-a for a in self.c)

    def __mul__(self, other):
        if isinstance(other, Vec):
            raise TypeError("use dot or cross to combine two vectors")
        if isinstance(other, Node):
            return Vec(a * other for a in self.c)
        f = as_field(other)
        if f is NotImplemented:
            return NotImplemented
        return Vec(a.scale(f) for a in self.c)

    def __rmul__(self, other):
        if isinstance(other, Node):
            return Vec(other * a for a in self.c)
        f = as_field(other)
        if f is NotImplemented:
            return NotImplemented
        return Vec(a.scale(f) for a in self.c)

    def __truediv__(self, other):
        return Vec(a / other for a in self.c)

    def quantum(self) -> list[OpExpr]:
        return [a.quantum() for a in self.c]

    def symbol(self) -> list[SymbolExpr]:
        return [a.symbol() for a in self.c]


def dot(u: Vec, v: Vec) -> Node:
    return u[0] * v[0] + u[1] * v[1] + u[2] * v[2]


def cross(u: Vec, v: Vec) -> Vec:
    return Vec((u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0]))


def anti(a, b):
    """Anticommutator ``a*b + b*a`` of two nodes."""
    return a * b + b * a


# -- named primitives --------------------------------------------------------

X = Vec(Atom("x", k) for k in (1, 2, 3))
P = Vec(Atom("p", k) for k in (1, 2, 3))
SIGMA = Vec(Atom("sigma", k) for k in (1, 2, 3))
L = cross(X, P)
J = L + SIGMA * (HBAR / 2)
XP = dot(X, P)
SX = dot(SIGMA, X)
SP = dot(SIGMA, P)
SL = dot(SIGMA, L)
P2 = dot(P, P)
L2 = dot(L, L)
XS = cross(X, SIGMA)
PS = cross(P, SIGMA)
_INV_R2 = Scalar(SpatialPoly.scalar(r_power(-2)))
S = SIGMA * (-HBAR / 2) + (_INV_R2 * X) * SX * HBAR
PI = P - (_INV_R2 * XS) * HBAR


def hamiltonian(v0, v1) -> Node:
    """``p^2/2 + V0(r) + V1(r) (sigma, L)`` for field elements ``v0``, ``v1``."""
    return P2.scale(const("1/2")) + Scalar(SpatialPoly.scalar(as_field(v0))) \
        + Scalar(SpatialPoly.scalar(as_field(v1))) * SL


def primitive(name: str):
    """Look up a named operator: ``x1``, ``p2``, ``sigma3``, ``L``, ``J``, ``S``, ``Pi``,
    ``H`` (symbolic potentials) or a radial function name such as ``f3`` or ``V0``."""
    vectors = {"x": X, "p": P, "sigma": SIGMA, "L": L, "J": J, "S": S, "Pi": PI}
    if name in vectors:
        return vectors[name]
    for base, vec in (("x", X), ("p", P), ("sigma", SIGMA)):
        if name.startswith(base) and name[len(base):] in ("1", "2", "3"):
            return vec[int(name[len(base):]) - 1]
    if name == "H":
        return hamiltonian(jet("V0"), jet("V1"))
    if name in ("V0", "V1") or (name[:1] == "f" and name[1:].isdigit()):
        return Scalar(SpatialPoly.scalar(jet(name)))
    raise KeyError(f"unknown primitive {name!r}")


# -- tensor and pseudo-tensor generators ---------------------------------------

def _pair(u: Vec, v: Vec, i: int, j: int):
    """``u^i v^j + v^i u^j`` as two factor lists."""
    return [[u[i], v[j]], [v[i], u[j]]]


def _lead(prefix, pairs):
    return [list(prefix) + f for f in pairs]


def _ll(i, j):
    return [[L[i], L[j]], [L[j], L[i]]]


def _tensor_terms(k: int, i: int, j: int):
    xx = [[X[i], X[j]]]
    table = {
        1: lambda: xx,
        2: lambda: _lead([XP], xx),
        3: lambda: _lead([SL], xx),
        4: lambda: _pair(X, P, i, j),
        5: lambda: _pair(X, XS, i, j),
        6: lambda: _lead([XP], _pair(X, XS, i, j)),
        7: lambda: _pair(L, SIGMA, i, j),
        8: lambda: _pair(P, XS, i, j),
        9: lambda: _lead([P2], xx),
        10: lambda: _lead([L2], xx),
        11: lambda: _lead([XP, SL], xx),
        12: lambda: _ll(i, j),
        13: lambda: _lead([SL], _pair(X, P, i, j)),
        14: lambda: _lead([P2], _pair(X, XS, i, j)),
        15: lambda: _lead([L2], _pair(X, XS, i, j)),
        16: lambda: _lead([XP], _pair(X, PS, i, j)),
        17: lambda: [[P[i], P[j]]],
        18: lambda: _lead([XP], _pair(P, XS, i, j)),
        19: lambda: _pair(P, PS, i, j),
        20: lambda: _pair(X, PS, i, j),
        21: lambda: _lead([XP], _pair(L, SIGMA, i, j)),
        22: lambda: _lead([XP], _pair(X, P, i, j)),
        23: lambda: _lead([XP, XP], xx),
        24: lambda: _lead([XP, XP], _pair(X, XS, i, j)),
        25: lambda: _lead([SX], _pair(X, L, i, j)),
        26: lambda: _lead([XP, SX], _pair(X, L, i, j)),
        27: lambda: _lead([SX], _pair(P, L, i, j)),
        28: lambda: _lead([SP], _pair(X, L, i, j)),
    }
    return table[k]()


def _pseudo_terms(k: int, i: int, j: int):
    xx = [[X[i], X[j]]]
    table = {
        1: lambda: _pair(X, SIGMA, i, j),
        2: lambda: _lead([XP], _pair(X, SIGMA, i, j)),
        3: lambda: _pair(P, SIGMA, i, j),
        4: lambda: _lead([SX], xx),
        5: lambda: _lead([SP], xx),
        6: lambda: _lead([XP, SX], xx),
        7: lambda: _lead([SX], _pair(X, P, i, j)),
        8: lambda: _pair(X, L, i, j),
        9: lambda: _lead([P2], _pair(X, SIGMA, i, j)),
        10: lambda: _lead([L2], _pair(X, SIGMA, i, j)),
        11: lambda: _lead([XP], _pair(P, SIGMA, i, j)),
        12: lambda: _lead([XP], _pair(XS, L, i, j)),
        13: lambda: _pair(PS, L, i, j),
        14: lambda: _lead([SX, L2], xx),
        15: lambda: _lead([XP, SX], _pair(X, P, i, j)),
        16: lambda: [[SX, P[i], P[j]]],
        17: lambda: _lead([XP], _pair(X, L, i, j)),
        18: lambda: _lead([SL], _pair(X, L, i, j)),
        19: lambda: _pair(P, L, i, j),
        20: lambda: _lead([SP], _pair(X, P, i, j)),
        21: lambda: _lead([XP], _pair(L, SIGMA, i, j)),
        22: lambda: _lead([SX], _ll(i, j)),
        23: lambda: _pair(XS, L, i, j),
        24: lambda: _lead([XP, SP], xx),
        25: lambda: _lead([XP, XP], _pair(X, SIGMA, i, j)),
        26: lambda: _lead([XP, XP, SX], xx),
    }
    return table[k]()


FAMILY_SIZE = {"T": 28, "Y": 26}
_FAMILY_ALIASES = {"T": "T", "tensor": "T", "Y": "Y", "pseudo": "Y", "pseudotensor": "Y",
                   "pseudo-tensor": "Y"}


def family_key(family: str) -> str:
    try:
        return _FAMILY_ALIASES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}") from None


def generator_factors(family: str, k: int, i: int, j: int) -> list[list[Node]]:
    """The printed generator as a list of ordered factor lists (summed)."""
    fam = family_key(family)
    if not 1 <= k <= FAMILY_SIZE[fam]:
        raise ValueError(f"{fam}{k} out of range 1..{FAMILY_SIZE[fam]}")
    if i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ValueError("axes must be 1, 2 or 3")
    terms = _tensor_terms if fam == "T" else _pseudo_terms
    return terms(k, i - 1, j - 1)


_node_cache: dict = {}


def tensor_node(family: str, k: int, i: int, j: int, symmetrized: bool = False) -> Node:
    key = (family_key(family), k, i, j, symmetrized)
    hit = _node_cache.get(key)
    if hit is None:
        wrap = Sym if symmetrized else Prod
        parts = [wrap(f) for f in generator_factors(family, k, i, j)]
        hit = parts[0] if len(parts) == 1 else Sum((ONE, p) for p in parts)
        _node_cache[key] = hit
    return hit


def tensor_component(family: str, k: int, i: int, j: int, mode: str = "quantum"):
    """Generator ``T_k^{ij}`` or ``Y_k^{ij}`` with factors in printed order."""
    node = tensor_node(family, k, i, j)
    if mode == "quantum":
        return node.quantum()
    if mode == "symbol":
        return node.symbol()
    raise ValueError(f"mode must be 'quantum' or 'symbol', got {mode!r}")
