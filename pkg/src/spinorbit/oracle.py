"""Independent check of the algebra engine by acting on explicit spinor functions.

Operators are applied factor by factor to functions
``g(r) * x1^a x2^b x3^c * chi`` with ``chi`` a spin-up or spin-down basis
spinor, using only the product rule and ``d/dx_k g(r) = x_k/r g'(r)``.  No
normal ordering is involved, so agreement with the engine is meaningful.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from . import builders as B
from .field import ONE, FieldElem, SpatialPoly, as_field, const, d_dr, r_power, symbol
from .operators import OpExpr, commutator, multiply

__all__ = ["SpinorFunc", "apply", "cross_check", "product_check", "Verdict",
           "random_operator", "random_spinor", "campaign", "catalog_campaign", "basis_functions"]

UP, DOWN = 0, 1
_HBAR = symbol("hbar")
_I = symbol("i")
_MINUS_I_HBAR = -(_I * _HBAR)


def _add_into(out: dict, key, f: FieldElem) -> None:
    g = out.get(key)
    g = f if g is None else g + f
    if g:
        out[key] = g
    else:
        out.pop(key, None)


class SpinorFunc:
    """``sum g(r) x1^a x2^b x3^c chi_spin`` with exponents kept as written.

    Keys are ``(a, b, c, spin)`` with ``spin`` 0 (up) or 1 (down); values
    are radial coefficients.  Equality reduces ``x3^2`` to ``r^2 - x1^2 - x2^2``.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None):
        self.terms = {k: v for k, v in (terms or {}).items() if v}

    @staticmethod
    def basis(spin: int = UP, a: int = 0, b: int = 0, c: int = 0, radial=ONE) -> "SpinorFunc":
        if spin not in (UP, DOWN):
            raise ValueError("spin index must be 0 (up) or 1 (down)")
        return SpinorFunc({(a, b, c, spin): as_field(radial)})

    # -- linear structure --------------------------------------------------

    def __add__(self, other: "SpinorFunc") -> "SpinorFunc":
        out = dict(self.terms)
        for k, v in other.terms.items():
            _add_into(out, k, v)
        return SpinorFunc(out)

    def __neg__(self):
        return SpinorFunc({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, f) -> "SpinorFunc":
        f = as_field(f)
        return SpinorFunc({k: v * f for k, v in self.terms.items()})

    # -- elementary actions ------------------------------------------------

    def times_coord(self, k: int) -> "SpinorFunc":
        out = {}
        for (a, b, c, s), g in self.terms.items():
            e = [a, b, c]
            e[k - 1] += 1
            _add_into(out, (*e, s), g)
        return SpinorFunc(out)

    def times_radial(self, f: FieldElem) -> "SpinorFunc":
        return self.scale(f)

    def derivative(self, k: int) -> "SpinorFunc":
        """``d/dx_k`` by the product rule."""
        out = {}
        for (a, b, c, s), g in self.terms.items():
            e = [a, b, c]
            dg = d_dr(g)
            if dg:
                e2 = list(e)
                e2[k - 1] += 1
                _add_into(out, (*e2, s), dg * r_power(-1))
            n = e[k - 1]
            if n:
                e3 = list(e)
                e3[k - 1] -= 1
                _add_into(out, (*e3, s), g * n)
        return SpinorFunc(out)

    def momentum(self, k: int) -> "SpinorFunc":
        return self.derivative(k).scale(_MINUS_I_HBAR)

    def pauli(self, a: int) -> "SpinorFunc":
        out = {}
        for (x, y, z, s), g in self.terms.items():
            if a == 1:
                _add_into(out, (x, y, z, 1 - s), g)
            elif a == 2:
                # sigma2 up = i down, sigma2 down = -i up
                _add_into(out, (x, y, z, 1 - s), g * (_I if s == UP else -_I))
            elif a == 3:
                _add_into(out, (x, y, z, s), g if s == UP else -g)
            else:
                raise ValueError("Pauli index must be 1, 2 or 3")
        return SpinorFunc(out)

    # -- comparison ----------------------------------------------------------

    def reduced(self) -> dict:
        """Terms with ``x3`` degree at most one."""
        pending = dict(self.terms)
        out: dict = {}
        r2 = r_power(2)
        while pending:
            (a, b, c, s), g = pending.popitem()
            if c < 2:
                _add_into(out, (a, b, c, s), g)
                continue
            _add_into(pending, (a, b, c - 2, s), g * r2)
            _add_into(pending, (a + 2, b, c - 2, s), -g)
            _add_into(pending, (a, b + 2, c - 2, s), -g)
        return out

    def is_zero(self) -> bool:
        return not self.reduced()

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if not isinstance(other, SpinorFunc):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (a, b, c, s), g in sorted(self.terms.items()):
            mono = "*".join(f"x{k}^{e}" if e > 1 else f"x{k}" for k, e in ((1, a), (2, b), (3, c)) if e)
            spin = "up" if s == UP else "down"
            parts.append(f"({g.render()})" + (f"*{mono}" if mono else "") + f"*chi_{spin}")
        return " + ".join(parts)

    def __repr__(self):
        return f"SpinorFunc({self.render()})"


# -- application -----------------------------------------------------------------

def _times_poly(poly: SpatialPoly, psi: SpinorFunc) -> SpinorFunc:
    out = SpinorFunc()
    for (e1, e2, e3), f in poly.terms.items():
        phi = psi
        for k, e in ((1, e1), (2, e2), (3, e3)):
            for _ in range(e):
                phi = phi.times_coord(k)
        out = out + phi.times_radial(f)
    return out


def _apply_opexpr(a: OpExpr, psi: SpinorFunc) -> SpinorFunc:
    out = SpinorFunc()
    for (pauli, n), poly in a.terms.items():
        phi = psi
        for k, e in enumerate(n, start=1):
            for _ in range(e):
                phi = phi.momentum(k)
        if pauli:
            phi = phi.pauli(pauli)
        out = out + _times_poly(poly, phi)
    return out


def _apply_node(n: B.Node, psi: SpinorFunc) -> SpinorFunc:
    if isinstance(n, B.Scalar):
        return _times_poly(n.poly, psi)
    if isinstance(n, B.Atom):
        if n.kind == "x":
            return psi.times_coord(n.k)
        if n.kind == "p":
            return psi.momentum(n.k)
        return psi.pauli(n.k)
    if isinstance(n, B.Sum):
        out = SpinorFunc()
        for c, child in n.items:
            out = out + _apply_node(child, psi).scale(c)
        return out
    if isinstance(n, B.Prod):
        return _apply_sequence(n.factors, psi)
    if isinstance(n, B.Sym):
        out = SpinorFunc()
        perms = list(itertools.permutations(n.factors))
        for perm in perms:
            out = out + _apply_sequence(perm, psi)
        return out.scale(const(1) / len(perms))
    # adjoints (and any future node types) go through their normal form
    return _apply_opexpr(n.quantum(), psi)


def _apply_sequence(factors, psi: SpinorFunc) -> SpinorFunc:
    for f in reversed(tuple(factors)):
        psi = apply(f, psi)
    return psi


def apply(a, psi: SpinorFunc) -> SpinorFunc:
    """Act with ``a`` on ``psi``.

    ``a`` may be an ``OpExpr`` (applied term by term), an expression tree
    (applied recursively, factors right to left) or a list of factors.
    """
    if isinstance(a, OpExpr):
        return _apply_opexpr(a, psi)
    if isinstance(a, B.Node):
        return _apply_node(a, psi)
    if isinstance(a, (list, tuple)):
        return _apply_sequence(a, psi)
    f = as_field(a)
    if f is NotImplemented:
        raise TypeError(f"cannot apply {type(a).__name__}")
    return psi.scale(f)


# -- verdicts ----------------------------------------------------------------------

@dataclass
class Verdict:
    agree: bool
    difference: SpinorFunc
    engine_zero: bool

    def __bool__(self):
        return self.agree


def _opexpr(a) -> OpExpr:
    return a.quantum() if isinstance(a, B.Node) else a


def cross_check(a, b, psi: SpinorFunc) -> Verdict:
    """Engine commutator against ``a(b psi) - b(a psi)`` applied directly."""
    c = commutator(_opexpr(a), _opexpr(b))
    engine = apply(c, psi)
    direct = apply(a, apply(b, psi)) - apply(b, apply(a, psi))
    diff = engine - direct
    return Verdict(diff.is_zero(), diff, c.is_zero())


def product_check(a, b, psi: SpinorFunc) -> Verdict:
    """Engine product against ``a(b psi)``."""
    m = multiply(_opexpr(a), _opexpr(b))
    diff = apply(m, psi) - apply(a, apply(b, psi))
    return Verdict(diff.is_zero(), diff, m.is_zero())


# -- randomized campaigns ------------------------------------------------------------

_RADIAL_CHOICES = (
    lambda rng: r_power(rng.choice((-2, -1, 1, 2))),
    lambda rng: const(rng.randint(-3, 3) or 1),
    lambda rng: symbol("hbar") * const(rng.choice((1, -2))),
    lambda rng: symbol("alpha") * r_power(rng.choice((-1, 2))),
)


def random_operator(rng: random.Random, max_factors: int = 4, max_terms: int = 3) -> B.Node:
    """A sum of short products of atoms and radial scalars."""
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        factors = []
        for _ in range(rng.randint(1, max_factors)):
            kind = rng.choice(("x", "p", "p", "sigma", "radial"))
            if kind == "radial":
                factors.append(B.Scalar(SpatialPoly.scalar(rng.choice(_RADIAL_CHOICES)(rng))))
            else:
                factors.append(B.Atom(kind, rng.randint(1, 3)))
        coeff = const(rng.choice((1, -1, 2, "1/2"))) * (_I if rng.random() < 0.3 else ONE)
        terms.append((coeff, B.Prod(factors) if len(factors) > 1 else factors[0]))
    return B.Sum(terms)


def random_spinor(rng: random.Random) -> SpinorFunc:
    psi = SpinorFunc()
    for _ in range(rng.randint(1, 2)):
        psi = psi + SpinorFunc.basis(rng.randint(0, 1), rng.randint(0, 2), rng.randint(0, 2),
                                     rng.randint(0, 2), r_power(rng.choice((-2, -1, 0, 1))))
    return psi


def basis_functions() -> list[SpinorFunc]:
    """Three fixed test functions used for the catalog sweep."""
    return [
        SpinorFunc.basis(UP, 1, 0, 0, r_power(-1)),
        SpinorFunc.basis(DOWN, 0, 1, 1),
        SpinorFunc.basis(UP, 0, 0, 1, r_power(2)) + SpinorFunc.basis(DOWN, 1, 1, 0),
    ]


@dataclass
class CampaignResult:
    checked: int
    discrepancies: list

    @property
    def ok(self) -> bool:
        return not self.discrepancies


def campaign(n: int = 100, seed: int = 0) -> CampaignResult:
    """``n`` random (a, b, psi) triples through :func:`cross_check` and :func:`product_check`."""
    rng = random.Random(seed)
    bad = []
    for t in range(n):
        a, b = random_operator(rng), random_operator(rng)
        psi = random_spinor(rng)
        for name, check in (("commutator", cross_check), ("product", product_check)):
            if not check(a, b, psi):
                bad.append((t, name, repr(a), repr(b), psi.render()))
    return CampaignResult(n, bad)


def catalog_campaign(pairs, functions=None, components=None) -> CampaignResult:
    """Cross-check ``[H(case), X]`` for catalog pairs on a few test functions.

    ``pairs`` is an iterable of ``(case, integral_id)``; ``components``
    optionally restricts which component of each integral is sampled (the
    first one by default).
    """
    from . import catalog as C

    funcs = functions if functions is not None else basis_functions()
    bad = []
    count = 0
    for case, ident in pairs:
        entry = C.get_integral(ident)
        h = C.hamiltonian_node(case)
        idx = components or entry.components()[:1]
        for comp in idx:
            if entry.arity == 1:
                x = entry.build()[comp[0] - 1]
            else:
                x = entry.build(*comp)
            for psi in funcs:
                count += 1
                if not cross_check(h, x, psi):
                    bad.append((case, ident, comp, psi.render()))
    return CampaignResult(count, bad)
