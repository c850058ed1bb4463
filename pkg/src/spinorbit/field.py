"""Exact coefficient arithmetic for radial operator calculus.

Two layers live here:

``FieldElem``
    Elements of the differential field of radial functions.  Generators are
    the imaginary unit ``i``, a formal sign ``eps``, the algebraic radical
    ``s = sqrt(1 + beta*r**2)``, the constants ``hbar``, ``alpha``, ``beta``,
    free parameters (``c1``, ``d2``, ...), the radius ``r`` and jets
    ``F, F', F'', ...`` of symbolic radial functions.  The rewrite rules
    ``i**2 = -1``, ``eps**2 = 1`` and ``s**2 = 1 + beta*r**2`` are applied on
    every product, so each generator of that trio appears with degree <= 1.

``SpatialPoly``
    Polynomials in ``x1, x2, x3`` with ``FieldElem`` coefficients, reduced
    modulo ``x1**2 + x2**2 + x3**2 = r**2`` by eliminating ``x3**2``.

Numerators are sparse Laurent polynomials: every ordinary generator (``r``,
``hbar``, jets, ...) may carry a negative exponent, so monomials are units
and only genuine polynomial factors such as ``1 + beta*r**2`` are kept in
the denominator.  A denominator is a product of registered irreducible
*atoms*; each atom is linear in some generator with a monomial coefficient,
which makes exact division a one-variable synthetic division.
"""

from __future__ import annotations

import re

import math

from gmpy2 import mpq

__all__ = [
    "FieldElem",
    "SpatialPoly",
    "as_field",
    "const",
    "symbol",
    "jet",
    "normalize",
    "d_dr",
    "d_dr_n",
    "r_power",
    "partial",
    "I",
    "EPS",
    "SQRTB",
    "R",
    "HBAR",
    "ALPHA",
    "BETA",
    "ZERO",
    "ONE",
]

# ---------------------------------------------------------------------------
# generator registry

# kinds: "unit" (i), "sign" (eps), "sqrt" (s), "r", "const", "jet"
_VAR_KIND: list[str] = []
_VAR_BASE: list[str] = []
_VAR_ORDER: list[int] = []
_VAR_INDEX: dict[tuple[str, int], int] = {}

_RANK = {"unit": 0, "sign": 1, "sqrt": 2, "const": 4, "r": 6, "jet": 8}
_CONST_RANK = {"hbar": 3, "alpha": 4, "beta": 5}


def _register(kind: str, base: str, order: int = 0) -> int:
    key = (base, order)
    idx = _VAR_INDEX.get(key)
    if idx is not None:
        if _VAR_KIND[idx] != kind:
            raise ValueError(f"generator {base!r} already registered as {_VAR_KIND[idx]}")
        return idx
    idx = len(_VAR_KIND)
    _VAR_KIND.append(kind)
    _VAR_BASE.append(base)
    _VAR_ORDER.append(order)
    _VAR_INDEX[key] = idx
    return idx


I_VAR = _register("unit", "i")
EPS_VAR = _register("sign", "eps")
S_VAR = _register("sqrt", "sqrtb")
R_VAR = _register("r", "r")
HBAR_VAR = _register("const", "hbar")
ALPHA_VAR = _register("const", "alpha")
BETA_VAR = _register("const", "beta")

_SPECIAL = (I_VAR, EPS_VAR, S_VAR)

# names that can never be jets or free parameters
RESERVED = {"i", "eps", "sqrtb", "r", "hbar", "alpha", "beta"}


def var_name(v: int) -> str:
    base = _VAR_BASE[v]
    if _VAR_KIND[v] == "jet":
        return base + "'" * _VAR_ORDER[v]
    return base


def _var_sort_key(v: int):
    kind = _VAR_KIND[v]
    base = _VAR_BASE[v]
    if kind == "const":
        rank = _CONST_RANK.get(base, 7)
    else:
        rank = _RANK[kind]
    # natural sort so that f2 < f10
    head = base.rstrip("0123456789")
    tail = base[len(head):]
    return (rank, head, int(tail) if tail else -1, _VAR_ORDER[v])


def is_jet(v: int) -> bool:
    return _VAR_KIND[v] == "jet"


def var_base(v: int) -> str:
    return _VAR_BASE[v]


def var_order(v: int) -> int:
    return _VAR_ORDER[v]


_JET_NAME = re.compile(r"(V0|V1|f\d+)$")


def is_jet_name(name: str) -> bool:
    """True if ``name`` is (or would be registered as) a symbolic radial function."""
    idx = _VAR_INDEX.get((name, 0))
    if idx is None:
        return bool(_JET_NAME.match(name))
    return _VAR_KIND[idx] == "jet"


def has_hbar_denominator(e: "FieldElem") -> bool:
    return any(HBAR_VAR in _pvars(_ATOMS[a].poly) for a, _ in e.den)


# ---------------------------------------------------------------------------
# sparse Laurent polynomials: dict[monomial, mpq], monomial = sorted ((var, exp), ...)

_ONE_MONO: tuple = ()
_mul_cache: dict = {}


def _mono_mul_plain(m1: tuple, m2: tuple) -> tuple:
    if not m1:
        return m2
    if not m2:
        return m1
    d = dict(m1)
    for v, e in m2:
        e2 = d.get(v, 0) + e
        if e2:
            d[v] = e2
        else:
            del d[v]
    return tuple(sorted(d.items()))


def _mono_mul(m1: tuple, m2: tuple):
    """Product of two monomials as a tuple of (monomial, int) after rewriting."""
    key = (m1, m2)
    hit = _mul_cache.get(key)
    if hit is not None:
        return hit
    d = dict(m1)
    for v, e in m2:
        e2 = d.get(v, 0) + e
        if e2:
            d[v] = e2
        else:
            del d[v]
    sign = 1
    half = 0
    e = d.get(I_VAR, 0)
    if e >= 2:
        q, rem = divmod(e, 2)
        if q % 2:
            sign = -sign
        if rem:
            d[I_VAR] = 1
        else:
            del d[I_VAR]
    e = d.get(EPS_VAR, 0)
    if e >= 2:
        if e % 2:
            d[EPS_VAR] = 1
        else:
            del d[EPS_VAR]
    e = d.get(S_VAR, 0)
    if e >= 2:
        half, rem = divmod(e, 2)
        if rem:
            d[S_VAR] = 1
        else:
            del d[S_VAR]
    base = tuple(sorted(d.items()))
    if not half:
        out = ((base, sign),)
    else:
        # (1 + beta r^2)^half
        terms = []
        for k in range(half + 1):
            c = math.comb(half, k) * sign
            if k:
                mono = _mono_mul_plain(base, ((R_VAR, 2 * k), (BETA_VAR, k)))
            else:
                mono = base
            terms.append((mono, c))
        out = tuple(terms)
    if len(_mul_cache) > 500_000:
        _mul_cache.clear()
    _mul_cache[key] = out
    return out


def _padd(a: dict, b: dict) -> dict:
    if len(a) < len(b):
        a, b = b, a
    out = dict(a)
    for m, c in b.items():
        c2 = out.get(m)
        if c2 is None:
            out[m] = c
        else:
            c2 = c2 + c
            if c2:
                out[m] = c2
            else:
                del out[m]
    return out


def _pacc(out: dict, b: dict, scale=1) -> None:
    """In-place ``out += scale*b``."""
    for m, c in b.items():
        if scale != 1:
            c = c * scale
        c2 = out.get(m)
        if c2 is None:
            out[m] = c
        else:
            c2 = c2 + c
            if c2:
                out[m] = c2
            else:
                del out[m]


def _pmul(a: dict, b: dict) -> dict:
    if not a or not b:
        return {}
    if len(b) == 1 and len(a) > 1:
        a, b = b, a
    out: dict = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            c = c1 * c2
            for m, k in _mono_mul(m1, m2):
                v = c * k if k != 1 else c
                old = out.get(m)
                if old is None:
                    out[m] = v
                else:
                    v = old + v
                    if v:
                        out[m] = v
                    else:
                        del out[m]
    return out


def _pscale(a: dict, c) -> dict:
    if not c:
        return {}
    return {m: v * c for m, v in a.items()}


def _pmono(a: dict, mono: tuple, c=1) -> dict:
    """Multiply by ``c*mono`` where ``mono`` holds no rewritten generators."""
    return {_mono_mul_plain(m, mono): v * c for m, v in a.items()}


def _ppow(a: dict, n: int) -> dict:
    out = {_ONE_MONO: mpq(1)}
    base = a
    while n:
        if n & 1:
            out = _pmul(out, base)
        n >>= 1
        if n:
            base = _pmul(base, base)
    return out


def _pconj(a: dict, var: int) -> dict:
    """Flip the sign of ``var`` (``var`` has degree <= 1 in every monomial)."""
    return {m: (-c if any(v == var for v, _ in m) else c) for m, c in a.items()}


def _has_var(a: dict, var: int) -> bool:
    return any(v == var for m in a for v, _ in m)


def _pvars(a: dict) -> set:
    return {v for m in a for v, _ in m}


# ---------------------------------------------------------------------------
# denominator atoms


class _Atom:
    __slots__ = ("poly", "var", "lead", "lead_c", "rest", "key")

    def __init__(self, poly: dict, var: int):
        self.poly = poly
        self.var = var
        lead = [(m, c) for m, c in poly.items() if any(v == var for v, _ in m)]
        (m, c), = lead
        self.lead = tuple((v, e) for v, e in m if v != var)
        self.lead_c = c
        self.rest = {m2: c2 for m2, c2 in poly.items() if m2 != m}
        self.key = tuple(sorted(poly.items()))


_ATOMS: list[_Atom] = []
_ATOM_INDEX: dict[tuple, int] = {}


def _normalize_unit(p: dict):
    """Split ``p`` into ``c*mono`` (a unit) times a primitive polynomial."""
    allv = _pvars(p)
    mins = {}
    for v in allv:
        lo = min(dict(m).get(v, 0) for m in p)
        if lo:
            mins[v] = lo
    unit_mono = tuple(sorted(mins.items()))
    inv = tuple((v, -e) for v, e in unit_mono)
    q = {_mono_mul_plain(m, inv): c for m, c in p.items()}
    lead_mono = min(q, key=_mono_sort_key)
    c = q[lead_mono]
    q = {m: v / c for m, v in q.items()}
    return c, unit_mono, q


def _register_atom(p: dict) -> int:
    key = tuple(sorted(p.items()))
    idx = _ATOM_INDEX.get(key)
    if idx is not None:
        return idx
    for v in sorted(_pvars(p)):
        with_v = [m for m in p if any(w == v for w, _ in m)]
        if len(with_v) == 1 and dict(with_v[0])[v] == 1 and len(p) > 1:
            atom = _Atom(p, v)
            idx = len(_ATOMS)
            _ATOMS.append(atom)
            _ATOM_INDEX[key] = idx
            return idx
    raise ValueError("unsupported denominator: " + _render_poly(p))


def _divide_atom(num: dict, atom: _Atom):
    """Exact quotient ``num / atom`` or ``None`` when not divisible."""
    v = atom.var
    by_deg: dict = {}
    for m, c in num.items():
        k = 0
        rest = m
        for w, e in m:
            if w == v:
                k = e
                rest = tuple(x for x in m if x[0] != v)
                break
        by_deg.setdefault(k, {})[rest] = c
    if not by_deg:
        return {}
    kmin = min(by_deg)
    kmax = max(by_deg)
    if kmax == kmin:
        return None
    inv_lead = tuple((w, -e) for w, e in atom.lead)
    inv_c = 1 / atom.lead_c
    quot: dict = {}
    for k in range(kmax, kmin, -1):
        nk = by_deg.get(k)
        if not nk:
            continue
        qk = {_mono_mul_plain(m, inv_lead): c * inv_c for m, c in nk.items()}
        quot[k - 1] = qk
        below = by_deg.setdefault(k - 1, {})
        _pacc(below, _pmul(qk, atom.rest), -1)
    if by_deg.get(kmin):
        return None
    out: dict = {}
    for k, qk in quot.items():
        if not qk:
            continue
        if k:
            for m, c in qk.items():
                out[_mono_mul_plain(m, ((v, k),))] = c
        else:
            out.update(qk)
    return out


def _atom_poly(idx: int) -> dict:
    return _ATOMS[idx].poly


# ---------------------------------------------------------------------------
# rendering helpers


def _mono_sort_key(m: tuple):
    return tuple((_var_sort_key(v), e) for v, e in sorted(m, key=lambda t: _var_sort_key(t[0])))


def _fmt_q(c) -> str:
    c = mpq(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _render_mono(m: tuple) -> list[str]:
    parts = []
    for v, e in sorted(m, key=lambda t: _var_sort_key(t[0])):
        name = var_name(v)
        parts.append(name if e == 1 else f"{name}^{e}")
    return parts


def _render_poly(p: dict) -> str:
    if not p:
        return "0"
    out = []
    for m in sorted(p, key=_mono_sort_key):
        c = p[m]
        neg = c < 0
        a = -c if neg else c
        parts = _render_mono(m)
        if a != 1 or not parts:
            parts.insert(0, _fmt_q(a))
        body = "*".join(parts)
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


# ---------------------------------------------------------------------------
# FieldElem


class FieldElem:
    """Canonical element ``num / prod(atom**k)`` of the coefficient field.

    Instances are immutable and hashable; equality is structural on the
    canonical form, which is unique.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: dict, den: tuple = ()):
        # trusted constructor: (num, den) must already be canonical
        self.num = num
        self.den = den
        self._hash = None

    # -- construction -----------------------------------------------------

    @staticmethod
    def _make(num: dict, den: dict) -> "FieldElem":
        if not num:
            return ZERO
        out_den = []
        for a in sorted(den):
            k = den[a]
            atom = _ATOMS[a]
            while k > 0:
                q = _divide_atom(num, atom)
                if q is None:
                    break
                num = q
                k -= 1
            if k:
                out_den.append((a, k))
        return FieldElem(num, tuple(out_den))

    # -- predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    def is_constant(self) -> bool:
        """True when free of ``r``, ``sqrtb`` and jets."""
        return not self.den and all(
            _VAR_KIND[v] in ("unit", "sign", "const") for m in self.num for v, _ in m
        )

    def rational(self):
        """The value as an ``mpq`` if this is a plain rational number, else ``None``."""
        if not self.num:
            return mpq(0)
        if self.den or len(self.num) != 1 or _ONE_MONO not in self.num:
            return None
        return self.num[_ONE_MONO]

    def variables(self) -> set:
        vs = _pvars(self.num)
        for a, _ in self.den:
            vs |= _pvars(_ATOMS[a].poly)
        return vs

    def free_names(self) -> set:
        return {var_name(v) for v in self.variables()}

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            if not self.den:
                num = _padd(self.num, other.num)
                return FieldElem(num) if num else ZERO
            return FieldElem._make(_padd(self.num, other.num), dict(self.den))
        return _sum_fields((self, other))

    __radd__ = __add__

    def __neg__(self):
        if not self.num:
            return self
        return FieldElem({m: -c for m, c in self.num.items()}, self.den)

    def __sub__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.num or not other.num:
            return ZERO
        num = _pmul(self.num, other.num)
        if not num:
            return ZERO
        if not self.den and not other.den:
            return FieldElem(num)
        if not other.den or not self.den:
            # the factor without a denominator may cancel atoms of the other
            den = dict(self.den or other.den)
            return FieldElem._make(num, den)
        den = dict(self.den)
        for a, k in other.den:
            den[a] = den.get(a, 0) + k
        return FieldElem._make(num, den)

    __rmul__ = __mul__

    def scale(self, c) -> "FieldElem":
        """Multiply by a rational number."""
        if not c or not self.num:
            return ZERO
        return FieldElem({m: v * c for m, v in self.num.items()}, self.den)

    def mul_mono(self, mono: tuple, c=1) -> "FieldElem":
        """Multiply by ``c*mono`` where ``mono`` is a Laurent unit (no i, eps, sqrtb)."""
        if not self.num:
            return ZERO
        return FieldElem(_pmono(self.num, mono, c), self.den)

    def inverse(self) -> "FieldElem":
        if not self.num:
            raise ZeroDivisionError("zero denominator")
        num = self.num
        mult = {_ONE_MONO: mpq(1)}
        for var in _SPECIAL:
            if _has_var(num, var):
                conj = _pconj(num, var)
                num = _pmul(num, conj)
                mult = _pmul(mult, conj)
                if not num:
                    raise ZeroDivisionError("zero denominator")
        # num is now a Laurent polynomial in ordinary generators
        c, unit_mono, prim = _normalize_unit(num)
        den: dict = {}
        while len(prim) > 1:
            for a, atom in enumerate(_ATOMS):
                q = _divide_atom(prim, atom)
                if q is not None:
                    den[a] = den.get(a, 0) + 1
                    prim = q
                    break
            else:
                a = _register_atom(prim)
                den[a] = den.get(a, 0) + 1
                prim = {_ONE_MONO: mpq(1)}
        (rest_mono, extra), = prim.items()
        inv_unit = tuple((v, -e) for v, e in _mono_mul_plain(unit_mono, rest_mono))
        out = _pmono(mult, inv_unit, 1 / (c * extra))
        # the old denominator moves to the numerator
        for a, k in self.den:
            out = _pmul(out, _ppow(_ATOMS[a].poly, k))
        return FieldElem._make(out, den)

    def __truediv__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        r = other.rational()
        if r is not None:
            if not r:
                raise ZeroDivisionError("zero denominator")
            return self.scale(1 / r)
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return ONE
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def conjugate(self) -> "FieldElem":
        """Complex conjugate: ``i -> -i``, every other generator real."""
        if not _has_var(self.num, I_VAR):
            return self
        return FieldElem(_pconj(self.num, I_VAR), self.den)

    # -- comparison -------------------------------------------------------

    def _key(self):
        return (frozenset(self.num.items()), self.den)

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            if self is other:
                return True
            return self.den == other.den and self.num == other.num
        o = as_field(other)
        if o is NotImplemented:
            return NotImplemented
        return self == o

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    # -- rendering --------------------------------------------------------

    def render(self) -> str:
        """Stable text form that the expression parser reads back."""
        body = _render_poly(self.num)
        if not self.den:
            return body
        dens = []
        for a, k in sorted(self.den, key=lambda t: tuple(map(_mono_sort_key, _ATOMS[t[0]].poly))):
            dens.append(f"({_render_poly(_ATOMS[a].poly)})^{-k}")
        return f"({body})*" + "*".join(dens)

    def __str__(self):
        return self.render()

    def __repr__(self):
        return f"FieldElem({self.render()!r})"

    # -- substitution -----------------------------------------------------

    def subs(self, values: dict) -> "FieldElem":
        """Substitute generators (by index) with field elements."""
        if not values:
            return self
        touched = self.variables() & values.keys()
        if not touched:
            return self
        powers: dict = {}

        def power(v, e):
            key = (v, e)
            hit = powers.get(key)
            if hit is None:
                val = values[v]
                if e < 0 and not val:
                    raise ZeroDivisionError("zero denominator")
                hit = val ** e
                powers[key] = hit
            return hit

        def sub_poly(p: dict) -> FieldElem:
            terms = []
            for m, c in p.items():
                keep = tuple((v, e) for v, e in m if v not in values)
                val = FieldElem({keep: c}) if keep else FieldElem({_ONE_MONO: c})
                for v, e in m:
                    if v in values:
                        val = val * power(v, e)
                        if not val:
                            break
                terms.append(val)
            return _sum_fields(terms)

        out = sub_poly(self.num)
        for a, k in self.den:
            d = sub_poly(_ATOMS[a].poly)
            if not d:
                raise ZeroDivisionError("zero denominator")
            out = out / d ** k
        return out


def _sum_fields(items) -> FieldElem:
    items = [x for x in items if x.num]
    if not items:
        return ZERO
    if len(items) == 1:
        return items[0]
    dens = {x.den for x in items}
    if len(dens) == 1:
        den = items[0].den
        num: dict = {}
        for x in items:
            _pacc(num, x.num)
        if not num:
            return ZERO
        if not den:
            return FieldElem(num)
        return FieldElem._make(num, dict(den))
    lcm: dict = {}
    for d in dens:
        for a, k in d:
            if lcm.get(a, 0) < k:
                lcm[a] = k
    num = {}
    for x in items:
        own = dict(x.den)
        mult = None
        for a, k in lcm.items():
            miss = k - own.get(a, 0)
            if miss:
                f = _ppow(_ATOMS[a].poly, miss)
                mult = f if mult is None else _pmul(mult, f)
        _pacc(num, _pmul(x.num, mult) if mult is not None else x.num)
    return FieldElem._make(num, lcm)


FieldElem.sum = staticmethod(_sum_fields)

ZERO = FieldElem({})
ONE = FieldElem({_ONE_MONO: mpq(1)})


def as_field(x):
    if isinstance(x, FieldElem):
        return x
    if isinstance(x, bool):
        return NotImplemented
    if isinstance(x, int):
        return FieldElem({_ONE_MONO: mpq(x)}) if x else ZERO
    try:
        q = mpq(x)
    except (TypeError, ValueError):
        return NotImplemented
    return FieldElem({_ONE_MONO: q}) if q else ZERO


def normalize(e) -> FieldElem:
    """Canonical form of ``e``.

    Arithmetic already returns canonical elements, so for a ``FieldElem``
    this re-runs the denominator cancellation and is idempotent.  Strings
    are parsed with the expression language.
    """
    if isinstance(e, str):
        from .catalog import parse_field

        return parse_field(e)
    f = as_field(e)
    if f is NotImplemented:
        raise TypeError(f"cannot normalize {type(e).__name__}")
    return FieldElem._make(dict(f.num), dict(f.den))


def const(q) -> FieldElem:
    out = as_field(q)
    if out is NotImplemented:
        raise TypeError(f"not a rational number: {q!r}")
    return out


def _gen(v: int) -> FieldElem:
    return FieldElem({((v, 1),): mpq(1)})


def symbol(name: str) -> FieldElem:
    """A named constant: ``hbar``, ``alpha``, ``beta``, ``eps``, ``i`` or a free parameter."""
    fixed = {"i": I_VAR, "eps": EPS_VAR, "sqrtb": S_VAR, "r": R_VAR,
             "hbar": HBAR_VAR, "alpha": ALPHA_VAR, "beta": BETA_VAR}
    if name in fixed:
        return _gen(fixed[name])
    if not name.isidentifier():
        raise ValueError(f"bad symbol name {name!r}")
    return _gen(_register("const", name))


def jet(name: str, order: int = 0) -> FieldElem:
    """The ``order``-th r-derivative of the symbolic radial function ``name``."""
    if name in RESERVED:
        raise ValueError(f"{name!r} is reserved")
    if order < 0:
        raise ValueError("negative jet order")
    return _gen(_register("jet", name, order))


def jet_index(name: str, order: int = 0) -> int:
    return _register("jet", name, order)


def symbol_index(name: str) -> int:
    fixed = {"i": I_VAR, "eps": EPS_VAR, "sqrtb": S_VAR, "r": R_VAR,
             "hbar": HBAR_VAR, "alpha": ALPHA_VAR, "beta": BETA_VAR}
    if name in fixed:
        return fixed[name]
    return _register("const", name)


I = _gen(I_VAR)
EPS = _gen(EPS_VAR)
SQRTB = _gen(S_VAR)
R = _gen(R_VAR)
HBAR = _gen(HBAR_VAR)
ALPHA = _gen(ALPHA_VAR)
BETA = _gen(BETA_VAR)

# 1 + beta r^2 is atom 0
_register_atom({_ONE_MONO: mpq(1), ((R_VAR, 2), (BETA_VAR, 1)): mpq(1)})


def qnum(p) -> FieldElem:
    return const(p)


def r_power(k: int) -> FieldElem:
    return FieldElem({((R_VAR, k),): mpq(1)}) if k else ONE


# ---------------------------------------------------------------------------
# d/dr

_ddr_cache: dict = {}


def _ddr_poly(p: dict) -> FieldElem:
    """Derivative of a numerator polynomial, as a field element."""
    plain: dict = {}
    via_s: dict = {}
    for m, c in p.items():
        for v, e in m:
            kind = _VAR_KIND[v]
            if kind == "r":
                rest = tuple((w, f) if w != v else (w, f - 1) for w, f in m if w != v or f != 1)
                _pacc(plain, {rest: c * e})
            elif kind == "jet":
                nxt = _register("jet", _VAR_BASE[v], _VAR_ORDER[v] + 1)
                d = dict(m)
                if e == 1:
                    del d[v]
                else:
                    d[v] = e - 1
                d[nxt] = d.get(nxt, 0) + 1
                _pacc(plain, {tuple(sorted(d.items())): c * e})
            elif kind == "sqrt":
                # d s/dr = beta r s / (1 + beta r^2); e == 1 always
                _pacc(via_s, {_mono_mul_plain(m, ((R_VAR, 1), (BETA_VAR, 1))): c})
    out = FieldElem(plain) if plain else ZERO
    if via_s:
        out = out + FieldElem._make(via_s, {0: 1})
    return out


def d_dr(e: FieldElem) -> FieldElem:
    """Formal derivative with respect to ``r``."""
    if not e.num:
        return ZERO
    hit = _ddr_cache.get(e)
    if hit is not None:
        return hit
    out = _ddr_poly(e.num)
    if e.den:
        # (N/D)' = N'/D - (N/D) * sum k A'/A
        out = out * FieldElem({_ONE_MONO: mpq(1)}, e.den)
        corr = ZERO
        for a, k in e.den:
            da = _ddr_poly(_ATOMS[a].poly)
            if da.num:
                corr = corr + da.scale(k) * FieldElem({_ONE_MONO: mpq(1)}, ((a, 1),))
        if corr.num:
            out = out - e * corr
    if len(_ddr_cache) > 200_000:
        _ddr_cache.clear()
    _ddr_cache[e] = out
    return out


def d_dr_n(e: FieldElem, n: int) -> FieldElem:
    for _ in range(n):
        e = d_dr(e)
    return e


# ---------------------------------------------------------------------------
# SpatialPoly


def _xmul(e1: tuple, e2: tuple):
    """x-monomial product as a list of (exponent, sign, r^2 power)."""
    a = e1[0] + e2[0]
    b = e1[1] + e2[1]
    c = e1[2] + e2[2]
    if c < 2:
        return (((a, b, c), 1, 0),)
    return _reduce_x3((a, b, c))


_x3_cache: dict = {}


def _reduce_x3(e: tuple):
    """Rewrite x^e with x3^2 -> r^2 - x1^2 - x2^2 as (exponent, coeff, r-power) terms."""
    hit = _x3_cache.get(e)
    if hit is not None:
        return hit
    a, b, c = e
    if c < 2:
        out = ((e, 1, 0),)
    else:
        acc: dict = {}
        for (e2, k, rp) in _reduce_x3((a, b, c - 2)):
            for (e3, k3, rp3) in (((e2[0], e2[1], e2[2]), 1, 2),
                                  ((e2[0] + 2, e2[1], e2[2]), -1, 0),
                                  ((e2[0], e2[1] + 2, e2[2]), -1, 0)):
                key = (e3, rp + rp3)
                acc[key] = acc.get(key, 0) + k * k3
        out = tuple((ex, k, rp) for (ex, rp), k in sorted(acc.items()) if k)
        # nested reductions already keep x3 exponent < 2
    _x3_cache[e] = out
    return out


class SpatialPoly:
    """Polynomial in ``x1, x2, x3`` over ``FieldElem`` with ``x3**2`` eliminated."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict | None = None):
        # trusted: keys have x3 exponent <= 1, values nonzero FieldElem
        self.terms = terms if terms is not None else {}
        self._hash = None

    @staticmethod
    def scalar(f) -> "SpatialPoly":
        f = as_field(f)
        return SpatialPoly({(0, 0, 0): f}) if f.num else SpatialPoly()

    @staticmethod
    def coord(k: int) -> "SpatialPoly":
        e = [0, 0, 0]
        e[k - 1] = 1
        return SpatialPoly({tuple(e): ONE})

    @staticmethod
    def from_terms(items) -> "SpatialPoly":
        """Build from (exponent, FieldElem) pairs, reducing x3 powers."""
        acc: dict = {}
        for e, f in items:
            for e2, k, rp in _reduce_x3(tuple(e)):
                g = f.mul_mono(((R_VAR, rp),), k) if rp else (f if k == 1 else f.scale(k))
                acc.setdefault(e2, []).append(g)
        return SpatialPoly._from_lists(acc)

    @staticmethod
    def _from_lists(acc: dict) -> "SpatialPoly":
        out = {}
        for e, fs in acc.items():
            f = fs[0] if len(fs) == 1 else _sum_fields(fs)
            if f.num:
                out[e] = f
        return SpatialPoly(out)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __add__(self, other: "SpatialPoly") -> "SpatialPoly":
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for e, f in other.terms.items():
            g = out.get(e)
            if g is None:
                out[e] = f
            else:
                g = g + f
                if g.num:
                    out[e] = g
                else:
                    del out[e]
        return SpatialPoly(out)

    def __neg__(self):
        return SpatialPoly({e: -f for e, f in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, SpatialPoly):
            acc: dict = {}
            for e1, f1 in self.terms.items():
                for e2, f2 in other.terms.items():
                    f = f1 * f2
                    for e, k, rp in _xmul(e1, e2):
                        g = f.mul_mono(((R_VAR, rp),), k) if rp else (f if k == 1 else f.scale(k))
                        acc.setdefault(e, []).append(g)
            return SpatialPoly._from_lists(acc)
        f = as_field(other)
        if f is NotImplemented:
            return NotImplemented
        return self.scale(f)

    __rmul__ = __mul__

    def scale(self, f: FieldElem) -> "SpatialPoly":
        if not f.num:
            return SpatialPoly()
        r = f.rational()
        if r is not None:
            if r == 1:
                return self
            return SpatialPoly({e: g.scale(r) for e, g in self.terms.items()})
        out = {}
        for e, g in self.terms.items():
            h = g * f
            if h.num:
                out[e] = h
        return SpatialPoly(out)

    def times_coord(self, k: int) -> "SpatialPoly":
        items = []
        for (a, b, c), f in self.terms.items():
            e = [a, b, c]
            e[k - 1] += 1
            items.append((tuple(e), f))
        return SpatialPoly.from_terms(items)

    def map_coeffs(self, fn) -> "SpatialPoly":
        out = {}
        for e, f in self.terms.items():
            g = fn(f)
            if g.num:
                out[e] = g
        return SpatialPoly(out)

    def conjugate(self):
        return self.map_coeffs(FieldElem.conjugate)

    def __eq__(self, other):
        if not isinstance(other, SpatialPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms):
            f = self.terms[e]
            xs = [f"x{k + 1}" + (f"^{n}" if n > 1 else "") for k, n in enumerate(e) if n]
            cs = f.render()
            if xs:
                if cs == "1":
                    parts.append("*".join(xs))
                else:
                    parts.append(f"({cs})*" + "*".join(xs))
            else:
                parts.append(f"({cs})")
        return " + ".join(parts)

    def __repr__(self):
        return f"SpatialPoly({self.render()!r})"


_partial_cache: dict = {}


def partial(i: int, p: SpatialPoly) -> SpatialPoly:
    """Cartesian derivative ``d/dx_i`` with ``d g(r) = (x_i/r) g'(r)``."""
    if i not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {i}")
    key = (i, p)
    hit = _partial_cache.get(key)
    if hit is not None:
        return hit
    items = []
    inv_r = ((R_VAR, -1),)
    for e, f in p.terms.items():
        df = d_dr(f)
        if df.num:
            e2 = list(e)
            e2[i - 1] += 1
            items.append((tuple(e2), df.mul_mono(inv_r)))
        n = e[i - 1]
        if n:
            e2 = list(e)
            e2[i - 1] -= 1
            items.append((tuple(e2), f.scale(n)))
    out = SpatialPoly.from_terms(items)
    if len(_partial_cache) > 200_000:
        _partial_cache.clear()
    _partial_cache[key] = out
    return out


def clear_caches() -> None:
    _mul_cache.clear()
    _ddr_cache.clear()
    _partial_cache.clear()
