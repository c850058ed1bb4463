"""Verification layer: commutators with H, determining systems, relations.

Every verdict is the emptiness of a canonical form.  Reports carry the
residual terms so a failure can be inspected, and serialize to the JSON
schema used by the command line.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field

from . import builders as B
from . import catalog as C
from .field import FieldElem, SpatialPoly, const, jet, symbol
from .operators import OpExpr, SymbolExpr, anticommutator, commutator, specialize

__all__ = [
    "Component",
    "ResidualReport",
    "AnsatzSpec",
    "GeneratedEq",
    "INDEPENDENT",
    "extract",
    "check_solution",
    "check_extracted",
    "check_relations",
    "check_commutation",
    "commute",
    "t1_delta_constant",
    "trace",
    "y6_decomposition",
    "a11_identity",
    "constant_shift_invariant",
]

OFF_DIAGONAL = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3) if i != j]
ALL_PAIRS = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3)]


# -- reports -------------------------------------------------------------------

def _terms(residual) -> list[dict]:
    if isinstance(residual, (OpExpr, SymbolExpr)):
        return residual.triples()
    if isinstance(residual, FieldElem):
        return [{"pauli": 0, "p": [0, 0, 0], "coeff": residual.render()}] if residual else []
    raise TypeError(f"cannot report a residual of type {type(residual).__name__}")


@dataclass
class Component:
    indices: list
    residual: object
    asserted: bool = True
    label: str = ""

    @property
    def zero(self) -> bool:
        return not self.residual

    def to_json(self) -> dict:
        out = {"indices": list(self.indices), "residual_terms": _terms(self.residual)}
        if self.label:
            out["label"] = self.label
        return out


@dataclass
class ResidualReport:
    """Outcome of one verification query.

    Only ``asserted`` components decide the status; the others are kept as
    diagnostics (raw diagonals, quantum-ordering residuals and the like).
    """

    query: str
    components: list = field(default_factory=list)
    timing_ms: float = 0.0
    paper_ref: str = ""
    error: str | None = None
    notes: dict = field(default_factory=dict)

    @property
    def asserted(self) -> list:
        return [c for c in self.components if c.asserted]

    @property
    def diagnostics(self) -> list:
        return [c for c in self.components if not c.asserted]

    @property
    def status(self) -> str:
        if self.error is not None:
            return "error"
        return "zero" if all(c.zero for c in self.asserted) else "nonzero"

    @property
    def ok(self) -> bool:
        return self.status == "zero"

    def failing(self) -> list:
        return [c.indices for c in self.asserted if not c.zero]

    def to_json(self) -> dict:
        out = {
            "query": self.query,
            "status": self.status,
            "components": [c.to_json() for c in self.asserted],
            "timing_ms": round(self.timing_ms, 3),
            "paper_ref": self.paper_ref,
        }
        if self.diagnostics:
            out["diagnostics"] = [c.to_json() for c in self.diagnostics]
        if self.notes:
            out["notes"] = self.notes
        if self.error is not None:
            out["error"] = self.error
        return out

    def summary(self) -> str:
        bad = self.failing()
        tail = f" (nonzero at {bad})" if bad else ""
        return f"{self.query}: {self.status}{tail} [{self.timing_ms:.0f} ms]"


class _Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.ms = (time.perf_counter() - self.t0) * 1000.0


# -- commutation with a Hamiltonian --------------------------------------------

def _case_applies(entry: C.IntegralEntry, case: str) -> bool:
    return case in entry.cases or "symbolic" in entry.cases


def _tensor_components(h: OpExpr, build, stem: str, diagnostics: bool) -> list[Component]:
    """Off-diagonal commutators plus trace-adjusted diagonals of a two-index family."""
    comps = [Component([i, j], commutator(h, build(i, j))) for i, j in OFF_DIAGONAL]
    diag = [commutator(h, build(i, i)) for i in (1, 2, 3)]
    third = diag[0] + diag[1] + diag[2]
    third = third.scale(const("1/3"))
    for i, d in enumerate(diag, start=1):
        comps.append(Component([i, i], d - third, label=f"{stem}^{i}{i} - tr/3"))
    if diagnostics:
        for i, d in enumerate(diag, start=1):
            comps.append(Component([i, i], d, asserted=False, label="raw diagonal"))
    return comps


def check_commutation(case, integral_id: str, *, diagnostics: bool = True) -> ResidualReport:
    """``[H(case), X]`` for every asserted component of a catalog integral.

    Raises ``ValueError`` when the integral is not attached to the case.
    Integrals attached to the symbolic row apply to every row.
    """
    row = C.get_case(case)
    entry = C.get_integral(integral_id)
    if not _case_applies(entry, row.id):
        raise ValueError(f"integral {entry.id} is not attached to case {row.id} "
                         f"(attached: {', '.join(entry.cases)})")
    ref = f"{row.source}; {entry.source}"
    with _Timer() as t:
        h = C.hamiltonian_node(row.id).quantum()
        if entry.arity == 0:
            comps = [Component([], commutator(h, entry.build().quantum()))]
        elif entry.arity == 1:
            vec = entry.build()
            comps = [Component([k], commutator(h, vec[k - 1].quantum())) for k in (1, 2, 3)]
        else:
            comps = _tensor_components(h, lambda i, j: entry.build(i, j).quantum(),
                                       entry.id, diagnostics)
    notes = {"reading": entry.reading}
    if entry.corrects:
        notes["corrects"] = entry.corrects
    return ResidualReport(f"commute(H(case={row.id}), {entry.id})", comps, t.ms, ref,
                          notes=notes)


def commute(lhs: str, rhs: str) -> ResidualReport:
    """Commutator of two parsed expressions (scalars or vectors)."""
    from .parser import parse

    with _Timer() as t:
        a, b = parse(lhs), parse(rhs)
        av = a if isinstance(a, B.Vec) else None
        bv = b if isinstance(b, B.Vec) else None
        if av is not None and bv is not None:
            comps = [Component([i, j], commutator(av[i - 1].quantum(), bv[j - 1].quantum()))
                     for i, j in ALL_PAIRS]
        elif av is not None:
            comps = [Component([k], commutator(av[k - 1].quantum(), b.quantum())) for k in (1, 2, 3)]
        elif bv is not None:
            comps = [Component([k], commutator(a.quantum(), bv[k - 1].quantum())) for k in (1, 2, 3)]
        else:
            comps = [Component([], commutator(a.quantum(), b.quantum()))]
    return ResidualReport(f"commute({lhs}, {rhs})", comps, t.ms, "expression commutator")


# -- determining systems -------------------------------------------------------

INDEPENDENT = {"T": tuple(range(1, 20)), "Y": tuple(range(1, 20))}
"""Generators kept in the ansatz; the rest are removed through the relations."""

_F_NAME = re.compile(r"f\d+$")


class AnsatzSpec:
    """``X^{ij} = sum_k sym(f_k, T_k^{ij})`` over the independent generators.

    ``coefficients`` maps generator number to a FieldElem; by default each
    generator gets its own symbolic radial function ``f_k``.
    """

    def __init__(self, family: str, i: int, j: int, coefficients: dict | None = None):
        self.family = B.family_key(family)
        self.i, self.j = i, j
        ks = INDEPENDENT[self.family]
        if coefficients is None:
            coefficients = {k: jet(f"f{k}") for k in ks}
        unknown = set(coefficients) - set(ks)
        if unknown:
            raise ValueError(f"not independent generators: {sorted(unknown)}")
        self.coefficients = dict(coefficients)

    def operator(self) -> OpExpr:
        total = OpExpr()
        for k, f in sorted(self.coefficients.items()):
            if not f:
                continue
            coeff = OpExpr.scalar(SpatialPoly.scalar(f))
            for factors in B.generator_factors(self.family, k, self.i, self.j):
                total = total + B.symmetrize([coeff] + [n.quantum() for n in factors])
        return total


@dataclass(frozen=True)
class GeneratedEq:
    """One coefficient of ``[H, X]``: must vanish identically."""

    order: int
    pauli: int
    pexp: tuple
    xmono: tuple
    expr: FieldElem


def _collect(residual: OpExpr) -> list[GeneratedEq]:
    out = []
    for (pauli, n), poly in residual.items():
        for mono, f in sorted(poly.terms.items()):
            out.append(GeneratedEq(sum(n), pauli, n, mono, f))
    out.sort(key=lambda e: (-e.order, e.pauli, e.pexp, e.xmono))
    return out


def extract(ansatz: AnsatzSpec, hamiltonian: OpExpr | None = None) -> list[GeneratedEq]:
    """Determining equations from ``[H, sym(X)] = 0``, highest momentum order first.

    ``hamiltonian`` defaults to the fully symbolic one.
    """
    h = hamiltonian if hamiltonian is not None else C.hamiltonian_node("symbolic").quantum()
    return _collect(commutator(h, ansatz.operator()))


def _branch_coefficients(branch: C.SolutionBranch) -> dict:
    bind = branch.bindings()
    fam = B.family_key(branch.family)
    return {k: bind[f"f{k}"] for k in INDEPENDENT[fam] if f"f{k}" in bind}


def _branch_hamiltonian(branch: C.SolutionBranch) -> OpExpr:
    bind = branch.bindings()
    pots = branch.potentials()
    v0 = specialize(pots["V0"], bind)
    v1 = specialize(pots["V1"], bind)
    return B.hamiltonian(v0, v1).quantum()


def check_solution(family: str, branch: str, *, corrected: bool = False) -> ResidualReport:
    """Substitute a solution branch into the hardcoded determining system.

    ``corrected`` swaps in the catalog's corrected equations where present.
    Raises ``ValueError("incomplete assignment ...")`` if some ``f_k`` used
    by the system is left unassigned.
    """
    sol = C.get_solution(branch)
    eqs = C.get_determining(family)
    fam = eqs[0].family if eqs else C._family(family)
    if sol.family != fam:
        raise ValueError(f"branch {branch} belongs to the {sol.family} system, not {fam}")
    with _Timer() as t:
        needed = set()
        exprs = []
        for eq in eqs:
            e = eq.expression(corrected)
            exprs.append(e)
            needed |= {n for n in e.free_names() if _F_NAME.match(n)}
        missing = sorted(needed - set(sol.assign), key=lambda n: int(n[1:]))
        if missing:
            raise ValueError(f"incomplete assignment: {', '.join(missing)} not set by {branch}")
        bind = sol.bindings()
        comps = [Component([eq.id], specialize(e, bind), label=eq.block)
                 for eq, e in zip(eqs, exprs)]
    reading = "corrected" if corrected else "printed"
    notes = {"rejected": sol.rejected, "system": reading}
    if corrected:
        notes["corrected_equations"] = [eq.id for eq in eqs if eq.corrected_text]
    return ResidualReport(f"check_solution({fam}, {branch}, {reading})", comps, t.ms,
                          sol.source, notes=notes)


def check_extracted(branch: str, *, diagnostics: bool = False) -> ResidualReport:
    """The branch against the system generated by :func:`extract`.

    Substituting into the generated equations equals commuting the
    substituted ansatz with the substituted Hamiltonian (substitution
    commutes with normal ordering), which is what is computed here.
    """
    sol = C.get_solution(branch)
    fam = B.family_key(sol.family)
    coeffs = _branch_coefficients(sol)
    with _Timer() as t:
        h = _branch_hamiltonian(sol)
        comps = _tensor_components(h, lambda i, j: AnsatzSpec(fam, i, j, coeffs).operator(),
                                   f"X_{fam}", diagnostics)
    return ResidualReport(f"check_extracted({sol.family}, {branch})", comps, t.ms, sol.source,
                          notes={"rejected": sol.rejected, "convention": "full permutation average"})


# -- relations -----------------------------------------------------------------

def _sym(text: str) -> SymbolExpr:
    from .parser import parse

    return parse(text).symbol()


def _delta_symbol(text: str | None) -> SymbolExpr:
    return _sym(C.expand(text)) if text not in (None, "0") else SymbolExpr()


def _relation_components(rel: C.Relation, corrected: bool, quantum: bool) -> list[Component]:
    from .parser import parse

    use_fix = corrected and rel.corrected_rhs is not None
    rhs_field = "corrected_rhs" if use_fix else "rhs"
    delta_text = rel.corrected_delta if use_fix else rel.delta
    diff = {(i, j): _sym(rel.side("lhs", i, j)) - _sym(rel.side(rhs_field, i, j))
            for i, j in ALL_PAIRS}
    comps = []
    if corrected:
        delta = _delta_symbol(delta_text)
        for i, j in ALL_PAIRS:
            d = diff[(i, j)] - delta if i == j else diff[(i, j)]
            comps.append(Component([rel.id, i, j], d))
    else:
        # printed reading: compare modulo an isotropic delta_ij part
        iso = (diff[(1, 1)] + diff[(2, 2)] + diff[(3, 3)]).scale(const("1/3"))
        for i, j in OFF_DIAGONAL:
            comps.append(Component([rel.id, i, j], diff[(i, j)]))
        for i in (1, 2, 3):
            comps.append(Component([rel.id, i, i], diff[(i, i)] - iso, label="traceless part"))
        if delta_text is not None:
            comps.append(Component([rel.id, "delta"], iso - _delta_symbol(delta_text),
                                   label="isotropic part minus recorded delta"))
        else:
            comps.append(Component([rel.id, "delta"], iso, asserted=False, label="isotropic part"))
    if quantum:
        q = (parse(rel.side("lhs", 1, 2)).quantum() - parse(rel.side(rhs_field, 1, 2)).quantum())
        comps.append(Component([rel.id, 1, 2], q, asserted=False, label="quantum ordering residual"))
    return comps


def check_relations(family: str, *, corrected: bool = False, quantum: bool = False,
                    only: list[str] | None = None) -> ResidualReport:
    """Relations among the generators of a family, in the symbol algebra.

    The printed reading checks ``lhs - rhs`` modulo ``delta_ij * scalar`` and
    compares that scalar with the recorded one; the corrected reading uses
    the exact replacements and checks every component including the delta
    term.  Relations with no valid form are skipped in the corrected reading.
    ``quantum`` adds the normal-ordered residual of the (1,2) component as a
    diagnostic.
    """
    rels = C.get_relations(family)
    if only is not None:
        known = {r.id for r in rels}
        bad = sorted(set(only) - known)
        if bad:
            raise KeyError(f"unknown relation(s) {bad}")
        rels = tuple(r for r in rels if r.id in only)
    skipped = []
    comps = []
    with _Timer() as t:
        for rel in rels:
            if corrected and not rel.valid:
                skipped.append(rel.id)
                continue
            comps.extend(_relation_components(rel, corrected, quantum))
    reading = "corrected" if corrected else "printed"
    notes = {"reading": reading, "relations": [r.id for r in rels if r.id not in skipped]}
    if skipped:
        notes["skipped"] = skipped
    fam = rels[0].family if rels else family
    return ResidualReport(f"check_relations({fam}, {reading})", comps, t.ms,
                          f"linear relations and syzygies among the {fam} generators", notes=notes)


# -- named identities ----------------------------------------------------------

def t1_delta_constant() -> OpExpr:
    """The constant ``c`` with ``{J_i, J_j} - T1^{ij} = delta_ij c``.

    Raises ``ValueError`` if the difference is not of that form.
    """
    entry = C.get_integral("T1")
    gaps = {}
    for i, j in ALL_PAIRS:
        gaps[(i, j)] = (anticommutator(B.J[i - 1].quantum(), B.J[j - 1].quantum())
                        - entry.build(i, j).quantum())
    if any(gaps[p] for p in OFF_DIAGONAL):
        raise ValueError("off-diagonal gap between {J_i, J_j} and T1 is nonzero")
    c = gaps[(1, 1)]
    if gaps[(2, 2)] != c or gaps[(3, 3)] != c:
        raise ValueError("diagonal gap is not isotropic")
    if c.order() > 0 or any(pa for pa, _ in c.terms):
        raise ValueError("diagonal gap is not a scalar constant")
    return c


def trace(integral_id: str) -> OpExpr:
    """``sum_i X^{ii}`` for a two-index catalog integral."""
    entry = C.get_integral(integral_id)
    if entry.arity != 2:
        raise ValueError(f"{integral_id} is not a two-index integral")
    out = OpExpr()
    for i in (1, 2, 3):
        out = out + entry.build(i, i).quantum()
    return out


def y6_decomposition(y6: str = "Y6", xv7: str = "XV7", xp1: str = "XP1",
                     scale="1") -> ResidualReport:
    """``Y6^{ij} - (scale*{XV7_i, J_j} + delta_ij hbar^2/2 XP1)`` per component."""
    y = C.get_integral(y6)
    v = C.integral_value(xv7)
    p = C.integral_value(xp1).quantum()
    s = const(scale)
    iso = p.scale(const("1/2") * symbol("hbar") ** 2)
    with _Timer() as t:
        comps = []
        for i, j in ALL_PAIRS:
            rhs = anticommutator(v[i - 1].quantum(), B.J[j - 1].quantum()).scale(s)
            if i == j:
                rhs = rhs + iso
            comps.append(Component([i, j], y.build(i, j).quantum() - rhs))
    return ResidualReport(f"decompose({y6} = {scale}*{{{xv7}, J}} + delta*hbar^2/2*{xp1})",
                          comps, t.ms, y.source)


def a11_identity(y12: str = "Y12", y9: str = "Y9", y10: str = "Y10", *,
                 classical: bool = False, correction: str | None = None) -> ResidualReport:
    """``Y12 - Y9 - Y10 - alpha/r*(2/r^2*SX*x_i x_j - (x_i sigma_j + sigma_i x_j))``.

    ``classical`` sets hbar to zero in the residual while keeping momenta as
    symbols.  ``correction`` is an extra template added to the right-hand side.
    """
    from .parser import parse

    rhs_extra = "alpha/r*(2/r^2*SX*XX - PAIR(x,sigma))"
    if correction:
        rhs_extra += f" + {correction}"
    e12, e9, e10 = (C.get_integral(k) for k in (y12, y9, y10))
    with _Timer() as t:
        comps = []
        for i, j in ALL_PAIRS:
            extra = parse(C.expand(rhs_extra, i, j)).quantum()
            d = (e12.build(i, j).quantum() - e9.build(i, j).quantum()
                 - e10.build(i, j).quantum() - extra)
            if classical:
                d = specialize(d, {"hbar": 0})
            comps.append(Component([i, j], d))
    level = "classical" if classical else "quantum"
    return ResidualReport(f"identity({y12} = {y9} + {y10} + alpha/r*(...), {level})", comps,
                          t.ms, e12.source, notes={"correction": correction} if correction else {})


def constant_shift_invariant(case, integral_id: str, shift: str = "k1") -> bool:
    """``[H + c, X] == [H, X]`` componentwise for a constant ``c``."""
    entry = C.get_integral(integral_id)
    h = C.hamiltonian_node(case).quantum()
    hc = h + OpExpr.scalar(C.parse_field(shift))
    for idx in entry.components():
        if entry.arity == 1:
            x = entry.build()[idx[0] - 1].quantum()
        else:
            x = entry.build(*idx).quantum()
        if commutator(hc, x) != commutator(h, x):
            return False
    return True
