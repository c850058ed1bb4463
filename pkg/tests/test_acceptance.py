"""The twelve acceptance criteria, one parametrized check per claim.

Each check runs the claim as printed.  Where the printed form fails, a
second check runs the corrected catalog reading.  Known printed failures
(and corrections that still fail) are strict xfails, so a change in either
direction breaks the suite.  The terminal summary prints one line per
criterion; the blocking analysis for every xfail is in the decisions ledger.
"""

import itertools
import random
from dataclasses import dataclass
from typing import Callable

import pytest

from conftest import covariance_defects, record
from spinorbit import builders as B
from spinorbit import catalog as C
from spinorbit import determining as D
from spinorbit.cli import attached_pairs
from spinorbit.field import HBAR
from spinorbit.operators import adjoint, commutator, multiply, specialize
from spinorbit.oracle import campaign, catalog_campaign, random_operator
from spinorbit.parser import parse_expression as pe

TITLES = {
    1: "universal integrals T1 and J",
    2: "gauge-row first-order integrals S and Pi",
    3: "gauge-row tensor integrals T2-T6",
    4: "gauge-row pseudo-tensors Y8-Y12 and the Y12 identity",
    5: "pseudo-tensor integrals Y1-Y7",
    6: "trace and diagonal claims for Y1 and Y6",
    7: "Y6 decomposition through XV7 and J",
    8: "vector, axial and scalar integral matrix",
    9: "linear relations and syzygies in symbol mode",
    10: "determining-system branches",
    11: "classical limit of T3",
    12: "property suites and oracle campaign",
}

LEDGER = "see /root/notes/decisions.md"


@dataclass
class Check:
    criterion: int
    label: str
    printed: Callable[[], bool]
    corrected: Callable[[], bool] | None = None
    printed_fails: bool = False
    unattainable: bool = False

    @property
    def key(self) -> str:
        return f"c{self.criterion:02d}-{self.label}".replace(" ", "_")


def commutes(case, ident) -> bool:
    return D.check_commutation(case, ident, diagnostics=False).ok


def fixes_of(ident):
    return [k for k in C.list_integrals() if C.get_integral(k).corrects == ident]


def corrected_commutes(case, ident) -> Callable[[], bool]:
    def run():
        fixes = fixes_of(ident)
        if not fixes:
            return False
        for fix in fixes:
            cases = C.get_integral(fix).cases
            for c in ([case] if case in cases else cases):
                if not commutes(c, fix):
                    return False
        return True
    return run


# printed (case, integral) pairs whose commutator is nonzero
PRINTED_NONZERO = {
    ("1", "T2"), ("1a", "T2"), ("1b", "T2"), ("1c", "T2"), ("1b", "T3"),
    ("1", "T4"), ("1a", "T4"), ("1b", "T4"), ("1c", "T4"), ("1b", "T5"),
    ("1", "T6"), ("1a", "T6"), ("1b", "T6"), ("1c", "T6"),
    ("6", "Y1"), ("6", "Y2"), ("5", "Y3"), ("5", "Y4"), ("4", "Y5"), ("2", "Y6"), ("3", "Y7"),
    ("1a", "Y8"), ("1a", "Y9"), ("1a", "Y10"), ("1a", "Y11"), ("1c", "Y12"),
    ("2a", "XV1"), ("2a", "XV2"), ("7", "XV5"), ("7", "XV6"), ("8", "XV7"),
    ("6a", "XA2"), ("10", "XA3"), ("11", "XA4"),
}
NO_VALID_CORRECTION = {("10", "XA3"), ("11", "XA4")}


def pair_checks(criterion, idents):
    out = []
    for case, ident in attached_pairs(printed_only=True):
        if ident not in idents:
            continue
        fails = (case, ident) in PRINTED_NONZERO
        out.append(Check(criterion, f"{ident} on case {case}",
                         lambda c=case, i=ident: commutes(c, i),
                         corrected_commutes(case, ident) if fails else None,
                         printed_fails=fails, unattainable=(case, ident) in NO_VALID_CORRECTION))
    return out


# -- criterion 6 and 7 helpers -----------------------------------------------------

def sp():
    return pe("dot(sigma, p)")


def y1_trace(ident, scale) -> bool:
    return D.trace(ident) == sp().scale(scale)


def y1_diagonal_shift(ident, scale) -> bool:
    h6 = C.hamiltonian_node("6").quantum()
    d = C.get_integral(ident).build(1, 1).quantum() - sp().scale(scale)
    return not commutator(h6, d)


def y1_diagonal_alone_fails() -> bool:
    h6 = C.hamiltonian_node("6").quantum()
    return bool(commutator(h6, C.get_integral("Y1").build(1, 1).quantum()))


A11_ORDERING = ("2*i*hbar/r^2*Y(7,{i},{j}) - 5*hbar^2/(2*r^2)*Y(1,{i},{j})"
                " - 6*hbar^2/r^4*Y(4,{i},{j})")


# -- criterion 9 -----------------------------------------------------------------------

PRINTED_RELATION_FAILURES = {"T22", "T25", "T26", "Y20", "Y21", "Y22", "Y23", "Y24", "Y26"}


def relation_checks():
    out = []
    for family in ("tensor", "pseudo"):
        for rel in C.get_relations(family):
            fails = rel.id in PRINTED_RELATION_FAILURES

            def corrected(f=family, r=rel):
                return r.valid and D.check_relations(f, only=[r.id], corrected=True).ok

            out.append(Check(9, f"{rel.id} {rel.kind}",
                             lambda f=family, r=rel.id: D.check_relations(f, only=[r]).ok,
                             corrected if fails else None, printed_fails=fails,
                             unattainable=not rel.valid))
    return out


# -- criterion 10 -----------------------------------------------------------------------

def branch_check(branch, corrected=False) -> bool:
    sol = C.get_solution(branch)
    return D.check_solution(sol.family, branch, corrected=corrected).ok


def branch_checks():
    out = []
    failing = {"pseudo-case1-sub1": True, "pseudo-case1-sub2": True, "pseudo-case2-sub1-I": False}
    for branch in ("tensor-final", "pseudo-case1-sub1", "pseudo-case1-sub2", "pseudo-case2-sub1-I",
                   "pseudo-case2-sub1-II", "pseudo-case2-sub1-III"):
        fails = branch in failing
        out.append(Check(10, branch, lambda b=branch: branch_check(b),
                         (lambda b=branch: branch_check(b, corrected=True)) if fails else None,
                         printed_fails=fails, unattainable=failing.get(branch, False)))
    for branch in ("tensor-rejected", "pseudo-rejected"):
        out.append(Check(10, f"{branch} is nonzero", lambda b=branch: not branch_check(b)))
    return out


# -- criterion 11 -----------------------------------------------------------------------

def fradkin(i, j) -> bool:
    t3 = C.get_integral("T3").build(i, j).quantum()
    return specialize(t3, {"hbar": 0}) == pe(f"2*(p{i}*p{j} + 2*alpha*x{i}*x{j})")


# -- criterion 12 -----------------------------------------------------------------------

def random_triples(seed, n=100):
    rng = random.Random(seed)
    for _ in range(n):
        yield tuple(random_operator(rng, max_factors=3, max_terms=2).quantum() for _ in range(3))


def associativity() -> bool:
    return all(multiply(a, multiply(b, c)) == multiply(multiply(a, b), c)
               for a, b, c in random_triples(11))


def jacobi() -> bool:
    return all(not (commutator(a, commutator(b, c)) + commutator(b, commutator(c, a))
                    + commutator(c, commutator(a, b)))
               for a, b, c in random_triples(12))


def leibniz() -> bool:
    return all(commutator(a, multiply(b, c)) == multiply(commutator(a, b), c) + multiply(b, commutator(a, c))
               for a, b, c in random_triples(13))


def adjoint_laws() -> bool:
    return all(adjoint(adjoint(a)) == a and adjoint(multiply(a, b)) == multiply(adjoint(b), adjoint(a))
               for a, b, _ in random_triples(14))


def property_checks():
    out = [Check(12, "associativity on 100 random triples", associativity),
           Check(12, "Jacobi identity on 100 random triples", jacobi),
           Check(12, "Leibniz rule on 100 random triples", leibniz),
           Check(12, "adjoint laws on 100 random pairs", adjoint_laws)]
    for family, n in B.FAMILY_SIZE.items():
        for k in range(1, n + 1):
            out.append(Check(12, f"covariance of {family}{k}",
                             lambda f=family, m=k: covariance_defects(f, m) == []))
    out.append(Check(12, "oracle campaign 100 random pairs", lambda: campaign(100, seed=0).ok))
    out.append(Check(12, "oracle on every catalog pairing",
                     lambda: catalog_campaign(attached_pairs()).ok))
    return out


# -- the full list -------------------------------------------------------------------------

CHECKS = (
    [Check(1, "T1 with symbolic potentials", lambda: commutes("symbolic", "T1")),
     Check(1, "J with symbolic potentials", lambda: commutes("symbolic", "J")),
     Check(2, "S on case 1", lambda: commutes("1", "S")),
     Check(2, "Pi on case 1a", lambda: commutes("1a", "Pi"))]
    + pair_checks(3, {"T2", "T3", "T4", "T5", "T6"})
    + pair_checks(4, {"Y8", "Y9", "Y10", "Y11", "Y12"})
    + [Check(4, "Y12 identity", lambda: D.a11_identity().ok,
             lambda: D.a11_identity(correction=A11_ORDERING).ok and D.a11_identity(classical=True).ok,
             printed_fails=True)]
    + pair_checks(5, {"Y1", "Y2", "Y3", "Y4", "Y5", "Y6", "Y7"})
    + [Check(6, "trace of Y1 is 3(sigma,p)", lambda: y1_trace("Y1", 3),
             lambda: y1_trace("Y1-sa", 3 * HBAR), printed_fails=True),
       Check(6, "Y1^11 alone does not commute", y1_diagonal_alone_fails),
       Check(6, "Y1^11 minus (sigma,p) commutes", lambda: y1_diagonal_shift("Y1", 1),
             lambda: y1_diagonal_shift("Y1-sa", HBAR), printed_fails=True),
       Check(6, "trace of Y6 vanishes", lambda: not D.trace("Y6"),
             lambda: not D.trace("Y6-fix"), printed_fails=True, unattainable=True),
       Check(7, "Y6 decomposition", lambda: D.y6_decomposition().ok,
             lambda: D.y6_decomposition(y6="Y6-fix", scale="1/2").ok, printed_fails=True)]
    + pair_checks(8, {k for k in C.list_integrals(printed_only=True) if k.startswith("X")})
    + relation_checks()
    + branch_checks()
    + [Check(11, f"T3^{i}{j} at hbar 0", lambda a=i, b=j: fradkin(a, b))
       for i, j in itertools.product((1, 2, 3), repeat=2)]
    + property_checks()
)


def _printed_param(check):
    marks = []
    if check.printed_fails:
        marks.append(pytest.mark.xfail(strict=True, reason=f"fails as printed; {LEDGER}"))
    return pytest.param(check, id=check.key, marks=marks)


def _corrected_param(check):
    marks = []
    if check.unattainable:
        marks.append(pytest.mark.xfail(strict=True, reason=f"no valid correction found; {LEDGER}"))
    return pytest.param(check, id=check.key, marks=marks)


@pytest.mark.parametrize("check", [_printed_param(c) for c in CHECKS])
def test_printed_claim(check):
    ok = check.printed()
    record(check.criterion, TITLES[check.criterion], check.label, ok)
    assert ok


@pytest.mark.parametrize("check", [_corrected_param(c) for c in CHECKS if c.corrected is not None])
def test_corrected_reading(check):
    ok = check.corrected()
    record(check.criterion, TITLES[check.criterion], check.label, ok, reading="corrected")
    assert ok


def test_every_criterion_has_checks():
    assert {c.criterion for c in CHECKS} == set(TITLES)
