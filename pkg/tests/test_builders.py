import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinorbit import builders as B
from spinorbit.field import HBAR, I, R, SpatialPoly, d_dr, jet, r_power
from spinorbit.operators import OpExpr, adjoint, commutator, specialize
from spinorbit.parser import parse_expression as pe


def test_primitive_angular_momentum():
    assert B.primitive("L")[2].quantum() == pe("x1*p2 - x2*p1")


def test_primitive_s_vector():
    expected = [(-HBAR / 2) * B.SIGMA[k] + (HBAR * r_power(-2)) * B.X[k] * B.SX for k in range(3)]
    for got, want in zip(B.primitive("S"), expected):
        assert got.quantum() == want.quantum()
    assert B.primitive("S")[0].quantum() == pe("(-hbar/2 + hbar/r^2*x1^2)*sigma1 "
                                               "+ hbar/r^2*x1*x2*sigma2 + hbar/r^2*x1*x3*sigma3")


def test_primitive_pi_vector():
    assert B.primitive("Pi")[0].quantum() == pe("p1 - hbar/r^2*(x2*sigma3 - x3*sigma2)")


@pytest.mark.parametrize("name", ["x2", "p3", "sigma1", "f12", "V0"])
def test_primitive_scalars(name):
    assert B.primitive(name).quantum()


@pytest.mark.parametrize("name", ["Q", "x4", "g1", ""])
def test_primitive_unknown(name):
    with pytest.raises(KeyError):
        B.primitive(name)


def test_symmetrize_examples():
    x1, p1 = OpExpr.x(1), OpExpr.p(1)
    assert B.symmetrize([x1, p1]) == pe("x1*p1 - i*hbar/2")
    f = jet("f4")
    got = B.symmetrize([p1, OpExpr.scalar(f)])
    shift = SpatialPoly.coord(1).scale(-(I * HBAR) / 2 * d_dr(f) / R)
    assert got == OpExpr.scalar(f) * p1 + OpExpr.term(0, (0, 0, 0), shift)
    assert B.symmetrize([x1]) == x1
    with pytest.raises(ValueError):
        B.symmetrize([])


_FACTOR_POOL = ["x1", "x2", "p1", "p3", "sigma2", "sigma3", "herm(dot(x,p))", "dot(sigma,L)",
                "hbar/r^2", "L(3)"]


@settings(max_examples=40)
@given(st.lists(st.sampled_from(_FACTOR_POOL), min_size=1, max_size=3), st.randoms())
def test_symmetrize_is_permutation_invariant(names, rnd):
    factors = [pe(n) for n in names] + [pe("dot(x,p)")]
    shuffled = list(factors)
    rnd.shuffle(shuffled)
    assert B.symmetrize(factors) == B.symmetrize(shuffled)


@settings(max_examples=40)
@given(st.lists(st.sampled_from(_FACTOR_POOL), min_size=1, max_size=3))
def test_symmetrize_preserves_self_adjointness(names):
    factors = [pe(n) for n in names]
    assert all(adjoint(f) == f for f in factors)
    s = B.symmetrize(factors)
    assert adjoint(s) == s


def test_tensor_component_examples():
    assert B.tensor_component("T", 1, 1, 2) == pe("x1*x2")
    assert B.tensor_component("Y", 1, 1, 2) == pe("x1*sigma2 + sigma1*x2")
    t = lambda k: B.tensor_component("T", k, 1, 2, mode="symbol")
    assert (t(20) + t(7) - t(8)).is_zero()


@pytest.mark.parametrize("family, k", [("T", 0), ("T", 29), ("Y", 27), ("Y", -1)])
def test_tensor_component_out_of_range(family, k):
    with pytest.raises(ValueError, match="out of range"):
        B.tensor_component(family, k, 1, 2)


def test_tensor_component_rejects_unknown_mode():
    with pytest.raises(ValueError):
        B.tensor_component("T", 1, 1, 2, mode="classical")


GENERATORS = [(f, k) for f, n in B.FAMILY_SIZE.items() for k in range(1, n + 1)]


@pytest.mark.parametrize("family, k", GENERATORS, ids=[f"{f}{k}" for f, k in GENERATORS])
def test_symbol_mode_is_classical_limit(family, k):
    # the commutative image is built from the constructor tree, so it is an
    # independent evaluation of the printed formula; it must match hbar -> 0
    for i, j in itertools.product((1, 2, 3), repeat=2):
        sym = B.tensor_component(family, k, i, j, mode="symbol")
        lim = specialize(B.tensor_component(family, k, i, j), {"hbar": 0})
        assert sym.terms == lim.terms


@pytest.mark.parametrize("i, j", list(itertools.product((1, 2, 3), repeat=2)))
def test_total_angular_momentum_algebra(i, j):
    ji, jj = B.J[i - 1].quantum(), B.J[j - 1].quantum()
    expected = OpExpr()
    for k in (1, 2, 3):
        e = (i - j) * (j - k) * (k - i) // 2
        if e:
            expected = expected + B.J[k - 1].quantum().scale(I * HBAR * e)
    assert commutator(ji, jj) == expected


def test_vector_arithmetic():
    u = B.X + B.P
    assert (u - B.P)[0].quantum() == B.X[0].quantum()
    assert B.dot(B.X, B.X).quantum() == OpExpr.scalar(R**2)
    assert B.cross(B.X, B.X)[0].quantum() == OpExpr()


def test_node_quantum_is_cached_and_deterministic():
    n = B.tensor_node("Y", 7, 1, 3)
    assert n.quantum() is n.quantum()
    rebuilt = B.Prod(list(n.factors)) if isinstance(n, B.Prod) else n
    assert rebuilt.quantum() == n.quantum()


def test_position_and_radial_factors_commute():
    rng = random.Random(5)
    for _ in range(20):
        names = [rng.choice(["x1", "x2", "x3", "hbar/r"]) for _ in range(3)]
        n = pe("*".join(names))
        assert n == pe("*".join(reversed(names)))
