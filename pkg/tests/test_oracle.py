import pytest
from hypothesis import given, settings

from conftest import operator_nodes, spinor_funcs
from spinorbit import builders as B
from spinorbit import catalog as C
from spinorbit.field import HBAR, I, R, const, r_power, symbol
from spinorbit.operators import OpExpr
from spinorbit.oracle import (
    DOWN, UP, SpinorFunc, apply, basis_functions, campaign, catalog_campaign, cross_check,
    product_check,
)

up = SpinorFunc.basis(UP)
down = SpinorFunc.basis(DOWN)


def test_pauli_action():
    assert apply(OpExpr.sigma(1), up) == down
    assert apply(OpExpr.sigma(2), up) == down.scale(I)
    assert apply(OpExpr.sigma(2), down) == up.scale(-I)
    assert apply(OpExpr.sigma(3), down) == -down


def test_angular_momentum_on_x1():
    psi = SpinorFunc.basis(UP, a=1)
    assert apply(B.L[2], psi) == SpinorFunc.basis(UP, b=1).scale(I * HBAR)


def test_momentum_on_radial_function():
    psi = SpinorFunc.basis(UP, a=1, radial=r_power(-2))
    expected = (SpinorFunc.basis(UP, radial=r_power(-2))
                - SpinorFunc.basis(UP, a=2, radial=2 * r_power(-4))).scale(-I * HBAR)
    assert apply(OpExpr.p(1), psi) == expected


def test_sphere_relation_in_equality():
    lhs = SpinorFunc.basis(UP, c=2)
    rhs = SpinorFunc.basis(UP, radial=R**2) - SpinorFunc.basis(UP, a=2) - SpinorFunc.basis(UP, b=2)
    assert lhs == rhs
    assert not (lhs == SpinorFunc.basis(UP, radial=R**2))


def test_bad_indices():
    with pytest.raises(ValueError):
        SpinorFunc.basis(2)
    with pytest.raises(ValueError):
        up.pauli(4)


def test_cross_check_canonical_pair():
    for psi in basis_functions():
        v = cross_check(OpExpr.x(1), OpExpr.p(1), psi)
        assert v.agree and not v.engine_zero
        direct = apply(OpExpr.x(1), apply(OpExpr.p(1), psi)) - apply(OpExpr.p(1), apply(OpExpr.x(1), psi))
        assert direct == psi.scale(I * HBAR)


def test_cross_check_on_row_six():
    h = C.hamiltonian_node("6")
    y = C.get_integral("Y1-sa").build(1, 2)
    v = cross_check(h, y, SpinorFunc.basis(UP, a=1, radial=r_power(-1)))
    assert v.agree and v.engine_zero


def test_apply_accepts_trees_sequences_and_scalars():
    seq = [B.X[0], B.P[1], B.SIGMA[2]]
    tree = B.Prod(seq)
    psi = SpinorFunc.basis(DOWN, b=2, radial=r_power(-1))
    assert apply(seq, psi) == apply(tree, psi) == apply(tree.quantum(), psi)
    assert apply(3, psi) == psi.scale(const(3))
    with pytest.raises(TypeError):
        apply(object(), psi)


def test_symmetrized_nodes_average_orderings():
    node = B.Sym([B.X[0], B.P[0]])
    psi = SpinorFunc.basis(UP, a=1, b=1)
    expected = (apply([B.X[0], B.P[0]], psi) + apply([B.P[0], B.X[0]], psi)).scale(const("1/2"))
    assert apply(node, psi) == expected
    assert apply(node.quantum(), psi) == expected


@settings(max_examples=100)
@given(operator_nodes(), operator_nodes(), spinor_funcs())
def test_product_matches_composition(a, b, psi):
    assert product_check(a, b, psi)


@given(operator_nodes(), operator_nodes(), spinor_funcs())
def test_commutator_matches_direct(a, b, psi):
    assert cross_check(a, b, psi)


@given(operator_nodes(), operator_nodes(), spinor_funcs(), spinor_funcs())
def test_apply_is_linear(a, b, psi, phi):
    c = symbol("alpha") + 2
    assert apply(a, psi + phi.scale(c)) == apply(a, psi) + apply(a, phi).scale(c)
    qa, qb = a.quantum(), b.quantum()
    assert apply(qa + qb, psi) == apply(a, psi) + apply(b, psi)


def test_campaign_is_reproducible():
    first, second = campaign(10, seed=3), campaign(10, seed=3)
    assert first.ok and second.ok
    assert first.checked == second.checked == 10


def test_catalog_campaign_small():
    res = catalog_campaign([("1a", "Pi"), ("2", "XP1")])
    assert res.ok and res.checked == 6
