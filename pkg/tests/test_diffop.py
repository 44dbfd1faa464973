import pytest
from hypothesis import given, strategies as st

from stratkit.arith import Poly, lucas_binomial, parse_poly
from stratkit.diffop import DiffOperator, factorial_mod, frobenius_lift
from stratkit.errors import DimensionError, UnknownVariableError
from strategies import VARS1, VARS2, field_and_vars, operators, polys


def D(p, V, n, c=1):
    return DiffOperator.basis(p, V, V, n, c)


def test_basis_action_examples():
    V = VARS1
    assert D(2, V, (2,)).apply(parse_poly("x^5", V, 2)).is_zero()          # C(5,2) = 10
    assert D(2, V, (2,)).apply(parse_poly("x^6", V, 2)) == parse_poly("x^4", V, 2)   # C(6,2) = 15
    assert D(3, V, (3,)).apply(parse_poly("x^3", V, 3)) == Poly.const(3, V, 1)
    assert D(3, V, (1,)).apply(parse_poly("x^3", V, 3)).is_zero()


def test_basis_composition_example():
    V = VARS1
    # D_1 D_1 = 2 D_2, which vanishes in characteristic 2
    assert (D(2, V, (1,)) @ D(2, V, (1,))) == DiffOperator.zero(2, V, V)
    assert (D(3, V, (1,)) @ D(3, V, (1,))) == D(3, V, (2,), 2)


@given(st.data())
def test_composition_is_homomorphism(data):
    p, V = data.draw(field_and_vars())
    a, b = data.draw(operators(p, V)), data.draw(operators(p, V))
    f = data.draw(polys(p, V))
    assert (a @ b).apply(f) == a.apply(b.apply(f))


@given(st.data())
def test_composition_associative(data):
    p, V = data.draw(field_and_vars())
    a, b, c = (data.draw(operators(p, V, 3, 3, 2)) for _ in range(3))
    assert (a @ b) @ c == a @ (b @ c)


@given(st.data())
def test_basis_operators_commute(data):
    p, V = data.draw(field_and_vars())
    m = tuple(data.draw(st.integers(0, 4)) for _ in V)
    n = tuple(data.draw(st.integers(0, 4)) for _ in V)
    mn = tuple(x + y for x, y in zip(m, n))
    assert D(p, V, m) @ D(p, V, n) == D(p, V, n) @ D(p, V, m)
    b = lucas_binomial(mn, n, p)
    expected = D(p, V, mn, b) if b else DiffOperator.zero(p, V, V)
    assert D(p, V, m) @ D(p, V, n) == expected


@pytest.mark.parametrize("p", [2, 3, 5])
def test_commutator_with_monomials(p):
    V = VARS2
    for i in range(2):
        e = tuple(1 if j == i else 0 for j in range(2))
        for a in range(7):
            for b in range(7 - a):
                f = Poly(p, V, {(a, b): 1})
                assert D(p, V, e).commutator_with_mult(f) == DiffOperator.mult(f.hasse(e), V)


def test_order_and_kills_one():
    V = VARS1
    op = D(3, V, (2,), parse_poly("x", V, 3)) + D(3, V, (0,))
    assert op.order() == 2
    assert not op.kills_one()
    assert D(3, V, (2,)).kills_one()
    assert DiffOperator.zero(3, V, V).order() is None
    assert str(op) == "x*D[2] + D[0]"


def test_relative_operator_treats_base_as_constant():
    V = ("x", "s")
    op = DiffOperator.basis(3, V, ("x",), (1,))
    assert op.apply(parse_poly("x*s^2 + s", V, 3)) == parse_poly("s^2", V, 3)


def test_errors():
    with pytest.raises(UnknownVariableError):
        DiffOperator(3, VARS1, ("y",))
    with pytest.raises(DimensionError):
        DiffOperator(3, VARS1, VARS1, {(1, 1): 1})
    with pytest.raises(DimensionError):
        D(3, VARS1, (1,)) + D(3, VARS2, (1, 0))


@given(st.data())
def test_frobenius_lift_property(data):
    p, V = data.draw(field_and_vars(st.sampled_from([2, 3])))
    coeffs = {tuple(1 if j == i else 0 for j in range(len(V))): data.draw(polys(p, V, 2, 2)) for i in range(len(V))}
    derivation = DiffOperator(p, V, V, coeffs)
    lifted = frobenius_lift(derivation)
    a = data.draw(polys(p, V, 3, 3))
    assert lifted.apply(a ** p) == derivation.apply(a) ** p


def test_factorial_mod():
    assert factorial_mod(4, 5) == 24 % 5
    assert factorial_mod(5, 5) == 0
