import pytest
from hypothesis import given, strategies as st

from stratkit import pid
from stratkit.arith import Poly
from stratkit.linalg import det

upolys = lambda p, d=3: st.lists(st.integers(0, p - 1), max_size=d + 1).map(pid.trim)


def as_poly(a, p):
    return pid.to_poly(a, p, ("t",))


def matmul(A, B, p):
    return [[pid.trim(sum_u([pid.mul(A[i][k], B[k][j], p) for k in range(len(B))], p))
             for j in range(len(B[0]))] for i in range(len(A))]


def sum_u(xs, p):
    acc = ()
    for x in xs:
        acc = pid.add(acc, x, p)
    return acc


@given(st.sampled_from([2, 3, 5]), st.data())
def test_divmod(p, data):
    a, b = data.draw(upolys(p, 5)), data.draw(upolys(p))
    if not b:
        return
    q, r = pid.divmod_u(a, b, p)
    assert pid.add(pid.mul(q, b, p), r, p) == a
    assert pid.deg(r) < pid.deg(b)


@given(st.sampled_from([2, 3]), st.integers(1, 4), st.integers(1, 4), st.data())
def test_hermite_normal_form(p, m, n, data):
    rows = [[data.draw(upolys(p)) for _ in range(n)] for _ in range(m)]
    H, piv, U = pid.hermite(rows, p, n, transform=True)
    assert matmul(U, rows, p) == H
    dU = det(tuple(tuple(as_poly(x, p) for x in row) for row in U))
    assert dU.is_constant() and not dU.is_zero()
    for i, c in enumerate(piv):
        assert H[i][c][-1] == 1
        assert all(not H[k][c] for k in range(i + 1, m))
        assert all(pid.deg(H[k][c]) < pid.deg(H[i][c]) for k in range(i))
    assert all(not any(H[k]) for k in range(len(piv), m))


@given(st.sampled_from([2, 3]), st.integers(1, 3), st.integers(1, 4), st.data())
def test_kernel(p, m, n, data):
    K = [[data.draw(upolys(p, 2)) for _ in range(n)] for _ in range(m)]
    basis, piv = pid.kernel(K, p, n)
    for u in basis:
        assert all(not sum_u([pid.mul(K[i][j], u[j], p) for j in range(n)], p) for i in range(m))
    # canonical: recomputing from the basis gives the same HNF
    again, _ = pid.row_basis(basis, p, n) if basis else ([], [])
    assert [list(r) for r in again] == [list(r) for r in basis]


@given(st.sampled_from([2, 3]), st.data())
def test_solve_hnf_round_trip(p, data):
    rows = [[data.draw(upolys(p)) for _ in range(3)] for _ in range(2)]
    basis, piv = pid.row_basis(rows, p, 3)
    coeffs = [data.draw(upolys(p, 2)) for _ in basis]
    w = [sum_u([pid.mul(c, b[j], p) for c, b in zip(coeffs, basis)], p) for j in range(3)]
    assert pid.solve_hnf(basis, piv, w, p) == [pid.trim(c) for c in coeffs]


def test_solve_outside_span():
    basis, piv = pid.row_basis([[(0, 1), ()]], 3, 2)   # t * e_1
    assert pid.solve_hnf(basis, piv, [(1,), ()], 3) is None
    assert pid.solve_hnf(basis, piv, [(), (1,)], 3) is None


def test_poly_conversion():
    f = Poly(5, ("x", "s"), {(0, 2): 3, (0, 0): 1})
    assert pid.from_poly(f, 1) == (1, 0, 3)
    assert pid.to_poly((1, 0, 3), 5, ("x", "s"), 1) == f
    with pytest.raises(ValueError):
        pid.from_poly(Poly(5, ("x", "s"), {(1, 1): 1}), 1)
