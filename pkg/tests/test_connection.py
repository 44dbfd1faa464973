import pytest
from hypothesis import given, settings, strategies as st

from stratkit.arith import Poly, parse_poly
from stratkit.connection import (
    Connection, cartier_descent, connection_of_frame, frames_equivalent, gauge_transform,
    has_zero_p_curvature, horizontal_sections, is_flat, p_curvature,
)
from stratkit.errors import DegreeBoundError, DimensionError, FlatnessError
from stratkit.generators import random_unimodular
from stratkit.linalg import identity, inverse_unit, is_zero_matrix, mat_mul, mat_vec, column
from strategies import VARS1, VARS2, rng_from, seeds


def conn1(p, entries, V=VARS1):
    return Connection(p, V, (), len(entries), (tuple(tuple(parse_poly(e, V, p) for e in row) for row in entries),))


def test_pcurvature_of_rank_one_example():
    psi = p_curvature(conn1(2, [["x"]]))[0]
    assert psi[0][0] == parse_poly("x^2 + 1", VARS1, 2)


def test_pcurvature_rank_one_general():
    # for nabla = d + a on rank 1, psi = a^p + a^{(p-1)}
    p = 3
    c = conn1(p, [["x^2"]])
    a = parse_poly("x^2", VARS1, p)
    assert p_curvature(c)[0][0][0] == a ** p + a.hasse((2,)).scale(2)


def test_trivial_connection():
    c = Connection.trivial(5, VARS2, (), 3)
    assert is_flat(c) and has_zero_p_curvature(c)
    assert cartier_descent(c).G == identity(5, VARS2, 3)


def test_unipotent_frame_example():
    G = ((parse_poly("1", VARS1, 2), parse_poly("x", VARS1, 2)), (Poly.zero(2, VARS1), Poly.const(2, VARS1, 1)))
    c = connection_of_frame(G, VARS1)
    assert [[str(e) for e in row] for row in c.matrices[0]] == [["0", "1"], ["0", "0"]]
    F = cartier_descent(c)
    assert frames_equivalent(F.G, G, [0]) is not None


def test_non_integrable_rejected():
    V = VARS2
    x = parse_poly("x", V, 3)
    z = Poly.zero(3, V)
    c = Connection(3, V, (), 1, (((z,),), ((x,),)))     # A_x = 0, A_y = x: d_x A_y != d_y A_x
    assert not is_flat(c)
    with pytest.raises(FlatnessError):
        p_curvature(c)
    with pytest.raises(FlatnessError):
        cartier_descent(c)


def test_nonzero_pcurvature_rejected():
    with pytest.raises(FlatnessError):
        cartier_descent(conn1(2, [["x"]]))


def test_degree_cap_reached():
    c = conn1(2, [["0", "1"], ["0", "0"]])
    with pytest.raises(DegreeBoundError) as info:
        cartier_descent(c, max_degree=0)
    assert info.value.exit_code == 2


def test_degree_cap_from_environment(monkeypatch):
    monkeypatch.setenv("STRAT_MAX_DEGREE", "0")
    with pytest.raises(DegreeBoundError):
        cartier_descent(conn1(2, [["0", "1"], ["0", "0"]]))


def test_wrong_matrix_count():
    with pytest.raises(DimensionError):
        Connection(2, VARS2, (), 1, (((Poly.zero(2, VARS2),),),))


@given(seeds, st.sampled_from([2, 3]), st.integers(1, 3))
def test_frame_connection_is_horizontal(seed, p, r):
    G = random_unimodular(rng_from(seed), p, VARS2, r, 2)
    c = connection_of_frame(G, VARS2)
    assert is_flat(c) and has_zero_p_curvature(c)
    for i in range(2):
        for j in range(r):
            assert all(f.is_zero() for f in c.nabla(i, column(G, j)))


@given(seeds, st.sampled_from([2, 3]), st.integers(1, 2))
def test_gauge_transform_matches_new_frame(seed, p, r):
    rng = rng_from(seed)
    G = random_unimodular(rng, p, VARS1, r, 2)
    H = random_unimodular(rng, p, VARS1, r, 2)
    c = connection_of_frame(G, VARS1)
    assert gauge_transform(c, H) == connection_of_frame(mat_mul(inverse_unit(H), G), VARS1)


@settings(max_examples=40)
@given(seeds, st.sampled_from([2, 3]), st.integers(1, 3))
def test_cartier_round_trip_one_variable(seed, p, r):
    H = random_unimodular(rng_from(seed), p, VARS1, r, 3)
    F = cartier_descent(connection_of_frame(H, VARS1))
    assert frames_equivalent(F.G, H, [0]) is not None


@settings(max_examples=25)
@given(seeds, st.sampled_from([2, 3]), st.integers(1, 2))
def test_cartier_round_trip_two_variables(seed, p, r):
    H = random_unimodular(rng_from(seed), p, VARS2, r, 2)
    F = cartier_descent(connection_of_frame(H, VARS2))
    assert frames_equivalent(F.G, H, [0, 1]) is not None


@settings(max_examples=25)
@given(seeds, st.sampled_from([2, 3]), st.integers(1, 2))
def test_cartier_relative(seed, p, r):
    V = ("x", "s")
    H = random_unimodular(rng_from(seed), p, V, r, 2)
    F = cartier_descent(connection_of_frame(H, ("x",), ("s",)))
    assert frames_equivalent(F.G, H, [0]) is not None


def test_horizontal_sections_truncation():
    # trivial rank 1 over F_3: horizontal sections of degree <= 7 are 1, x^3, x^6
    vecs, _, _ = horizontal_sections(Connection.trivial(3, VARS1, (), 1), 7)
    assert sorted(str(v[0]) for v in vecs) == ["1", "x^3", "x^6"]


def test_frames_equivalent_rejects_non_twisted():
    I = identity(2, VARS1, 2)
    twisted = ((Poly.const(2, VARS1, 1), parse_poly("x^2", VARS1, 2)), (Poly.zero(2, VARS1), Poly.const(2, VARS1, 1)))
    plain = ((Poly.const(2, VARS1, 1), parse_poly("x", VARS1, 2)), (Poly.zero(2, VARS1), Poly.const(2, VARS1, 1)))
    assert frames_equivalent(I, twisted, [0]) is not None
    assert frames_equivalent(I, plain, [0]) is None
