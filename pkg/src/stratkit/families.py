"""Curated and random tower families on A^1 x A^1 used by experiments and tests.

Every member of ``curated_family`` is an absolute tower on (x | s) together
with caps (L, D) for which the Gauss-Manin rank stabilizes: pullbacks, gauges
of pullbacks by H(x, s) with deg_x H <= D, external products, and one member
whose pulled-back subobject is strictly smaller than E at the chosen caps.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import List, Sequence

from .arith import Poly, parse_poly
from .generators import random_constant_invertible, random_unimodular
from .linalg import PolyMatrix, identity, mat_mul, mat_with_vars
from .tower import Tower


@dataclass(frozen=True)
class FamilyMember:
    name: str
    tower: Tower
    level: int
    degree_cap: int


def _m(p, variables, rows) -> PolyMatrix:
    return tuple(tuple(parse_poly(e, variables, p) for e in row) for row in rows)


def base_tower(p: int, *sigmas) -> Tower:
    """A tower on the s-line from matrices of polynomial strings."""
    V = ("s",)
    mats = tuple(_m(p, V, S) for S in sigmas)
    return Tower(p, V, (), "absolute", len(mats[0]), mats)


def relative_family_tower(p: int, *sigmas, mode: str = "absolute") -> Tower:
    V = ("x", "s")
    mats = tuple(_m(p, V, S) for S in sigmas)
    return Tower(p, ("x",), ("s",), mode, len(mats[0]), mats)


def gauge_first(t: Tower, H: PolyMatrix) -> Tower:
    """Replace S_0 by H S_0: an isomorphic tower with frame H G."""
    return Tower(t.p, t.fiber_vars, t.base_vars, t.mode, t.rank, (mat_mul(H, t.sigmas[0]),) + t.sigmas[1:])


def _pullback(M: Tower) -> Tower:
    from .gaussmanin import pullback
    return pullback(M, ("x",))


def _external(a_rows: Sequence, M: Tower) -> Tower:
    """a(x) boxtimes M(s) with a given on the x-line."""
    from .linalg import kron
    p = M.p
    V = ("x", "s")
    a = [_m(p, V, S) for S in a_rows]
    sig = tuple(kron(A, mat_with_vars(S, V)) for A, S in zip(a, M.sigmas))
    return Tower(p, ("x",), ("s",), "absolute", len(a[0]) * M.rank, sig)


def curated_family() -> List[FamilyMember]:
    out = []
    V = ("x", "s")
    # p = 2, L = 2, D = 1 (p^{L-1} > D)
    M1 = base_tower(2, [["1", "s"], ["0", "1"]], [["1", "s"], ["0", "1"]])
    M2 = base_tower(2, [["1", "0"], ["s^2 + s", "1"]], [["0", "1"], ["1", "0"]])
    out.append(FamilyMember("unit-rank1-p2", Tower.unit(2, ("x",), ("s",), length=2), 2, 1))
    out.append(FamilyMember("unit-rank2-p2", Tower.unit(2, ("x",), ("s",), length=2, rank=2), 2, 1))
    out.append(FamilyMember("pullback-M1", _pullback(M1), 2, 1))
    out.append(FamilyMember("pullback-M2", _pullback(M2), 2, 1))
    out.append(FamilyMember("gauged-M1", gauge_first(_pullback(M1), _m(2, V, [["1", "x*s"], ["0", "1"]])), 2, 1))
    out.append(FamilyMember("gauged-M2", gauge_first(_pullback(M2), _m(2, V, [["1", "0"], ["x", "1"]])), 2, 1))
    out.append(FamilyMember("external-a-M1", _external([[["1", "x"], ["0", "1"]], [["1", "0"], ["0", "1"]]], M1), 2, 1))
    out.append(FamilyMember("sx-unipotent", relative_family_tower(2, [["1", "x*s"], ["0", "1"]], [["1", "0"], ["0", "1"]]), 2, 1))
    out.append(FamilyMember("truncated-ES", relative_family_tower(
        2, [["1", "x*s + x"], ["0", "1"]], [["1", "x"], ["0", "1"]], [["1", "0"], ["0", "1"]]), 3, 1))
    # p = 3, L = 2, D = 2
    M3 = base_tower(3, [["1", "s"], ["0", "1"]], [["1", "2*s^2"], ["0", "1"]])
    out.append(FamilyMember("unit-rank1-p3", Tower.unit(3, ("x",), ("s",), length=2), 2, 2))
    out.append(FamilyMember("pullback-M3", _pullback(M3), 2, 2))
    out.append(FamilyMember("gauged-M3", gauge_first(_pullback(M3), _m(3, V, [["1", "x^2 + s"], ["0", "1"]])), 2, 2))
    out.append(FamilyMember("external-a-unit-p3", _external(
        [[["1", "2*x"], ["0", "1"]], [["1", "0"], ["0", "1"]]], Tower.unit(3, ("s",), length=2)), 2, 2))
    return out


# random families ------------------------------------------------------------

def random_tower(rng: random.Random, p: int, variables, rank: int, length: int, max_deg: int,
                 fiber_vars=None) -> Tower:
    variables = tuple(variables)
    fiber_vars = variables if fiber_vars is None else tuple(fiber_vars)
    base_vars = tuple(v for v in variables if v not in fiber_vars)
    sig = tuple(random_unimodular(rng, p, fiber_vars + base_vars, rank, max_deg) for _ in range(length))
    return Tower(p, fiber_vars, base_vars, "absolute", rank, sig)


def random_kunneth_factor(rng: random.Random, p: int, var: str, rank: int) -> Tower:
    """Length-3 (p = 2) or length-2 (p = 3) tower with small frame degree."""
    V = (var,)
    if p == 2:
        sig = (random_unimodular(rng, p, V, rank, 2), random_unimodular(rng, p, V, rank, 1),
               random_constant_invertible(rng, p, V, rank))
    else:
        sig = (random_unimodular(rng, p, V, rank, 2), random_constant_invertible(rng, p, V, rank))
    return Tower(p, V, (), "absolute", rank, sig)


def frame_degree(t: Tower) -> int:
    from .linalg import max_degree
    return max(max_degree(t.frame), 0)


def random_gauged_pullback(rng: random.Random, p: int, rank: int, length: int, gauge_deg: int) -> Tower:
    """f^*M for a random base tower M, gauged by a random H(x, s) of degree <= gauge_deg."""
    M = random_tower(rng, p, ("s",), rank, length, 2)
    t = _pullback(M)
    H = random_unimodular(rng, p, ("x", "s"), rank, gauge_deg)
    return gauge_first(t, H)
