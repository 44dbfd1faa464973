"""Relative horizontal sections and the 0-th Gauss-Manin tower over a line.

Setting: X = A^k x A^1 with fiber coordinates x and one base coordinate s,
R = F_p[s].  The fiber-indexed operators D_n are R-linear, so the relatively
horizontal sections of fiber degree <= D form a free R-module, computed by a
kernel over the PID R.  Base operators act on it through the coordinate lift
tau(d/ds) = d/dt (the absolute operator in s), and the resulting
stratification on R^m is descended to a tower on the s-line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import pid
from .arith import Poly, inv_mod, monomials_up_to
from .errors import DimensionError, ModeError, StratError, TruncationClosureError, UnknownVariableError
from .linalg import (
    PolyMatrix, det, from_columns, identity, kron, mat_with_vars, rank_mod, same_row_space,
    vectors_to_rows, coordinate_order,
)
from .tower import Stratification, Tower, descend_tower, truncated_h0


@dataclass(frozen=True)
class RelativeSplit:
    fiber_vars: Tuple[str, ...]
    base_vars: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "fiber_vars", tuple(self.fiber_vars))
        object.__setattr__(self, "base_vars", tuple(self.base_vars))
        if set(self.fiber_vars) & set(self.base_vars):
            raise DimensionError("fiber and base variables overlap")

    @classmethod
    def of(cls, t: Tower) -> "RelativeSplit":
        return cls(t.fiber_vars, t.base_vars)

    def check(self, t: Tower, one_base: bool = True):
        if self.fiber_vars + self.base_vars != t.variables:
            raise DimensionError(
                f"split {self.fiber_vars}|{self.base_vars} does not match tower variables {t.variables}")
        if one_base and len(self.base_vars) != 1:
            raise DimensionError("the base must have exactly one variable")


@dataclass
class RelativeH0Module:
    """Free R-module of relatively horizontal sections, R = F_p[s].

    ``generators`` are vectors of polynomials in all variables.  ``coords``
    lists the (fiber monomial, component) coordinates and ``rows`` the
    Hermite-normal-form coordinates over R, with pivot columns ``pivots``.
    """

    p: int
    split: RelativeSplit
    level: int
    degree_cap: int
    generators: List[Tuple[Poly, ...]]
    coords: List[tuple]
    rows: List[List[pid.UPoly]]
    pivots: List[int]

    @property
    def rank(self) -> int:
        return len(self.generators)

    def coordinates(self, v: Sequence[Poly]) -> Optional[List[pid.UPoly]]:
        """Coordinates of v in the (monomial, component) basis; None if the
        fiber degree of v exceeds the cap."""
        return _flatten(v, self.coords, len(self.split.fiber_vars))

    def solve(self, v: Sequence[Poly]) -> Optional[List[pid.UPoly]]:
        w = self.coordinates(v)
        if w is None:
            return None
        return pid.solve_hnf(self.rows, self.pivots, w, self.p)


def _flatten(v, coords, k):
    pos = {c: i for i, c in enumerate(coords)}
    out: List[dict] = [dict() for _ in coords]
    for l, f in enumerate(v):
        for e, c in f.terms.items():
            key = (e[:k], l)
            if key not in pos:
                return None
            out[pos[key]][e[k]] = c
    return [pid.trim([d.get(i, 0) for i in range(max(d) + 1)]) if d else () for d in out]


def _unflatten(row, coords, p, variables, rank, k):
    terms = [dict() for _ in range(rank)]
    for a, (m, l) in zip(row, coords):
        for d, c in enumerate(a):
            if c:
                terms[l][m + (d,)] = c
    return tuple(Poly(p, variables, t, _clean=True) for t in terms)


def _fiber_index(t: Tower, split: RelativeSplit, i: int, c: int):
    """Full exponent index with c at fiber variable i."""
    full = [0] * len(t.variables)
    full[i] = c
    return tuple(full)


def _raw_action(t: Tower, full, v):
    """G D_full(G^{-1} v), with the level check on |full|."""
    t.check_level(full)
    w = [sum((a * f for a, f in zip(row, v) if a.terms and f.terms), Poly.zero(t.p, t.variables))
         for row in t.frame_inverse]
    w = [f.hasse(full) for f in w]
    return tuple(sum((a * f for a, f in zip(row, w) if a.terms and f.terms), Poly.zero(t.p, t.variables))
                 for row in t.frame)


def relative_h0(t: Tower, split: RelativeSplit, level: int, degree_cap: int) -> RelativeH0Module:
    """R-basis of {v : fiber degree <= D, nabla(D_n) v = 0 for fiber 0 < |n| < p^L}.

    The R-linear system on the coefficients of fiber monomials is solved by a
    Hermite-form kernel over F_p[s]; the kernel of a matrix is saturated, and
    the returned basis is the canonical Hermite basis.
    """
    split.check(t)
    if level > t.length:
        raise DimensionError(f"level {level} exceeds tower length {t.length}")
    p, k, r = t.p, len(split.fiber_vars), t.rank
    monos = monomials_up_to(k, degree_cap)
    coords = coordinate_order(monos, r)
    row_index: Dict[tuple, int] = {}
    columns = []
    for (m, l) in coords:
        base = [Poly.zero(p, t.variables)] * r
        base[l] = Poly(p, t.variables, {m + (0,) * (len(t.variables) - k): 1}, _clean=True)
        col: Dict[int, dict] = {}
        for i in range(k):
            for j in range(level):
                image = _raw_action(t, _fiber_index(t, split, i, p ** j), base)
                for comp, f in enumerate(image):
                    for e, c in f.terms.items():
                        key = (i, j, comp, e[:k])
                        ri = row_index.setdefault(key, len(row_index))
                        col.setdefault(ri, {})[e[k]] = c
        columns.append(col)
    K = [[() for _ in coords] for _ in range(len(row_index))]
    for u, col in enumerate(columns):
        for ri, d in col.items():
            K[ri][u] = pid.trim([d.get(i, 0) for i in range(max(d) + 1)])
    if K:
        rows, pivots = pid.kernel(K, p, len(coords))
    else:
        rows, pivots = pid.row_basis([[(1,) if i == j else () for j in range(len(coords))]
                                      for i in range(len(coords))], p, len(coords))
    gens = [_unflatten(row, coords, p, t.variables, r, k) for row in rows]
    return RelativeH0Module(p, split, level, degree_cap, gens, coords, [list(x) for x in rows], list(pivots))


def _to_base_matrix(cols: List[List[pid.UPoly]], p, base_vars) -> PolyMatrix:
    """Columns of R-coordinates -> PolyMatrix over F_p[s]."""
    return from_columns([tuple(pid.to_poly(a, p, base_vars) for a in col) for col in cols])


def tau_action(t: Tower, split: RelativeSplit, m: RelativeH0Module, n_s: int,
               lift: Optional[Poly] = None) -> PolyMatrix:
    """Matrix over R of the base operator D_{n_s} acting on the generators.

    Uses the coordinate lift tau(d/ds) = d/dt.  With ``lift = h`` the lift is
    d/ds + h d/dx_0 instead, and D_c is realized as (tau(d/ds))^c / c!,
    which is only available for c < p.
    """
    split.check(t)
    if t.mode != "absolute":
        raise ModeError("base operators need an absolute tower")
    p, k = t.p, len(split.fiber_vars)
    cols = []
    for g in m.generators:
        if lift is None:
            full = [0] * len(t.variables)
            full[k] = n_s
            image = _raw_action(t, tuple(full), g)
        else:
            if n_s >= p:
                raise ValueError("a perturbed lift is only evaluated below order p")
            if lift.vars != t.variables:
                raise DimensionError("lift coefficient lives in a different ring")
            ds = tuple(1 if i == k else 0 for i in range(len(t.variables)))
            dx = tuple(1 if i == 0 else 0 for i in range(len(t.variables)))
            image = tuple(g)
            for _ in range(n_s):
                a = _raw_action(t, ds, image)
                b = _raw_action(t, dx, image)
                image = tuple(x + lift * y for x, y in zip(a, b))
            scale = inv_mod(math.factorial(n_s) % p, p)
            image = tuple(f.scale(scale) for f in image)
        coeffs = m.solve(image)
        if coeffs is None:
            raise TruncationClosureError(m.level, m.degree_cap,
                                         f"D_{n_s} of a generator is not in the R-span of the generators")
        cols.append(coeffs)
    return _to_base_matrix(cols, p, split.base_vars)


@dataclass
class GMTower:
    """The 0-th Gauss-Manin pushforward on the base line.

    ``tower`` is None when the relative module is zero within the caps.
    ``embedding`` are the generator columns inside E (the R-basis used).
    """

    tower: Optional[Tower]
    embedding: List[Tuple[Poly, ...]]
    ranks: List[int]
    stabilized: bool
    level: int
    degree_cap: int
    split: RelativeSplit
    stratification: Optional[Stratification] = field(default=None, repr=False)

    @property
    def rank(self) -> int:
        return len(self.embedding)


def gm_pushforward(t: Tower, split: RelativeSplit, level: int, degree_cap: int,
                   max_degree: Optional[int] = None) -> GMTower:
    """Compute relative H^0 at levels 1..L, the base action and its descent.

    ``stabilized`` requires L >= 2 and equal R-ranks at levels L-1 and L
    (closure of the base action is enforced by raising otherwise).
    """
    split.check(t)
    if t.mode != "absolute":
        raise ModeError("Gauss-Manin pushforward needs an absolute tower")
    if level < 1:
        raise ValueError("level must be >= 1")
    mods = [relative_h0(t, split, j, degree_cap) for j in range(1, level + 1)]
    ranks = [m.rank for m in mods]
    m = mods[-1]
    stabilized = level >= 2 and ranks[-1] == ranks[-2]
    if m.rank == 0:
        return GMTower(None, [], ranks, stabilized, level, degree_cap, split)
    base = split.base_vars
    gens = {(0, j): tau_action(t, split, m, t.p ** j) for j in range(level)}
    strat = Stratification(t.p, base, (), "absolute", m.rank, level, gens)
    tower = descend_tower(strat, level, max_degree)
    return GMTower(tower, list(m.generators), ranks, stabilized, level, degree_cap, split, strat)


def pullback(M: Tower, fiber_vars: Sequence[str]) -> Tower:
    """f^*M for the projection A^k x S -> S: the same matrices in more variables."""
    fiber_vars = tuple(fiber_vars)
    if set(fiber_vars) & set(M.variables):
        raise DimensionError("fiber variables clash with the base")
    if M.mode != "absolute" or M.base_vars:
        raise ModeError("pullback expects an absolute tower on the base")
    variables = fiber_vars + M.fiber_vars
    sig = tuple(mat_with_vars(S, variables) for S in M.sigmas)
    return Tower(M.p, fiber_vars, M.fiber_vars, "absolute", M.rank, sig)


def fiber_restrict(t: Tower, split: RelativeSplit, c) -> Tower:
    """Substitute s = c in every S_i.

    Over F_p one has c^p = c, so the twisted values c^{p^{-i}} seen by the
    level-i matrix all equal c and the substitution is uniform.
    """
    split.check(t, one_base=False)
    p = t.p
    values = {name: c for name, c in zip(split.base_vars, c if isinstance(c, (tuple, list)) else [c])}
    for v in values.values():
        assert pow(v, p, p) == v % p, "substituted value must be fixed by Frobenius"
    sig = []
    for S in t.sigmas:
        sig.append(tuple(tuple(e.eval_partial(values).with_vars(split.fiber_vars) for e in row) for row in S))
    return Tower(p, split.fiber_vars, (), "absolute", t.rank, tuple(sig))


def _evaluate_vector(v, split, c):
    values = {split.base_vars[0]: c}
    return tuple(f.eval_partial(values).with_vars(split.fiber_vars) for f in v)


@dataclass
class ScanRow:
    point: int
    dimension: int
    stabilization_level: int   # smallest level whose dimension equals the level-L one


def h0_fiber_scan(t: Tower, split: RelativeSplit, level: int, degree_cap: int) -> List[ScanRow]:
    split.check(t)
    rows = []
    for c in range(t.p):
        fiber = fiber_restrict(t, split, c)
        dims = [truncated_h0(fiber, j, degree_cap).dimension for j in range(1, level + 1)]
        d = level
        while d > 1 and dims[d - 2] == dims[-1]:
            d -= 1
        rows.append(ScanRow(c, dims[-1], d))
    return rows


def scan_tsv(rows: List[ScanRow]) -> str:
    lines = ["point\tdimension"] + [f"{r.point}\t{r.dimension}" for r in rows]
    return "\n".join(lines) + "\n"


def _span_rows(vectors, p, rank, degree_cap, k):
    monos = monomials_up_to(k, degree_cap)
    coords = coordinate_order(monos, rank)
    if not vectors:
        return np.zeros((0, len(coords)), dtype=np.int64)
    return vectors_to_rows(vectors, coords)


@dataclass
class BaseChangePoint:
    point: int
    gm_dimension: int
    fiber_dimension: int
    equal: bool


@dataclass
class BaseChangeReport:
    points: List[BaseChangePoint]
    stabilized: bool
    level: int
    degree_cap: int
    ranks: List[int]

    @property
    def all_equal(self) -> bool:
        return all(pt.equal for pt in self.points)

    @property
    def status(self) -> str:
        # an inequality is never reported as a clean result: it is a truncation finding
        return "ok" if self.stabilized and self.all_equal else "inconclusive"


def base_change_check(t: Tower, split: RelativeSplit, level: int, degree_cap: int,
                      gm: Optional[GMTower] = None) -> BaseChangeReport:
    """Compare the F_p-span of the GM generators at s = c with the fiber's truncated H^0."""
    gm = gm_pushforward(t, split, level, degree_cap) if gm is None else gm
    p, k = t.p, len(split.fiber_vars)
    points = []
    for c in range(p):
        fiber = fiber_restrict(t, split, c)
        h0 = truncated_h0(fiber, level, degree_cap)
        ev = [_evaluate_vector(g, split, c) for g in gm.embedding]
        A = _span_rows(ev, p, t.rank, degree_cap, k)
        B = _span_rows(h0.basis, p, t.rank, degree_cap, k)
        points.append(BaseChangePoint(c, rank_mod(A, p) if A.size else 0, h0.dimension,
                                      same_row_space(A, B, p)))
    return BaseChangeReport(points, gm.stabilized, level, degree_cap, gm.ranks)


# --------------------------------------------------------------------------
# O-spans of vectors
# --------------------------------------------------------------------------

def _maximal_minor(vectors):
    """Row subset with a nonzero maximal minor of the column matrix, or None."""
    import itertools

    r = len(vectors[0])
    m = len(vectors)
    for rows in itertools.combinations(range(r), m):
        M = tuple(tuple(vectors[j][i] for j in range(m)) for i in rows)
        d = det(M)
        if not d.is_zero():
            return rows, M, d
    return None


def module_contains(vectors, v) -> bool:
    """Is v in the O-span of the O-linearly independent ``vectors``?

    Cramer's rule on a nonzero maximal minor gives the only candidate
    coefficients; membership holds iff every division is exact and the
    combination reproduces v.
    """
    if not vectors:
        return all(f.is_zero() for f in v)
    found = _maximal_minor(vectors)
    if found is None:
        raise ValueError("vectors are not linearly independent")
    rows, M, d = found
    m = len(vectors)
    coeffs = []
    for j in range(m):
        Mj = tuple(tuple(v[i] if jj == j else M[ii][jj] for jj in range(m)) for ii, i in enumerate(rows))
        q = det(Mj).exact_div(d)
        if q is None:
            return False
        coeffs.append(q)
    for i in range(len(v)):
        acc = Poly.zero(v[i].p, v[i].vars)
        for q, g in zip(coeffs, vectors):
            acc = acc + q * g[i]
        if acc != v[i]:
            return False
    return True


def same_module(a, b) -> bool:
    """Equality of O-spans of two independent families."""
    if len(a) != len(b):
        return False
    return all(module_contains(a, v) for v in b) and all(module_contains(b, v) for v in a)


@dataclass
class PullbackSub:
    gm: GMTower
    embedding: List[Tuple[Poly, ...]]
    fiber_checks: List[Tuple[int, bool]]

    @property
    def is_everything(self) -> bool:
        """E_S = E: the generators span E over O."""
        r = len(self.embedding[0]) if self.embedding else 0
        if len(self.embedding) != r or r == 0:
            return False
        return det(from_columns(self.embedding)).is_constant()


def maximal_pullback_sub(t: Tower, split: RelativeSplit, level: int, degree_cap: int) -> PullbackSub:
    """E_S = f^*(f_* E^{nabla_{X/S}}) inside E, with a fiberwise check.

    At each c in F_p the evaluated generators must span over O_fiber the same
    submodule as the fiber's truncated horizontal sections.
    """
    gm = gm_pushforward(t, split, level, degree_cap)
    checks = []
    for c in range(t.p):
        fiber = fiber_restrict(t, split, c)
        h0 = truncated_h0(fiber, level, degree_cap)
        ev = [_evaluate_vector(g, split, c) for g in gm.embedding]
        try:
            ok = same_module(ev, h0.basis)
        except ValueError:
            ok = False
        checks.append((c, ok))
    return PullbackSub(gm, list(gm.embedding), checks)


def external_product(a: Tower, b: Tower) -> Tower:
    """a boxtimes b on the product of the two spaces: S_i = S_i^a (x) S_i^b."""
    if a.p != b.p:
        raise DimensionError("towers over different primes")
    overlap = set(a.variables) & set(b.variables)
    if overlap:
        raise UnknownVariableError(f"variables {sorted(overlap)} occur in both factors")
    if a.mode != "absolute" or b.mode != "absolute":
        raise ModeError("external products are formed from absolute towers")
    if a.length != b.length:
        raise DimensionError("factors must have the same tower length")
    variables = a.variables + b.variables
    sig = tuple(kron(mat_with_vars(x, variables), mat_with_vars(y, variables))
                for x, y in zip(a.sigmas, b.sigmas))
    return Tower(a.p, variables, (), "absolute", a.rank * b.rank, sig)
