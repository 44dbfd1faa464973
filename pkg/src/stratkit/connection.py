"""Connections on free modules, p-curvature, Cartier descent, Frobenius pullback.

Sign convention, fixed everywhere: ``nabla(d/dx_i) v = d/dx_i v + A_i v`` on
column vectors, and the connection attached to a frame ``G`` is
``A_i = -(d_i G) G^{-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from . import pid
from .arith import Poly, check_prime, inv_mod, monomials_up_to, unit_index
from .config import current_caps
from .errors import DegreeBoundError, DimensionError, FlatnessError, InvertibilityError
from .linalg import (
    PolyMatrix, column, det, from_columns, identity, in_frobenius_image, inverse_unit,
    is_zero_matrix, mat_add, mat_hasse, mat_mul, mat_neg, max_degree, rref,
    truncated_kernel, unit_det, vectors_to_rows, zeros,
)


@dataclass(frozen=True)
class Connection:
    p: int
    fiber_vars: Tuple[str, ...]
    base_vars: Tuple[str, ...]
    rank: int
    matrices: Tuple[PolyMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "fiber_vars", tuple(self.fiber_vars))
        object.__setattr__(self, "base_vars", tuple(self.base_vars))
        object.__setattr__(self, "matrices", tuple(self.matrices))
        check_prime(self.p)
        if len(self.matrices) != len(self.fiber_vars):
            raise DimensionError("need one matrix per fiber variable")
        for A in self.matrices:
            if len(A) != self.rank or any(len(row) != self.rank for row in A):
                raise DimensionError("connection matrix has the wrong size")
            for row in A:
                for e in row:
                    if e.vars != self.variables or e.p != self.p:
                        raise DimensionError("connection entry lives in a different ring")

    @property
    def variables(self):
        return self.fiber_vars + self.base_vars

    @property
    def fiber_positions(self):
        return tuple(range(len(self.fiber_vars)))

    @classmethod
    def trivial(cls, p, fiber_vars, base_vars, rank):
        variables = tuple(fiber_vars) + tuple(base_vars)
        return cls(p, fiber_vars, base_vars, rank, tuple(zeros(p, variables, rank) for _ in fiber_vars))

    def nabla(self, i: int, v: Sequence[Poly]) -> Tuple[Poly, ...]:
        """nabla(d/dx_i) applied to a column vector."""
        A = self.matrices[i]
        out = []
        for row, f in zip(A, v):
            acc = f.derivative(i)
            for a, g in zip(row, v):
                if a.terms and g.terms:
                    acc = acc + a * g
            out.append(acc)
        return tuple(out)

    def max_entry_degree(self) -> int:
        return max((max_degree(A) for A in self.matrices), default=-1)


@dataclass(frozen=True)
class Frame:
    """Basis of the Cartier descent inside E: columns are horizontal and the
    determinant is the nonzero constant ``det_value``."""

    G: PolyMatrix
    det_value: int
    fiber_vars: Tuple[str, ...]
    base_vars: Tuple[str, ...] = ()

    @property
    def p(self):
        return self.G[0][0].p

    @classmethod
    def from_matrix(cls, G: PolyMatrix, fiber_vars, base_vars=()):
        d = unit_det(G)
        if d is None:
            raise InvertibilityError("frame determinant is not a nonzero constant")
        return cls(G, d, tuple(fiber_vars), tuple(base_vars))


def derivative_matrix(A: PolyMatrix, i: int) -> PolyMatrix:
    return mat_hasse(A, unit_index(len(A[0][0].vars), i))


def is_flat(c: Connection) -> bool:
    """d_i A_j + A_i A_j == d_j A_i + A_j A_i for all i < j."""
    k = len(c.fiber_vars)
    for i in range(k):
        for j in range(i + 1, k):
            Ai, Aj = c.matrices[i], c.matrices[j]
            lhs = mat_add(derivative_matrix(Aj, i), mat_mul(Ai, Aj))
            rhs = mat_add(derivative_matrix(Ai, j), mat_mul(Aj, Ai))
            if lhs != rhs:
                return False
    return True


def p_curvature(c: Connection) -> List[PolyMatrix]:
    """Matrices of nabla(d/dx_i)^p on the standard basis."""
    if not is_flat(c):
        raise FlatnessError("connection is not integrable")
    e = identity(c.p, c.variables, c.rank)
    out = []
    for i in range(len(c.fiber_vars)):
        cols = []
        for j in range(c.rank):
            v = column(e, j)
            for _ in range(c.p):
                v = c.nabla(i, v)
            cols.append(v)
        out.append(from_columns(cols))
    return out


def has_zero_p_curvature(c: Connection) -> bool:
    return all(is_zero_matrix(psi) for psi in p_curvature(c))


def gauge_transform(c: Connection, H: PolyMatrix) -> Connection:
    """Change of basis v = H w: A'_i = H^{-1} (A_i H + d_i H)."""
    Hinv = inverse_unit(H, "gauge matrix")
    mats = []
    for i, A in enumerate(c.matrices):
        mats.append(mat_mul(Hinv, mat_add(mat_mul(A, H), derivative_matrix(H, i))))
    return Connection(c.p, c.fiber_vars, c.base_vars, c.rank, tuple(mats))


def connection_of_frame(G: PolyMatrix, fiber_vars, base_vars=()) -> Connection:
    """The connection whose horizontal frame is G: A_i = -(d_i G) G^{-1}."""
    Ginv = inverse_unit(G, "frame")
    p = G[0][0].p
    mats = tuple(mat_neg(mat_mul(derivative_matrix(G, i), Ginv)) for i in range(len(tuple(fiber_vars))))
    return Connection(p, tuple(fiber_vars), tuple(base_vars), len(G), mats)


def frobenius_pullback(frame: Frame, downstairs_rank: Optional[int] = None) -> Connection:
    if downstairs_rank is not None and downstairs_rank != len(frame.G):
        raise DimensionError("frame size does not match the requested rank")
    return connection_of_frame(frame.G, frame.fiber_vars, frame.base_vars)


def frames_equivalent(G: PolyMatrix, H: PolyMatrix, twist_positions) -> Optional[PolyMatrix]:
    """U with G = H U, U over the Frobenius-twisted ring and unit determinant, or None."""
    U = mat_mul(inverse_unit(H, "frame"), G)
    if not in_frobenius_image(U, twist_positions):
        return None
    if unit_det(U) is None:
        return None
    return U


# --------------------------------------------------------------------------
# Cartier descent
# --------------------------------------------------------------------------

def default_degree_cap(c: Connection) -> int:
    caps = current_caps()
    if caps.degree_cap is not None:
        return caps.degree_cap
    return 4 * (1 + max(c.max_entry_degree(), 0))


def horizontal_sections(c: Connection, degree: int):
    """F_p-basis of {v : deg v <= degree, nabla(d_i) v = 0 for all fiber i}."""
    variables = c.variables
    monos = monomials_up_to(len(variables), degree)

    def make_map(i):
        A = c.matrices[i]

        def fn(m, l):
            xm = Poly(c.p, variables, {m: 1}, _clean=True)
            out = []
            for row_idx in range(c.rank):
                acc = A[row_idx][l] * xm if A[row_idx][l].terms else Poly.zero(c.p, variables)
                if row_idx == l:
                    acc = acc + xm.derivative(i)
                out.append(acc)
            return tuple(out)
        return fn

    maps = [make_map(i) for i in range(len(c.fiber_vars))]
    vectors, coords, rows = truncated_kernel(c.p, variables, c.rank, monos, maps)
    return vectors, coords, rows


def _split_residues(f: Poly, p: int):
    """f(x) = sum_a x^a f_a(x^p) for one variable; returns [f_0..f_{p-1}] as UPoly."""
    parts = [dict() for _ in range(p)]
    for (e,), c in f.terms.items():
        parts[e % p][e // p] = c
    out = []
    for d in parts:
        size = max(d) + 1 if d else 0
        out.append(pid.trim([d.get(i, 0) for i in range(size)]))
    return out


def _join_residues(parts, p, variables):
    terms = {}
    for a, part in enumerate(parts):
        for j, c in enumerate(part):
            if c:
                terms[(a + p * j,)] = c
    return Poly(p, variables, terms, _clean=True)


def _frame_univariate(c: Connection, vectors) -> Optional[PolyMatrix]:
    """Hermite basis of the F_p[x^p]-module spanned by the horizontal vectors."""
    p, r = c.p, c.rank
    rows = []
    for v in vectors:
        row = []
        for f in v:
            row.extend(_split_residues(f, p))
        rows.append(row)
    basis, pivots = pid.row_basis(rows, p, r * p)
    if len(basis) != r:
        return None
    cols = []
    for row in basis:
        cols.append(tuple(_join_residues(row[l * p:(l + 1) * p], p, c.variables) for l in range(r)))
    return from_columns(cols)


def _frame_normal_form(c: Connection, vectors, coords, rows) -> Optional[PolyMatrix]:
    """Pick horizontal sections with value e_j at the origin, reduced modulo the
    sections vanishing at the origin.  Heuristic over multivariate twisted rings."""
    import numpy as np

    p, r = c.p, c.rank
    if not vectors:
        return None
    k = len(c.variables)
    origin = (0,) * k
    ev = np.array([[v[l].terms.get(origin, 0) for l in range(r)] for v in vectors], dtype=np.int64)
    # solve for combinations hitting e_j and for the kernel of evaluation
    aug = np.hstack([ev, np.eye(len(vectors), dtype=np.int64)])
    R, piv = rref(aug, p)
    lead = [i for i, q in enumerate(piv) if q < r]
    if len(lead) != r:
        return None
    vanish = R[len(lead):, r:]
    W = rows.T.dot(vanish.T).T % p if vanish.size else np.zeros((0, rows.shape[1]), dtype=np.int64)
    WR, wpiv = rref(W, p) if W.size else (W, [])
    cols = []
    for j in range(r):
        # combination of vectors whose evaluation is e_j
        target = np.zeros(r, dtype=np.int64)
        target[j] = 1
        comb = np.zeros(len(vectors), dtype=np.int64)
        for i, q in enumerate(piv[: len(lead)]):
            comb = (comb + target[q] * R[i, r:]) % p
        vec = comb.dot(rows) % p
        for i, q in enumerate(wpiv):
            if vec[q]:
                vec = (vec - vec[q] * WR[i]) % p
        cols.append(_row_to_vector(vec, coords, p, c.variables, r))
    return from_columns(cols)


def _row_to_vector(row, coords, p, variables, r):
    from .linalg import vector_from_coords
    return vector_from_coords(row, coords, p, variables, r)


def cartier_descent(c: Connection, max_degree: Optional[int] = None) -> Frame:
    """A horizontal frame with constant nonzero determinant.

    The horizontal sections of degree <= D are found by an F_p-linear solve;
    D is deepened up to the cap.  Over F_p[x^p] (one fiber variable, no base
    variables) the frame is the Hermite basis of the span, which is a basis
    of the descent as soon as D is large enough.  Otherwise a normal-form
    heuristic is used.
    """
    if not is_flat(c):
        raise FlatnessError("connection is not integrable")
    if not all(is_zero_matrix(psi) for psi in p_curvature(c)):
        raise FlatnessError("p-curvature is nonzero")
    cap = default_degree_cap(c) if max_degree is None else max_degree
    schedule = []
    d = 0
    while d < cap:
        schedule.append(d)
        d = 1 if d == 0 else 2 * d
    schedule.append(cap)
    univariate = len(c.fiber_vars) == 1 and not c.base_vars
    for D in schedule:
        vectors, coords, rows = horizontal_sections(c, D)
        if len(vectors) < c.rank:
            continue
        if univariate:
            G = _frame_univariate(c, vectors)
        else:
            G = _frame_normal_form(c, vectors, coords, rows)
        if G is not None:
            d = unit_det(G)
            if d is not None:
                return Frame(G, d, c.fiber_vars, c.base_vars)
    raise DegreeBoundError(cap)
