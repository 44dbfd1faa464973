"""Exact linear algebra: dense F_p elimination and small polynomial matrices.

Polynomial matrices are tuples of row tuples of ``Poly``; all entries share one
ring.  Determinants and adjugates are division-free (Berkowitz), so they are
valid over any commutative ring and need no pivot units.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from .arith import Poly, inv_mod
from .errors import DimensionError, InvertibilityError

PolyMatrix = Tuple[Tuple[Poly, ...], ...]


# --------------------------------------------------------------------------
# F_p
# --------------------------------------------------------------------------

def rref(M, p: int):
    """Reduced row echelon form mod p. Returns (nonzero rows, pivot columns)."""
    A = np.array(M, dtype=np.int64)
    if A.ndim != 2:
        raise DimensionError("rref expects a 2-d array")
    A %= p
    nrows, ncols = A.shape
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            A[[r, k]] = A[[k, r]]
        A[r] = A[r] * inv_mod(int(A[r, c]), p) % p
        col = A[:, c].copy()
        col[r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            A[hit] = (A[hit] - np.outer(col[hit], A[r])) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rank_mod(M, p: int) -> int:
    A = np.array(M, dtype=np.int64)
    if A.size == 0:
        return 0
    return len(rref(A, p)[1])


def nullspace(M, p: int, ncols: int | None = None) -> np.ndarray:
    """Basis of {v : M v = 0} as rows, in reduced echelon form."""
    A = np.array(M, dtype=np.int64)
    if ncols is None:
        ncols = A.shape[1]
    if A.size == 0:
        return np.eye(ncols, dtype=np.int64)
    R, pivots = rref(A, p)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = np.zeros((len(free), ncols), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for r, c in enumerate(pivots):
            basis[i, c] = (-R[r, f]) % p
    if len(free) == 0:
        return basis
    return rref(basis, p)[0]


def _as_rows(M):
    M = np.array(M, dtype=np.int64)
    return M if M.ndim == 2 else M.reshape(-1, M.shape[-1] if M.ndim else 0)


def same_row_space(A, B, p: int) -> bool:
    A, B = _as_rows(A), _as_rows(B)
    ra, rb = rank_mod(A, p), rank_mod(B, p)
    if ra != rb:
        return False
    if ra == 0:
        return True
    return rank_mod(np.vstack([A, B]), p) == ra


# --------------------------------------------------------------------------
# polynomial matrices
# --------------------------------------------------------------------------

def shape(A: PolyMatrix):
    return len(A), (len(A[0]) if A else 0)


def ring_of(A: PolyMatrix):
    e = A[0][0]
    return e.p, e.vars


def identity(p: int, variables, r: int) -> PolyMatrix:
    one, zero = Poly.const(p, variables, 1), Poly.zero(p, variables)
    return tuple(tuple(one if i == j else zero for j in range(r)) for i in range(r))


def zeros(p: int, variables, r: int, c: int | None = None) -> PolyMatrix:
    zero = Poly.zero(p, variables)
    return tuple(tuple(zero for _ in range(r if c is None else c)) for _ in range(r))


def from_ints(p: int, variables, rows) -> PolyMatrix:
    return tuple(tuple(Poly.const(p, variables, v) for v in row) for row in rows)


def mat_map(A: PolyMatrix, fn) -> PolyMatrix:
    return tuple(tuple(fn(e) for e in row) for row in A)


def mat_add(A: PolyMatrix, B: PolyMatrix) -> PolyMatrix:
    if shape(A) != shape(B):
        raise DimensionError("matrix shapes differ")
    return tuple(tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_sub(A: PolyMatrix, B: PolyMatrix) -> PolyMatrix:
    if shape(A) != shape(B):
        raise DimensionError("matrix shapes differ")
    return tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def mat_neg(A: PolyMatrix) -> PolyMatrix:
    return mat_map(A, lambda e: -e)


def mat_scale(A: PolyMatrix, c) -> PolyMatrix:
    return mat_map(A, lambda e: e * c)


def mat_mul(A: PolyMatrix, B: PolyMatrix) -> PolyMatrix:
    n, m = shape(A)
    m2, k = shape(B)
    if m != m2:
        raise DimensionError(f"cannot multiply {n}x{m} by {m2}x{k}")
    p, variables = ring_of(A)
    zero = Poly.zero(p, variables)
    cols = list(zip(*B))
    out = []
    for row in A:
        new_row = []
        for col in cols:
            acc = zero
            for a, b in zip(row, col):
                if a.terms and b.terms:
                    acc = acc + a * b
            new_row.append(acc)
        out.append(tuple(new_row))
    return tuple(out)


def mat_vec(A: PolyMatrix, v: Sequence[Poly]) -> Tuple[Poly, ...]:
    return tuple(col[0] for col in mat_mul(A, tuple((e,) for e in v)))


def transpose(A: PolyMatrix) -> PolyMatrix:
    return tuple(zip(*A))


def column(A: PolyMatrix, j: int) -> Tuple[Poly, ...]:
    return tuple(row[j] for row in A)


def from_columns(cols: Sequence[Sequence[Poly]]) -> PolyMatrix:
    return tuple(zip(*cols))


def kron(A: PolyMatrix, B: PolyMatrix) -> PolyMatrix:
    n, m = shape(A)
    k, l = shape(B)
    return tuple(tuple(A[i][j] * B[a][b] for j in range(m) for b in range(l))
                 for i in range(n) for a in range(k))


def is_zero_matrix(A: PolyMatrix) -> bool:
    return all(e.is_zero() for row in A for e in row)


def max_degree(A: PolyMatrix) -> int:
    return max((e.degree() for row in A for e in row), default=-1)


def mat_hasse(A: PolyMatrix, n) -> PolyMatrix:
    return mat_map(A, lambda e: e.hasse(n))


def mat_frobenius(A: PolyMatrix, positions, times: int = 1) -> PolyMatrix:
    positions = tuple(positions)
    return mat_map(A, lambda e: e.frobenius(positions, times))


def mat_with_vars(A: PolyMatrix, variables) -> PolyMatrix:
    return mat_map(A, lambda e: e.with_vars(variables))


def berkowitz(A: PolyMatrix) -> List[Poly]:
    """Coefficients [1, c1, ..., cn] of det(t*I - A), division-free."""
    n, m = shape(A)
    if n != m:
        raise DimensionError("characteristic polynomial of a non-square matrix")
    p, variables = ring_of(A)
    one, zero = Poly.const(p, variables, 1), Poly.zero(p, variables)
    coeffs = [one]
    for r in range(n):
        # leading (r+1)x(r+1) block: [[A_r, S], [R, a]]
        a = A[r][r]
        if r == 0:
            coeffs = [one, -a]
            continue
        S = [A[i][r] for i in range(r)]
        R = [A[r][j] for j in range(r)]
        sub = [A[i][:r] for i in range(r)]
        # first Toeplitz column: 1, -a, -R S, -R A S, ..., -R A^(r-1) S
        t = [one, -a]
        vec = S
        for _ in range(r):
            acc = zero
            for x, y in zip(R, vec):
                acc = acc + x * y
            t.append(-acc)
            vec = [sum((sub[i][j] * vec[j] for j in range(r)), zero) for i in range(r)]
        # new coefficients = Toeplitz(t) (size (r+2) x (r+1)) times old
        new = []
        for i in range(r + 2):
            acc = zero
            for j in range(min(i, r) + 1):
                if i - j < len(t):
                    acc = acc + t[i - j] * coeffs[j]
            new.append(acc)
        coeffs = new
    return coeffs


def det(A: PolyMatrix) -> Poly:
    n, m = shape(A)
    if n != m:
        raise DimensionError("determinant of a non-square matrix")
    if n == 0:
        raise DimensionError("determinant of an empty matrix")
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    if n == 3:
        return (A[0][0] * (A[1][1] * A[2][2] - A[1][2] * A[2][1])
                - A[0][1] * (A[1][0] * A[2][2] - A[1][2] * A[2][0])
                + A[0][2] * (A[1][0] * A[2][1] - A[1][1] * A[2][0]))
    c = berkowitz(A)
    return c[n] if n % 2 == 0 else -c[n]


def adjugate(A: PolyMatrix) -> PolyMatrix:
    n, _ = shape(A)
    p, variables = ring_of(A)
    if n == 1:
        return ((Poly.const(p, variables, 1),),)
    if n == 2:
        return ((A[1][1], -A[0][1]), (-A[1][0], A[0][0]))
    # Cayley-Hamilton: adj(A) = (-1)^(n-1) (A^(n-1) + c1 A^(n-2) + ... + c_(n-1) I)
    c = berkowitz(A)
    acc = identity(p, variables, n)
    for k in range(1, n):
        acc = mat_add(mat_mul(A, acc), mat_scale(identity(p, variables, n), c[k]))
    return acc if n % 2 == 1 else mat_neg(acc)


def unit_det(A: PolyMatrix) -> int | None:
    """The determinant if it is a nonzero constant, else None."""
    d = det(A)
    if d.is_zero() or not d.is_constant():
        return None
    return d.constant_value()


def inverse_unit(A: PolyMatrix, what: str = "matrix") -> PolyMatrix:
    d = unit_det(A)
    if d is None:
        raise InvertibilityError(f"{what} does not have a nonzero constant determinant")
    return mat_scale(adjugate(A), inv_mod(d, ring_of(A)[0]))


def in_frobenius_image(A: PolyMatrix, positions) -> bool:
    positions = tuple(positions)
    return all(e.in_frobenius_image(positions) for row in A for e in row)


def mat_frobenius_inverse(A: PolyMatrix, positions) -> PolyMatrix:
    positions = tuple(positions)
    return mat_map(A, lambda e: e.frobenius_inverse(positions))


def matrix_str(A: PolyMatrix) -> List[List[str]]:
    return [[str(e) for e in row] for row in A]


# --------------------------------------------------------------------------
# kernels of F_p-linear maps on truncated polynomial vectors
# --------------------------------------------------------------------------

def coordinate_order(monomials, rank):
    """(monomial, component) coordinates, graded-lex descending so that the
    pivot of a reduced echelon row is its leading coordinate."""
    coords = [(m, l) for m in monomials for l in range(rank)]
    coords.sort(key=lambda t: (sum(t[0]), t[0], -t[1]), reverse=True)
    return coords


def vector_from_coords(coeffs, coords, p, variables, rank):
    terms = [dict() for _ in range(rank)]
    for c, (m, l) in zip(coeffs, coords):
        c = int(c) % p
        if c:
            terms[l][m] = c
    return tuple(Poly(p, variables, t, _clean=True) for t in terms)


def truncated_kernel(p: int, variables, rank: int, monomials, maps):
    """F_p-basis of {v : deg-truncated, f(v) = 0 for every f in maps}.

    ``monomials`` spans the allowed support of each component; every map takes
    a basis vector ``(m, l)`` (monomial m in component l) to a tuple of Poly.
    Returns (basis vectors in reduced echelon form, coordinate order, matrix
    of basis rows).
    """
    coords = coordinate_order(monomials, rank)
    row_index = {}
    entries = []
    for j, (m, l) in enumerate(coords):
        for k, fn in enumerate(maps):
            image = fn(m, l)
            for comp, f in enumerate(image):
                for e, c in f.terms.items():
                    key = (k, comp, e)
                    i = row_index.setdefault(key, len(row_index))
                    entries.append((i, j, c))
    M = np.zeros((len(row_index), len(coords)), dtype=np.int64)
    for i, j, c in entries:
        M[i, j] = (M[i, j] + c) % p
    basis = nullspace(M, p, len(coords))
    vectors = [vector_from_coords(row, coords, p, variables, rank) for row in basis]
    return vectors, coords, basis


def vectors_to_rows(vectors, coords):
    """Coordinates of polynomial vectors in the given coordinate order
    (coordinates outside ``coords`` raise KeyError)."""
    pos = {c: i for i, c in enumerate(coords)}
    rows = np.zeros((len(vectors), len(coords)), dtype=np.int64)
    for r, v in enumerate(vectors):
        for l, f in enumerate(v):
            for e, c in f.terms.items():
                rows[r, pos[(e, l)]] = c
    return rows
