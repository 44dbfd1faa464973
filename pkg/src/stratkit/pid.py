"""Linear algebra over the principal ideal domain F_p[t].

Univariate polynomials are tuples of residues, lowest degree first, with no
trailing zeros (``()`` is zero).  Matrices are lists of rows.  The row Hermite
normal form used here is unique for a given row module: pivots monic, entries
above a pivot of lower degree than the pivot.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

from .arith import Poly, inv_mod

UPoly = Tuple[int, ...]


def trim(a) -> UPoly:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def deg(a: UPoly) -> int:
    return len(a) - 1


def add(a: UPoly, b: UPoly, p: int) -> UPoly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % p
    return trim(out)


def sub(a: UPoly, b: UPoly, p: int) -> UPoly:
    return add(a, scale(b, p - 1, p), p)


def scale(a: UPoly, c: int, p: int) -> UPoly:
    c %= p
    if not c:
        return ()
    return tuple(x * c % p for x in a)


def mul(a: UPoly, b: UPoly, p: int) -> UPoly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return trim(out)


def divmod_u(a: UPoly, b: UPoly, p: int):
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    inv = inv_mod(b[-1], p)
    r = list(a)
    q = [0] * max(len(a) - len(b) + 1, 0)
    db = len(b) - 1
    for i in range(len(a) - 1, db - 1, -1):
        c = r[i] * inv % p
        if c:
            q[i - db] = c
            for j, y in enumerate(b):
                r[i - db + j] = (r[i - db + j] - c * y) % p
    return trim(q), trim(r)


def monic(a: UPoly, p: int):
    """(monic associate, inverse of the leading coefficient)."""
    inv = inv_mod(a[-1], p)
    return scale(a, inv, p), inv


def row_combine(target, source, q, p):
    """target - q * source, entrywise."""
    return [sub(t, mul(q, s, p), p) if s and q else t for t, s in zip(target, source)]


def hermite(rows: Sequence[Sequence[UPoly]], p: int, ncols: int, transform: bool = False):
    """Row Hermite normal form.

    Returns ``(H, pivots, U)`` where ``H`` has all rows (nonzero ones first),
    ``pivots`` lists pivot columns of the nonzero rows and ``U`` (if requested)
    is unimodular with ``U * rows = H``.
    """
    A = [list(r) for r in rows]
    m = len(A)
    U = [[(1,) if i == j else () for j in range(m)] for i in range(m)] if transform else None
    pivots: List[int] = []
    top = 0
    for c in range(ncols):
        if top == m:
            break
        while True:
            nz = [i for i in range(top, m) if A[i][c]]
            if not nz:
                break
            best = min(nz, key=lambda i: (len(A[i][c]), i))
            if best != top:
                A[top], A[best] = A[best], A[top]
                if U is not None:
                    U[top], U[best] = U[best], U[top]
            clean = True
            for i in range(top + 1, m):
                if A[i][c]:
                    q, r = divmod_u(A[i][c], A[top][c], p)
                    A[i] = row_combine(A[i], A[top], q, p)
                    if U is not None:
                        U[i] = row_combine(U[i], U[top], q, p)
                    if r:
                        clean = False
            if clean:
                break
        if not A[top][c]:
            continue
        _, inv = monic(A[top][c], p)
        A[top] = [scale(x, inv, p) for x in A[top]]
        if U is not None:
            U[top] = [scale(x, inv, p) for x in U[top]]
        for i in range(top):
            if A[i][c]:
                q, _ = divmod_u(A[i][c], A[top][c], p)
                if q:
                    A[i] = row_combine(A[i], A[top], q, p)
                    if U is not None:
                        U[i] = row_combine(U[i], U[top], q, p)
        pivots.append(c)
        top += 1
    return A, pivots, U


def row_basis(rows: Sequence[Sequence[UPoly]], p: int, ncols: int):
    """Canonical basis (HNF rows) of the row module, with pivot columns."""
    H, pivots, _ = hermite(rows, p, ncols)
    return H[: len(pivots)], pivots


def kernel(K: Sequence[Sequence[UPoly]], p: int, ncols: int):
    """Basis of {u in R^ncols : K u = 0}, canonical (HNF), with pivots.

    The kernel of a matrix is saturated, so the basis consists of primitive
    vectors.
    """
    # rows of K^T indexed by unknowns
    KT = [[K[e][u] for e in range(len(K))] for u in range(ncols)]
    H, pivots, U = hermite(KT, p, len(K), transform=True)
    kern = U[len(pivots):]
    if not kern:
        return [], []
    return row_basis(kern, p, ncols)


def solve_hnf(basis, pivots, w, p):
    """Coefficients c with sum c_k basis_k = w, or None if w is outside the span.

    ``basis`` must be in Hermite normal form with the given pivot columns.
    """
    w = list(w)
    coeffs = []
    for row, c in zip(basis, pivots):
        if w[c]:
            q, r = divmod_u(w[c], row[c], p)
            if r:
                return None
            w = row_combine(w, row, q, p)
            coeffs.append(q)
        else:
            coeffs.append(())
    if any(w):
        return None
    return coeffs


# conversions ---------------------------------------------------------------

def from_poly(f: Poly, position: int = 0) -> UPoly:
    """Univariate coefficients of ``f`` in the variable at ``position``;
    ``f`` must not involve other variables."""
    if not f.terms:
        return ()
    out = [0] * (f.degree_in([position]) + 1)
    for e, c in f.terms.items():
        if any(x for i, x in enumerate(e) if i != position):
            raise ValueError("polynomial involves more than one variable")
        out[e[position]] = c
    return trim(out)


def to_poly(a: UPoly, p: int, variables, position: int = 0) -> Poly:
    k = len(tuple(variables))
    terms = {}
    for d, c in enumerate(a):
        if c:
            e = [0] * k
            e[position] = d
            terms[tuple(e)] = c
    return Poly(p, variables, terms, _clean=True)
