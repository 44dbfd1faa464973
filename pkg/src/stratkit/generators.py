"""Seeded random objects for property tests and experiments."""

from __future__ import annotations

import random
from typing import Sequence

from .arith import Poly, monomials_up_to
from .linalg import PolyMatrix, identity, mat_mul, max_degree


def random_poly(rng: random.Random, p: int, variables: Sequence[str], max_deg: int, density: float = 0.5) -> Poly:
    variables = tuple(variables)
    terms = {}
    for m in monomials_up_to(len(variables), max_deg):
        if rng.random() < density:
            terms[m] = rng.randrange(1, p)
    return Poly(p, variables, terms)


def random_unimodular(rng: random.Random, p: int, variables: Sequence[str], rank: int, max_deg: int,
                      steps: int = 3, tries: int = 50) -> PolyMatrix:
    """Product of elementary matrices, a permutation and a constant diagonal,
    with every entry of degree <= max_deg."""
    variables = tuple(variables)
    for _ in range(tries):
        M = identity(p, variables, rank)
        if rank > 1:
            for _ in range(steps):
                i, j = rng.sample(range(rank), 2)
                f = random_poly(rng, p, variables, max_deg)
                E = [list(row) for row in identity(p, variables, rank)]
                E[i][j] = f
                M = mat_mul(M, tuple(tuple(r) for r in E))
            perm = list(range(rank))
            rng.shuffle(perm)
            M = tuple(M[k] for k in perm)
        diag = [[Poly.const(p, variables, rng.randrange(1, p) if a == b else 0) for b in range(rank)]
                for a in range(rank)]
        M = mat_mul(M, tuple(tuple(r) for r in diag))
        if max_degree(M) <= max_deg:
            return M
    return identity(p, variables, rank)


def random_constant_invertible(rng: random.Random, p: int, variables: Sequence[str], rank: int) -> PolyMatrix:
    return random_unimodular(rng, p, variables, rank, 0)
