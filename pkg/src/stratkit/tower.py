"""Stratified bundles presented as Frobenius towers.

A tower of length l stores untwisted matrices S_0, ..., S_{l-1}; S_i has as
columns the images of the basis of E^{i+1} in E^i.  All twisting happens in
the composite frame

    G_l = S_0 * phi(S_1) * phi^2(S_2) * ... * phi^{l-1}(S_{l-1}),

where phi raises the active variables to the p-th power (all variables for
absolute towers, fiber variables only for relative ones).  The columns of G_l
are a basis of E^(l), so for |n| < p^l the stratification acts by
``nabla(D_n) v = G_l D_n(G_l^{-1} v)``.

Worked example (p = 2, one variable x): S_0 = [[1, x], [0, 1]] and
S_1 = [[1, x], [0, 1]] give G_2 = [[1, x + x^2], [0, 1]].
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .arith import Poly, check_prime, inv_mod, monomials_up_to, unit_index
from .config import current_caps
from .connection import Connection, cartier_descent, connection_of_frame, is_flat, p_curvature
from .diffop import DiffOperator
from .errors import (
    DimensionError, FlatnessError, LevelExceededError, ModeError, StratificationObstruction,
    ValidationError,
)
from .linalg import (
    PolyMatrix, column, det, from_columns, identity, in_frobenius_image, inverse_unit, is_zero_matrix,
    kron, mat_frobenius, mat_frobenius_inverse, mat_hasse, mat_mul, mat_scale, mat_vec, matrix_str, nullspace,
    transpose, truncated_kernel, unit_det,
)

MODES = ("absolute", "relative")


def _active_positions(mode, fiber_vars, base_vars):
    if mode == "absolute":
        return tuple(range(len(fiber_vars) + len(base_vars)))
    if mode == "relative":
        return tuple(range(len(fiber_vars)))
    raise ModeError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class Tower:
    p: int
    fiber_vars: Tuple[str, ...]
    base_vars: Tuple[str, ...]
    mode: str
    rank: int
    sigmas: Tuple[PolyMatrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "fiber_vars", tuple(self.fiber_vars))
        object.__setattr__(self, "base_vars", tuple(self.base_vars))
        object.__setattr__(self, "sigmas", tuple(self.sigmas))
        check_prime(self.p)
        if self.mode not in MODES:
            raise ModeError(f"unknown mode {self.mode!r}")
        if set(self.fiber_vars) & set(self.base_vars):
            raise DimensionError("fiber and base variables overlap")
        if not self.sigmas:
            raise ValidationError("a tower needs at least one sigma")
        for i, S in enumerate(self.sigmas):
            if len(S) != self.rank or any(len(row) != self.rank for row in S):
                raise ValidationError(f"sigmas[{i}] is not {self.rank}x{self.rank}")
            for row in S:
                for e in row:
                    if e.vars != self.variables or e.p != self.p:
                        raise ValidationError(f"sigmas[{i}] has an entry over the wrong ring")

    # metadata -------------------------------------------------------------
    @property
    def variables(self) -> Tuple[str, ...]:
        return self.fiber_vars + self.base_vars

    @property
    def length(self) -> int:
        return len(self.sigmas)

    @property
    def active_positions(self) -> Tuple[int, ...]:
        return _active_positions(self.mode, self.fiber_vars, self.base_vars)

    @property
    def active_vars(self) -> Tuple[str, ...]:
        return tuple(self.variables[i] for i in self.active_positions)

    @classmethod
    def unit(cls, p, fiber_vars, base_vars=(), mode="absolute", length=1, rank=1):
        variables = tuple(fiber_vars) + tuple(base_vars)
        return cls(p, fiber_vars, base_vars, mode, rank, tuple(identity(p, variables, rank) for _ in range(length)))

    def full_index(self, n: Sequence[int]) -> Tuple[int, ...]:
        n = tuple(n)
        if len(n) != len(self.active_positions):
            raise DimensionError(f"index {n} must have one entry per active variable {self.active_vars}")
        full = [0] * len(self.variables)
        for pos, x in zip(self.active_positions, n):
            full[pos] = x
        return tuple(full)

    # frames ---------------------------------------------------------------
    def composite_frame(self, level: Optional[int] = None) -> PolyMatrix:
        level = self.length if level is None else level
        G = self.sigmas[0]
        for i in range(1, level):
            G = mat_mul(G, mat_frobenius(self.sigmas[i], self.active_positions, i))
        return G

    @cached_property
    def frame(self) -> PolyMatrix:
        return self.composite_frame()

    @cached_property
    def frame_inverse(self) -> PolyMatrix:
        return inverse_unit(self.frame, "composite frame")

    # the stratification ---------------------------------------------------
    def check_level(self, n: Sequence[int]):
        if sum(n) >= self.p ** self.length:
            raise LevelExceededError(
                f"|n| = {sum(n)} is not below p^l = {self.p ** self.length}; the tower only determines lower orders")

    def action(self, n: Sequence[int], v: Sequence[Poly]) -> Tuple[Poly, ...]:
        """nabla(D_n) v = G D_n(G^{-1} v), for |n| < p^length."""
        self.check_level(n)
        if len(v) != self.rank:
            raise DimensionError("vector has the wrong length")
        full = self.full_index(n)
        if not any(full):
            return tuple(v)
        w = mat_vec(self.frame_inverse, v)
        w = tuple(f.hasse(full) for f in w)
        return mat_vec(self.frame, w)

    def action_matrix(self, n: Sequence[int]) -> PolyMatrix:
        self.check_level(n)
        return mat_mul(self.frame, mat_hasse(self.frame_inverse, self.full_index(n)))

    def apply_operator(self, op: DiffOperator, v: Sequence[Poly]) -> Tuple[Poly, ...]:
        """nabla(sum c_n D_n) v = sum c_n nabla(D_n) v."""
        if op.active != self.active_vars or op.vars != self.variables:
            raise DimensionError("operator variables do not match the tower")
        out = [Poly.zero(self.p, self.variables)] * self.rank
        for n, c in op.terms.items():
            w = self.action(n, v)
            out = [a + c * b for a, b in zip(out, w)]
        return tuple(out)

    def stratification(self, level: Optional[int] = None) -> "Stratification":
        """Generator matrices of nabla(D_{p^j e_i}) on the standard basis, j < level."""
        level = self.length if level is None else level
        if level > self.length:
            raise LevelExceededError("requested level exceeds the tower length")
        gens = {}
        for a in range(len(self.active_positions)):
            for j in range(level):
                n = unit_index(len(self.active_positions), a, self.p ** j)
                gens[(a, j)] = self.action_matrix(n)
        return Stratification(self.p, self.fiber_vars, self.base_vars, self.mode, self.rank, level, gens)


def stratified_action(t: Tower, n: Sequence[int], v: Sequence[Poly]) -> Tuple[Poly, ...]:
    return t.action(n, v)


# --------------------------------------------------------------------------
# truncated stratifications given by generator matrices
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Stratification:
    """A level-l stratification on the free module O^r.

    ``generators[(i, j)]`` is the matrix of nabla(D_{p^j e_i}) on the standard
    basis (i indexes the active variables, j < level).  Every other D_n with
    n_i < p^level is generated by these via the multiplication rule.
    """

    p: int
    fiber_vars: Tuple[str, ...]
    base_vars: Tuple[str, ...]
    mode: str
    rank: int
    level: int
    generators: Dict[Tuple[int, int], PolyMatrix] = field(compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fiber_vars", tuple(self.fiber_vars))
        object.__setattr__(self, "base_vars", tuple(self.base_vars))
        object.__setattr__(self, "_theta", {})
        k = len(self.active_positions)
        for i in range(k):
            for j in range(self.level):
                if (i, j) not in self.generators:
                    raise DimensionError(f"missing generator for variable {i}, level {j}")

    @property
    def variables(self):
        return self.fiber_vars + self.base_vars

    @property
    def active_positions(self):
        return _active_positions(self.mode, self.fiber_vars, self.base_vars)

    @property
    def active_vars(self):
        return tuple(self.variables[i] for i in self.active_positions)

    @classmethod
    def from_connection(cls, c: Connection) -> "Stratification":
        """Level-1 data of a connection; relative when the connection has base variables."""
        gens = {(i, 0): A for i, A in enumerate(c.matrices)}
        return cls(c.p, c.fiber_vars, c.base_vars, "relative" if c.base_vars else "absolute", c.rank, 1, gens)

    def truncate(self, level: int) -> "Stratification":
        if level > self.level:
            raise LevelExceededError("cannot raise the level of a stratification")
        gens = {k: v for k, v in self.generators.items() if k[1] < level}
        return Stratification(self.p, self.fiber_vars, self.base_vars, self.mode, self.rank, level, gens)

    def __eq__(self, other):
        if not isinstance(other, Stratification):
            return NotImplemented
        return (self.p, self.variables, self.mode, self.rank, self.level) == (
            other.p, other.variables, other.mode, other.rank, other.level) and self.generators == other.generators

    def connection(self) -> Connection:
        """The level-0 part as a connection on the active variables."""
        k = len(self.active_positions)
        fiber = self.active_vars
        base = tuple(v for v in self.variables if v not in fiber)
        if fiber + base != self.variables:
            raise DimensionError("active variables must come first")
        return Connection(self.p, fiber, base, self.rank, tuple(self.generators[(i, 0)] for i in range(k)))

    def _hasse_single(self, i: int, c: int, v):
        full = [0] * len(self.variables)
        full[self.active_positions[i]] = c
        return tuple(f.hasse(full) for f in v)

    def theta(self, i: int, c: int) -> PolyMatrix:
        """Matrix of nabla(D_{c e_i}) on the standard basis, c < p^level."""
        if c >= self.p ** self.level:
            raise LevelExceededError(f"order {c} is not below p^level")
        cache = self._theta
        key = (i, c)
        if key in cache:
            return cache[key]
        if c == 0:
            M = identity(self.p, self.variables, self.rank)
        else:
            j, q = 0, c
            digits = []
            while q:
                digits.append(q % self.p)
                q //= self.p
            j = len(digits) - 1
            top = digits[j]
            if c == self.p ** j:
                M = self.generators[(i, j)]
            else:
                # D_{p^j} D_{c - p^j} = top * D_c  (Lucas)
                rest = self.theta(i, c - self.p ** j)
                cols = [self.act_single(i, self.p ** j, column(rest, l)) for l in range(self.rank)]
                M = mat_scale(from_columns(cols), inv_mod(top, self.p))
        cache[key] = M
        return M

    def act_single(self, i: int, c: int, v):
        """nabla(D_{c e_i}) v = sum_b theta(i, b) D_{(c-b) e_i}(v)."""
        acc = None
        for b in range(c + 1):
            w = self._hasse_single(i, c - b, v)
            if not any(f.terms for f in w):
                continue
            term = mat_vec(self.theta(i, b), w) if b else w
            acc = term if acc is None else tuple(x + y for x, y in zip(acc, term))
        if acc is None:
            acc = tuple(Poly.zero(self.p, self.variables) for _ in range(self.rank))
        return acc

    def action(self, n: Sequence[int], v):
        if sum(n) >= self.p ** self.level:
            raise LevelExceededError(f"|n| = {sum(n)} is not below p^level")
        v = tuple(v)
        for i, c in enumerate(n):
            if c:
                v = self.act_single(i, c, v)
        return v

    def action_matrix(self, n: Sequence[int]) -> PolyMatrix:
        e = identity(self.p, self.variables, self.rank)
        return from_columns([self.action(n, column(e, l)) for l in range(self.rank)])


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

@dataclass
class ValidationReport:
    checks: List[Tuple[str, bool, str]]
    frame: PolyMatrix
    frame_det: int

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.checks)


def validate(t: Tower) -> ValidationReport:
    checks = []
    for i, S in enumerate(t.sigmas):
        d = unit_det(S)
        if d is None:
            raise ValidationError(f"sigmas[{i}]: determinant {det(S)} is not a nonzero constant")
        checks.append((f"sigmas[{i}] unit determinant", True, f"det = {d}"))
    G = t.frame
    d = unit_det(G)
    if d is None:
        raise ValidationError("composite frame has a non-unit determinant")
    checks.append(("composite frame unit determinant", True, f"det = {d}"))
    return ValidationReport(checks, G, d)


def level1_connection(t: Tower) -> Connection:
    fiber = t.active_vars
    base = tuple(v for v in t.variables if v not in fiber)
    return connection_of_frame(t.sigmas[0], fiber, base)


def _mode_of(c: Connection) -> str:
    return "relative" if c.base_vars else "absolute"


def _check_descends(conn: Connection, level: int):
    if not is_flat(conn):
        if level == 0:
            raise FlatnessError("connection is not integrable")
        raise StratificationObstruction(level, "induced connection is not integrable")
    psi = p_curvature(conn)
    if not all(is_zero_matrix(m) for m in psi):
        shown = "; ".join(str(matrix_str(m)) for m in psi)
        raise StratificationObstruction(level, f"p-curvature is nonzero: {shown}")


def descend_tower(source, levels: int, max_degree: Optional[int] = None) -> Tower:
    """Iterated Cartier descent.

    ``source`` is a Connection (levels above the first are then extended by
    identities) or a Stratification of level >= ``levels``.  At each step the
    operators D_{p^{j+1} e_i} are conjugated into the new frame to give the
    stratification on the descended module.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if isinstance(source, Connection):
        _check_descends(source, 0)
        frame = cartier_descent(source, max_degree)
        variables = source.variables
        sig = [frame.G] + [identity(source.p, variables, source.rank)] * (levels - 1)
        return Tower(source.p, source.fiber_vars, source.base_vars, _mode_of(source), source.rank, tuple(sig))
    strat: Stratification = source.truncate(levels)
    p, active = strat.p, strat.active_positions
    sigmas = []
    current = strat
    for i in range(levels):
        conn = current.connection()
        _check_descends(conn, i)
        frame = cartier_descent(conn, max_degree)
        sigmas.append(frame.G)
        if i == levels - 1:
            break
        G = frame.G
        Ginv = inverse_unit(G, "descent frame")
        gens = {}
        for a in range(len(active)):
            for j in range(current.level - 1):
                cols = [current.act_single(a, p ** (j + 1), column(G, k)) for k in range(current.rank)]
                B = mat_mul(Ginv, from_columns(cols))
                if not in_frobenius_image(B, active):
                    raise StratificationObstruction(i + 1, "higher operators do not preserve the descent")
                gens[(a, j)] = mat_frobenius_inverse(B, active)
        current = Stratification(p, strat.fiber_vars, strat.base_vars, strat.mode, strat.rank,
                                 current.level - 1, gens)
    tower = Tower(p, strat.fiber_vars, strat.base_vars, strat.mode, strat.rank, tuple(sigmas))
    if tower.stratification(levels).generators != strat.generators:
        raise StratificationObstruction(levels, "input generators do not form a stratification")
    return tower


@dataclass
class TruncatedH0:
    level: int
    degree_cap: int
    basis: List[Tuple[Poly, ...]]

    @property
    def dimension(self) -> int:
        return len(self.basis)


def truncated_h0(t: Tower, level: int, degree_cap: int) -> TruncatedH0:
    """{v : deg v <= D, nabla(D_n) v = 0 for 0 < |n| < p^L}, reduced echelon basis."""
    if level > t.length:
        raise LevelExceededError(f"level {level} exceeds tower length {t.length}")
    if level < 0 or degree_cap < 0:
        raise ValueError("level and degree cap must be non-negative")
    Ginv, G = t.frame_inverse, t.frame
    inv_cols = [column(Ginv, l) for l in range(t.rank)]
    maps = []
    for a in range(len(t.active_positions)):
        for j in range(level):
            full = t.full_index(unit_index(len(t.active_positions), a, t.p ** j))

            def fn(m, l, full=full):
                xm = Poly(t.p, t.variables, {m: 1}, _clean=True)
                w = tuple((xm * f).hasse(full) if f.terms else f for f in inv_cols[l])
                return mat_vec(G, w)
            maps.append(fn)
    monos = monomials_up_to(len(t.variables), degree_cap)
    vectors, _, _ = truncated_kernel(t.p, t.variables, t.rank, monos, maps)
    return TruncatedH0(level, degree_cap, vectors)


def _check_compatible(a: Tower, b: Tower):
    if a.p != b.p or a.variables != b.variables or a.fiber_vars != b.fiber_vars:
        raise ModeError("towers live over different primes or variables")
    if a.mode != b.mode:
        raise ModeError("absolute and relative towers cannot be combined")


def tensor(a: Tower, b: Tower) -> Tower:
    _check_compatible(a, b)
    if a.length != b.length:
        raise ModeError("towers have different lengths")
    sig = tuple(kron(x, y) for x, y in zip(a.sigmas, b.sigmas))
    return Tower(a.p, a.fiber_vars, a.base_vars, a.mode, a.rank * b.rank, sig)


def dual(a: Tower) -> Tower:
    sig = tuple(transpose(inverse_unit(S, f"sigmas[{i}]")) for i, S in enumerate(a.sigmas))
    return Tower(a.p, a.fiber_vars, a.base_vars, a.mode, a.rank, sig)


def identity_section(rank: int, p: int, variables) -> Tuple[Poly, ...]:
    """sum_i e_i^* (x) e_i in the Kronecker basis of dual(E) (x) E."""
    one, zero = Poly.const(p, variables, 1), Poly.zero(p, variables)
    return tuple(one if i == j else zero for i in range(rank) for j in range(rank))


# --------------------------------------------------------------------------
# isomorphism search
# --------------------------------------------------------------------------

def _split_image(K: PolyMatrix, positions):
    """(phi^{-1} of the Frobenius-image part, coefficients of the rest)."""
    p = K[0][0].p
    image_rows, rest = [], {}
    for r, row in enumerate(K):
        new_row = []
        for c, f in enumerate(row):
            good = {}
            for e, v in f.terms.items():
                if all(e[i] % p == 0 for i in positions):
                    good[tuple(x // p if i in positions else x for i, x in enumerate(e))] = v
                else:
                    rest[(r, c, e)] = v
            new_row.append(Poly(p, f.vars, good, _clean=True))
        image_rows.append(tuple(new_row))
    return tuple(image_rows), rest


def _chain(a: Tower, b: Tower, H0: PolyMatrix, b_inv):
    """Propagate H_{i+1} = phi^{-1}(S_i^b^{-1} H_i S_i^a); return chain and violations."""
    chain = [H0]
    violations = {}
    H = H0
    for i in range(a.length):
        K = mat_mul(mat_mul(b_inv[i], H), a.sigmas[i])
        H, rest = _split_image(K, a.active_positions)
        for key, v in rest.items():
            violations[(i,) + key] = v
        chain.append(H)
    return chain, violations


def verify_gauge_witness(a: Tower, b: Tower, chain: Sequence[PolyMatrix]) -> bool:
    """H_i S_i^a == S_i^b phi(H_{i+1}) for all i, each H_i of unit determinant."""
    if len(chain) != a.length + 1:
        return False
    for i in range(a.length):
        lhs = mat_mul(chain[i], a.sigmas[i])
        rhs = mat_mul(b.sigmas[i], mat_frobenius(chain[i + 1], a.active_positions))
        if lhs != rhs:
            return False
    return all(unit_det(H) is not None for H in chain)


def gauge_equivalent(a: Tower, b: Tower, max_degree: int = 4, seed: int = 0):
    """Bounded search for an isomorphism chain (H_0, ..., H_l) from a to b.

    Returns the chain, or None when nothing is found within the degree bound.
    The valid H_0 of degree <= D form an F_p-space; candidates are tried in a
    fixed order (identity, basis vectors, exhaustive or seeded random
    combinations), deepening D from 0.
    """
    _check_compatible(a, b)
    if a.rank != b.rank or a.length != b.length:
        raise DimensionError("towers differ in rank or length")
    caps = current_caps()
    p, r = a.p, a.rank
    b_inv = [inverse_unit(S, f"sigmas[{i}]") for i, S in enumerate(b.sigmas)]
    rng = random.Random(seed)
    for D in range(max_degree + 1):
        monos = monomials_up_to(len(a.variables), D)
        unknowns = [(m, k, l) for m in monos for k in range(r) for l in range(r)]
        row_index = {}
        entries = []
        for col, (m, k, l) in enumerate(unknowns):
            rows = [[Poly.zero(p, a.variables)] * r for _ in range(r)]
            rows[k][l] = Poly(p, a.variables, {m: 1}, _clean=True)
            _, viol = _chain(a, b, tuple(tuple(x) for x in rows), b_inv)
            for key, v in viol.items():
                entries.append((row_index.setdefault(key, len(row_index)), col, v))
        M = np.zeros((len(row_index), len(unknowns)), dtype=np.int64)
        for i, j, v in entries:
            M[i, j] = (M[i, j] + v) % p
        space = nullspace(M, p, len(unknowns))
        if space.shape[0] == 0:
            continue

        def to_matrix(vec):
            rows = [[dict() for _ in range(r)] for _ in range(r)]
            for c, (m, k, l) in zip(vec, unknowns):
                if c % p:
                    rows[k][l][m] = int(c) % p
            return tuple(tuple(Poly(p, a.variables, t, _clean=True) for t in row) for row in rows)

        def candidates():
            ident = np.zeros(len(unknowns), dtype=np.int64)
            zero_m = (0,) * len(a.variables)
            for col, (m, k, l) in enumerate(unknowns):
                if m == zero_m and k == l:
                    ident[col] = 1
            yield ident
            yield from space
            dim = space.shape[0]
            if p ** dim <= caps.gauge_exhaustive_limit:
                for coeffs in itertools.product(range(p), repeat=dim):
                    if any(coeffs):
                        yield np.array(coeffs, dtype=np.int64).dot(space) % p
            else:
                for _ in range(caps.gauge_search_budget):
                    coeffs = np.array([rng.randrange(p) for _ in range(dim)], dtype=np.int64)
                    yield coeffs.dot(space) % p

        for vec in candidates():
            H0 = to_matrix(vec)
            if unit_det(H0) is None:
                continue
            chain, viol = _chain(a, b, H0, b_inv)
            if viol:
                continue
            if verify_gauge_witness(a, b, chain):
                return chain
    return None
