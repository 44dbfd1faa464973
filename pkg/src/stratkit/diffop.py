"""Divided-power differential operators in the left O-module basis D_n.

An operator is a finite sum ``sum_n c_n * D_n`` with polynomial coefficients on
the left.  Indices run over ``active_vars`` only; the remaining variables of
the ambient ring are constants for the operator (relative operators).
"""

from __future__ import annotations

from typing import Dict, Mapping, Sequence

from .arith import MultiIndex, Poly, binom_mod, index_add, index_sub, lucas_binomial, sub_indices
from .errors import DimensionError, UnknownVariableError


class DiffOperator:
    __slots__ = ("p", "vars", "active", "terms")

    def __init__(self, p: int, variables: Sequence[str], active_vars: Sequence[str],
                 terms: Mapping[MultiIndex, Poly] | None = None):
        self.p = p
        self.vars = tuple(variables)
        for name in active_vars:
            if name not in self.vars:
                raise UnknownVariableError(f"active variable {name!r} not among {self.vars}")
        self.active = tuple(active_vars)
        clean: Dict[MultiIndex, Poly] = {}
        for n, c in (terms or {}).items():
            n = tuple(n)
            if len(n) != len(self.active):
                raise DimensionError(f"operator index {n} does not match active variables {self.active}")
            if isinstance(c, int):
                c = Poly.const(p, self.vars, c)
            if c.vars != self.vars or c.p != p:
                raise DimensionError("coefficient lives in a different ring")
            if not c.is_zero():
                clean[n] = clean[n] + c if n in clean else c
                if clean[n].is_zero():
                    del clean[n]
        self.terms = clean

    # constructors -------------------------------------------------------
    @classmethod
    def basis(cls, p, variables, active_vars, n, coeff: Poly | int = 1):
        return cls(p, variables, active_vars, {tuple(n): coeff})

    @classmethod
    def mult(cls, a: Poly, active_vars):
        """The order-0 operator t_a."""
        return cls(a.p, a.vars, active_vars, {(0,) * len(tuple(active_vars)): a})

    @classmethod
    def zero(cls, p, variables, active_vars):
        return cls(p, variables, active_vars, {})

    def _full(self, n: MultiIndex) -> MultiIndex:
        full = [0] * len(self.vars)
        for name, x in zip(self.active, n):
            full[self.vars.index(name)] = x
        return tuple(full)

    def _check(self, other):
        if (self.p, self.vars, self.active) != (other.p, other.vars, other.active):
            raise DimensionError("operators act on different rings or variable sets")

    # algebra ------------------------------------------------------------
    def apply(self, f: Poly) -> Poly:
        if f.vars != self.vars or f.p != self.p:
            raise DimensionError("polynomial and operator live in different rings")
        acc = Poly.zero(self.p, self.vars)
        for n, c in self.terms.items():
            acc = acc + c * f.hasse(self._full(n))
        return acc

    __call__ = apply

    def __add__(self, other: "DiffOperator") -> "DiffOperator":
        self._check(other)
        terms = dict(self.terms)
        for n, c in other.terms.items():
            terms[n] = terms[n] + c if n in terms else c
        return DiffOperator(self.p, self.vars, self.active, terms)

    def __neg__(self):
        return DiffOperator(self.p, self.vars, self.active, {n: -c for n, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a: Poly | int) -> "DiffOperator":
        """Left multiplication by a function."""
        return DiffOperator(self.p, self.vars, self.active, {n: c * a for n, c in self.terms.items()})

    def compose(self, other: "DiffOperator") -> "DiffOperator":
        """self o other, renormalized to the left basis.

        Uses D_u o t_d = sum_{v+w=u} t_{D_v d} D_w and D_w D_n = C(w+n, n) D_{w+n}.
        """
        self._check(other)
        p = self.p
        out: Dict[MultiIndex, Poly] = {}
        for m, c in self.terms.items():
            for n, d in other.terms.items():
                for v in sub_indices(m):
                    dv = d.hasse(self._full(v))
                    if dv.is_zero():
                        continue
                    w = index_sub(m, v)
                    target = index_add(w, n)
                    b = lucas_binomial(target, n, p)
                    if not b:
                        continue
                    term = c * dv * b
                    out[target] = out[target] + term if target in out else term
        return DiffOperator(p, self.vars, self.active, out)

    __matmul__ = compose

    def commutator_with_mult(self, a: Poly) -> "DiffOperator":
        """[D, t_a] = D o t_a - t_a o D."""
        ta = DiffOperator.mult(a, self.active)
        return self.compose(ta) - ta.compose(self)

    def order(self):
        """max |n| over stored indices; None for the zero operator."""
        if not self.terms:
            return None
        return max(sum(n) for n in self.terms)

    def kills_one(self) -> bool:
        return self.apply(Poly.const(self.p, self.vars, 1)).is_zero()

    def __eq__(self, other):
        if not isinstance(other, DiffOperator):
            return NotImplemented
        return (self.p, self.vars, self.active, self.terms) == (other.p, other.vars, other.active, other.terms)

    def __hash__(self):
        return hash((self.p, self.vars, self.active, frozenset(self.terms.items())))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for n in sorted(self.terms, key=lambda n: (sum(n), n), reverse=True):
            c = self.terms[n]
            idx = "D[" + ",".join(str(x) for x in n) + "]"
            cs = str(c)
            if cs == "1":
                parts.append(idx)
            elif len(c.terms) > 1:
                parts.append(f"({cs})*{idx}")
            else:
                parts.append(f"{cs}*{idx}")
        return " + ".join(parts)

    def __repr__(self):
        return f"DiffOperator({str(self)!r}, active={self.active})"


def apply(op: DiffOperator, f: Poly) -> Poly:
    return op.apply(f)


def compose(a: DiffOperator, b: DiffOperator) -> DiffOperator:
    return a.compose(b)


def commutator_with_mult(op: DiffOperator, a: Poly) -> DiffOperator:
    return op.commutator_with_mult(a)


def order(op: DiffOperator):
    return op.order()


def frobenius_lift(derivation: DiffOperator) -> DiffOperator:
    """For D = sum a_i d/dx_i, the order-p operator sum a_i^p D_(p e_i).

    It satisfies D'(a^p) = D(a)^p and is the representative used to build the
    connection on the first Frobenius descent.
    """
    p = derivation.p
    k = len(derivation.active)
    terms = {}
    for n, c in derivation.terms.items():
        if sum(n) != 1:
            raise ValueError("frobenius_lift expects a derivation without order-0 part")
        i = n.index(1)
        terms[tuple(p if j == i else 0 for j in range(k))] = c ** p
    return DiffOperator(p, derivation.vars, derivation.active, terms)


def factorial_mod(n: int, p: int) -> int:
    out = 1
    for k in range(2, n + 1):
        out = out * k % p
    return out


__all__ = [
    "DiffOperator", "apply", "compose", "commutator_with_mult", "order",
    "frobenius_lift", "factorial_mod", "binom_mod",
]
