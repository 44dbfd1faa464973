"""Prime fields, multi-indices with Lucas binomials, sparse polynomials over F_p.

Field elements are plain ``int`` residues in ``[0, p)``.  Multi-indices are
tuples of non-negative ints.  ``Poly`` is an immutable sparse map from
exponent tuples to nonzero residues over a fixed ordered variable list.
"""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Dict, Iterable, Mapping, Sequence, Tuple

from .config import current_caps
from .errors import DimensionError, ParseError, UnknownVariableError, ValidationError

MultiIndex = Tuple[int, ...]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def check_prime(p: int, max_prime: int | None = None) -> int:
    if max_prime is None:
        max_prime = current_caps().max_prime
    if not isinstance(p, int) or not is_prime(p):
        raise ValidationError(f"p={p!r} is not a prime")
    if p > max_prime:
        raise ValidationError(f"p={p} exceeds the configured bound {max_prime}")
    return p


def inv_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError("0 has no inverse mod p")
    return pow(a, p - 2, p)


@lru_cache(maxsize=None)
def binom_mod(m: int, n: int, p: int) -> int:
    """C(m, n) mod p by Lucas' theorem (base-p digits)."""
    if n < 0 or n > m:
        return 0
    result = 1
    while n:
        mi, ni = m % p, n % p
        if ni > mi:
            return 0
        # small digits: exact binomial is fine
        c = 1
        for k in range(ni):
            c = c * (mi - k) // (k + 1)
        result = result * c % p
        m //= p
        n //= p
    return result


def lucas_binomial(m: Sequence[int], n: Sequence[int], p: int) -> int:
    if len(m) != len(n):
        raise DimensionError(f"multi-index lengths differ: {len(m)} vs {len(n)}")
    result = 1
    for mi, ni in zip(m, n):
        result = result * binom_mod(mi, ni, p) % p
        if not result:
            return 0
    return result


def index_le(a: Sequence[int], b: Sequence[int]) -> bool:
    return all(x <= y for x, y in zip(a, b))


def index_add(a: Sequence[int], b: Sequence[int]) -> MultiIndex:
    return tuple(x + y for x, y in zip(a, b))


def index_sub(a: Sequence[int], b: Sequence[int]) -> MultiIndex:
    return tuple(x - y for x, y in zip(a, b))


def unit_index(k: int, i: int, scale: int = 1) -> MultiIndex:
    return tuple(scale if j == i else 0 for j in range(k))


def sub_indices(n: Sequence[int]):
    """All b <= n componentwise, in lexicographic order."""
    if not n:
        yield ()
        return
    for head in range(n[0] + 1):
        for tail in sub_indices(n[1:]):
            yield (head,) + tail


def monomials_up_to(k: int, degree: int):
    """Exponent tuples in k variables of total degree <= degree, graded-lex ascending."""
    out = []

    def rec(prefix, left, slots):
        if slots == 1:
            out.append(prefix + (left,))
            return
        for e in range(left, -1, -1):
            rec(prefix + (e,), left - e, slots - 1)

    for d in range(degree + 1):
        if k == 0:
            if d == 0:
                out.append(())
            continue
        block = []
        saved = out
        out = block
        rec((), d, k)
        out = saved
        out.extend(sorted(block))
    return out


def grlex_key(e: MultiIndex):
    return (sum(e), e)


class Poly:
    """Sparse polynomial over F_p in an ordered list of variables."""

    __slots__ = ("p", "vars", "terms", "_hash")

    def __init__(self, p: int, variables: Sequence[str], terms: Mapping[MultiIndex, int] | None = None, *, _clean=False):
        self.p = p
        self.vars = tuple(variables)
        if _clean:
            self.terms = terms
        else:
            clean: Dict[MultiIndex, int] = {}
            k = len(self.vars)
            for e, c in (terms or {}).items():
                e = tuple(e)
                if len(e) != k:
                    raise DimensionError(f"exponent {e} does not match variables {self.vars}")
                c %= p
                if c:
                    clean[e] = c
            self.terms = clean
        self._hash = None

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, p, variables):
        return cls(p, variables, {}, _clean=True)

    @classmethod
    def const(cls, p, variables, c):
        c %= p
        return cls(p, variables, {(0,) * len(tuple(variables)): c} if c else {}, _clean=True)

    @classmethod
    def var(cls, p, variables, name):
        variables = tuple(variables)
        if name not in variables:
            raise UnknownVariableError(f"unknown variable {name!r}")
        i = variables.index(name)
        return cls(p, variables, {unit_index(len(variables), i): 1}, _clean=True)

    @classmethod
    def monomial(cls, p, variables, exps, c=1):
        return cls(p, variables, {tuple(exps): c})

    def _like(self, terms):
        return Poly(self.p, self.vars, terms, _clean=True)

    def _check(self, other: "Poly"):
        if self.vars != other.vars or self.p != other.p:
            raise DimensionError(f"incompatible polynomial rings {self.vars}/{self.p} vs {other.vars}/{other.p}")

    def _coerce(self, other):
        if isinstance(other, Poly):
            self._check(other)
            return other
        if isinstance(other, int):
            return Poly.const(self.p, self.vars, other)
        return NotImplemented

    # predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> int:
        return self.terms.get((0,) * len(self.vars), 0)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, positions: Iterable[int]) -> int:
        positions = tuple(positions)
        return max((sum(e[i] for i in positions) for e in self.terms), default=-1)

    # arithmetic -------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = (out.get(e, 0) + c) % p
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return self._like(out)

    __radd__ = __add__

    def __neg__(self):
        p = self.p
        return self._like({e: p - c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def scale(self, c: int) -> "Poly":
        c %= self.p
        if not c:
            return self._like({})
        p = self.p
        return self._like({e: v * c % p for e, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        p = self.p
        out: Dict[MultiIndex, int] = {}
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        for e1, c1 in b.items():
            for e2, c2 in a.items():
                e = tuple([x + y for x, y in zip(e1, e2)])
                out[e] = (out.get(e, 0) + c1 * c2) % p
        return self._like({e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power")
        result = Poly.const(self.p, self.vars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = Poly.const(self.p, self.vars, other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.p == other.p and self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.p, self.vars, frozenset(self.terms.items())))
        return self._hash

    # calculus on exponents -------------------------------------------
    def hasse(self, n: Sequence[int]) -> "Poly":
        """Divided-power derivative D_n: x^m -> C(m, n) x^(m-n), n over all variables."""
        n = tuple(n)
        if len(n) != len(self.vars):
            raise DimensionError("operator index length does not match variables")
        if not any(n):
            return self
        p = self.p
        out = {}
        for e, c in self.terms.items():
            b = lucas_binomial(e, n, p)
            if b:
                ne = tuple(x - y for x, y in zip(e, n))
                out[ne] = (out.get(ne, 0) + b * c) % p
        return self._like({e: c for e, c in out.items() if c})

    def derivative(self, i: int) -> "Poly":
        return self.hasse(unit_index(len(self.vars), i))

    def frobenius(self, positions: Iterable[int], times: int = 1) -> "Poly":
        """Multiply exponents at ``positions`` by p**times (coefficients unchanged)."""
        positions = set(positions)
        q = self.p ** times
        return self._like({tuple(x * q if i in positions else x for i, x in enumerate(e)): c
                           for e, c in self.terms.items()})

    def in_frobenius_image(self, positions: Iterable[int]) -> bool:
        positions = tuple(positions)
        p = self.p
        return all(e[i] % p == 0 for e in self.terms for i in positions)

    def frobenius_inverse(self, positions: Iterable[int]) -> "Poly":
        positions = set(positions)
        p = self.p
        out = {}
        for e, c in self.terms.items():
            ne = []
            for i, x in enumerate(e):
                if i in positions:
                    if x % p:
                        raise ValueError("polynomial is not in the Frobenius image")
                    x //= p
                ne.append(x)
            out[tuple(ne)] = c
        return self._like(out)

    def substitute(self, values: Mapping[int, int]) -> "Poly":
        """Substitute field values at the given variable positions (variables kept)."""
        p = self.p
        out = {}
        for e, c in self.terms.items():
            ne = list(e)
            for i, v in values.items():
                c = c * pow(v, e[i], p) % p
                ne[i] = 0
            if c:
                ne = tuple(ne)
                out[ne] = (out.get(ne, 0) + c) % p
        return self._like({e: c for e, c in out.items() if c})

    def eval_partial(self, assignments: Mapping[str, int]) -> "Poly":
        values = {}
        for name, v in assignments.items():
            if name not in self.vars:
                raise UnknownVariableError(f"unknown variable {name!r}")
            values[self.vars.index(name)] = v % self.p
        return self.substitute(values)

    def with_vars(self, new_vars: Sequence[str]) -> "Poly":
        """Re-embed into another variable list; dropped variables must not occur."""
        new_vars = tuple(new_vars)
        if new_vars == self.vars:
            return self
        where = []
        for i, name in enumerate(self.vars):
            if name in new_vars:
                where.append(new_vars.index(name))
            else:
                where.append(None)
        k = len(new_vars)
        out = {}
        for e, c in self.terms.items():
            ne = [0] * k
            for i, x in enumerate(e):
                if x:
                    if where[i] is None:
                        raise UnknownVariableError(f"variable {self.vars[i]!r} not in {new_vars}")
                    ne[where[i]] = x
            out[tuple(ne)] = c
        return Poly(self.p, new_vars, out, _clean=True)

    def uses_only(self, positions: Iterable[int]) -> bool:
        allowed = set(positions)
        return all(not x or i in allowed for e in self.terms for i, x in enumerate(e))

    def leading_term(self):
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    def divmod(self, g: "Poly"):
        """Multivariate division by a single divisor in graded-lex order."""
        self._check(g)
        if g.is_zero():
            raise ZeroDivisionError("division by zero polynomial")
        ge, gc = g.leading_term()
        ginv = inv_mod(gc, self.p)
        q, r = {}, dict(self.terms)
        rem = {}
        p = self.p
        while r:
            e = max(r, key=grlex_key)
            c = r[e]
            if all(x >= y for x, y in zip(e, ge)):
                qe = tuple(x - y for x, y in zip(e, ge))
                qc = c * ginv % p
                q[qe] = (q.get(qe, 0) + qc) % p
                for te, tc in g.terms.items():
                    ne = tuple(x + y for x, y in zip(te, qe))
                    v = (r.get(ne, 0) - qc * tc) % p
                    if v:
                        r[ne] = v
                    else:
                        r.pop(ne, None)
            else:
                rem[e] = c
                del r[e]
        return self._like({e: c for e, c in q.items() if c}), self._like(rem)

    def exact_div(self, g: "Poly") -> "Poly | None":
        q, r = self.divmod(g)
        return q if r.is_zero() else None

    # printing ---------------------------------------------------------
    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: grlex_key(t[0]), reverse=True)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.sorted_terms():
            factors = []
            for name, x in zip(self.vars, e):
                if x == 1:
                    factors.append(name)
                elif x > 1:
                    factors.append(f"{name}^{x}")
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            else:
                parts.append(f"{c}*" + "*".join(factors))
        return " + ".join(parts)

    def __repr__(self):
        return f"Poly({str(self)!r}, p={self.p}, vars={self.vars})"


_FACTOR = re.compile(r"^(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)(?:\^(\d+))?)$")


def parse_poly(text: str, variables: Sequence[str], p: int) -> Poly:
    """Parse ``1 + 2*x1^3*s``; coefficients are reduced mod p."""
    variables = tuple(variables)
    src = "".join(str(text).split())
    if not src:
        raise ParseError("empty polynomial string")
    k = len(variables)
    out: Dict[MultiIndex, int] = {}
    for term in src.split("+"):
        if not term:
            raise ParseError(f"empty term in {text!r}")
        coeff = 1
        exps = [0] * k
        for factor in term.split("*"):
            m = _FACTOR.match(factor)
            if not m:
                raise ParseError(f"bad factor {factor!r} in {text!r}")
            if m.group(1) is not None:
                coeff *= int(m.group(1))
                continue
            name = m.group(2)
            if name not in variables:
                raise UnknownVariableError(f"unknown variable {name!r} in {text!r}")
            exps[variables.index(name)] += int(m.group(3)) if m.group(3) else 1
        e = tuple(exps)
        out[e] = (out.get(e, 0) + coeff) % p
    return Poly(p, variables, out)


# functional aliases matching the operation names --------------------------

def poly_add(a: Poly, b: Poly) -> Poly:
    return a + b


def poly_mul(a: Poly, b: Poly) -> Poly:
    return a * b


def poly_scalar_mul(c: int, a: Poly) -> Poly:
    return a.scale(c)


def poly_eval_partial(f: Poly, assignments: Mapping[str, int]) -> Poly:
    return f.eval_partial(assignments)


def frobenius_substitute(f: Poly, twist_vars: Iterable[str]) -> Poly:
    positions = []
    for name in twist_vars:
        if name not in f.vars:
            raise UnknownVariableError(f"unknown variable {name!r}")
        positions.append(f.vars.index(name))
    return f.frobenius(positions)
