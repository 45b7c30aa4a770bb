"""Sparse polynomials in commuting and anticommuting variables.

A :class:`SuperPoly` lives on a space with ``nb`` even (polynomial)
variables and ``ng`` odd generators.  Terms are keyed by
``(exponents, generators)`` where ``exponents`` is a tuple of ``nb``
non-negative ints and ``generators`` is a strictly increasing tuple of odd
generator indices.  Coefficients are complex scalars (0-d arrays) or n x n
matrices; a scalar meeting a matrix is promoted to a multiple of the
identity.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable

import numpy as np

from .errors import ShapeMismatch

ZERO_TOL = 0.0


def _merge(a: tuple, b: tuple):
    """Sign and sorted union of two generator monomials; sign 0 if they overlap."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    sa = set(a)
    if sa.intersection(b):
        return 0, ()
    inversions = 0
    for j in b:
        inversions += sum(1 for i in a if i > j)
    return (-1 if inversions % 2 else 1), tuple(sorted(a + b))


def _cmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if x.ndim == 2 and y.ndim == 2:
        if x.shape[1] != y.shape[0]:
            raise ShapeMismatch(f"cannot multiply {x.shape} by {y.shape}")
        return x @ y
    return x * y


def _cadd(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    if x.shape == y.shape:
        return x + y
    if x.ndim == 0 and y.ndim == 2:
        return x * np.eye(y.shape[0]) + y
    if y.ndim == 0 and x.ndim == 2:
        return x + y * np.eye(x.shape[0])
    raise ShapeMismatch(f"cannot add {x.shape} and {y.shape}")


class SuperPoly:
    __slots__ = ("nb", "ng", "terms")

    def __init__(self, nb: int, ng: int, terms=None):
        self.nb = nb
        self.ng = ng
        self.terms = {}
        if terms:
            for key, c in terms.items():
                c = np.asarray(c, dtype=complex)
                if np.any(c != 0):
                    self.terms[key] = c

    # -- constructors -------------------------------------------------------
    @classmethod
    def zero(cls, nb: int, ng: int) -> "SuperPoly":
        return cls(nb, ng)

    @classmethod
    def const(cls, nb: int, ng: int, c) -> "SuperPoly":
        return cls(nb, ng, {((0,) * nb, ()): c})

    @classmethod
    def gen(cls, nb: int, ng: int, k: int, c=1.0) -> "SuperPoly":
        return cls(nb, ng, {((0,) * nb, (k,)): c})

    @classmethod
    def var(cls, nb: int, ng: int, j: int, c=1.0) -> "SuperPoly":
        e = [0] * nb
        e[j] = 1
        return cls(nb, ng, {(tuple(e), ()): c})

    @classmethod
    def monomial(cls, nb: int, ng: int, exps, gens, c=1.0) -> "SuperPoly":
        gens = tuple(gens)
        sign = 1
        if list(gens) != sorted(gens):
            out = SuperPoly.const(nb, ng, c)
            for g in gens:
                out = out * SuperPoly.gen(nb, ng, g)
            return out * SuperPoly.monomial(nb, ng, exps, ())
        return cls(nb, ng, {(tuple(exps), gens): sign * np.asarray(c, complex)})

    def like(self, terms=None) -> "SuperPoly":
        return SuperPoly(self.nb, self.ng, terms)

    # -- inspection ------------------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        parts = []
        for (e, g), c in sorted(self.terms.items()):
            parts.append(f"{c.tolist()}*x{list(e)}*th{list(g)}")
        return "SuperPoly(" + " + ".join(parts or ["0"]) + ")"

    def norm(self) -> float:
        return float(np.sqrt(sum(float(np.sum(np.abs(c) ** 2)) for c in self.terms.values())))

    def parity(self) -> int | None:
        """0 or 1 for homogeneous elements, None if mixed; zero counts as even."""
        ps = {len(g) % 2 for (_, g) in self.terms}
        if not ps:
            return 0
        return ps.pop() if len(ps) == 1 else None

    def grade(self, k: int) -> "SuperPoly":
        return self.like({key: c for key, c in self.terms.items() if len(key[1]) == k})

    def body(self) -> "SuperPoly":
        return self.grade(0)

    def max_grade(self) -> int:
        return max((len(g) for (_, g) in self.terms), default=0)

    def coeff_shape(self):
        shapes = {c.shape for c in self.terms.values()}
        mats = [s for s in shapes if len(s) == 2]
        return mats[0] if mats else ()

    def _check(self, other: "SuperPoly"):
        if (self.nb, self.ng) != (other.nb, other.ng):
            raise ShapeMismatch(f"space mismatch ({self.nb},{self.ng}) vs ({other.nb},{other.ng})")

    # -- arithmetic ---------------------------------------------------------------
    def _coerce(self, other) -> "SuperPoly":
        if isinstance(other, SuperPoly):
            self._check(other)
            return other
        return SuperPoly.const(self.nb, self.ng, other)

    def __add__(self, other) -> "SuperPoly":
        other = self._coerce(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = _cadd(out[key], c) if key in out else c
        return self.like(out)

    __radd__ = __add__

    def __neg__(self) -> "SuperPoly":
        return self.like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "SuperPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "SuperPoly":
        return self._coerce(other) - self

    def scale(self, s) -> "SuperPoly":
        s = np.asarray(s, complex)
        return self.like({k: _cmul(s, c) if s.ndim else s * c for k, c in self.terms.items()})

    def __mul__(self, other) -> "SuperPoly":
        if not isinstance(other, SuperPoly):
            other = np.asarray(other, complex)
            return self.like({k: _cmul(c, other) for k, c in self.terms.items()})
        self._check(other)
        out: dict = {}
        for (ea, ga), ca in self.terms.items():
            for (eb, gb), cb in other.terms.items():
                sign, g = _merge(ga, gb)
                if not sign:
                    continue
                e = tuple(i + j for i, j in zip(ea, eb))
                c = _cmul(ca, cb)
                if sign < 0:
                    c = -c
                key = (e, g)
                out[key] = _cadd(out[key], c) if key in out else c
        return self.like(out)

    def __rmul__(self, other) -> "SuperPoly":
        other = np.asarray(other, complex)
        return self.like({k: _cmul(other, c) for k, c in self.terms.items()})

    def __pow__(self, k: int) -> "SuperPoly":
        out = SuperPoly.const(self.nb, self.ng, 1.0)
        for _ in range(k):
            out = out * self
        return out

    def graded_commutator(self, other: "SuperPoly") -> "SuperPoly":
        pa, pb = self.parity(), other.parity()
        sign = -1 if (pa and pb) else 1
        return self * other - (other * self).scale(sign)

    # -- calculus ------------------------------------------------------------------
    def d_odd(self, k: int) -> "SuperPoly":
        """Left derivative with respect to odd generator k."""
        out: dict = {}
        for (e, g), c in self.terms.items():
            if k not in g:
                continue
            pos = g.index(k)
            key = (e, g[:pos] + g[pos + 1 :])
            val = -c if pos % 2 else c
            out[key] = _cadd(out[key], val) if key in out else val
        return self.like(out)

    def d_even(self, j: int) -> "SuperPoly":
        out: dict = {}
        for (e, g), c in self.terms.items():
            if e[j] == 0:
                continue
            e2 = list(e)
            e2[j] -= 1
            key = (tuple(e2), g)
            val = e[j] * c
            out[key] = _cadd(out[key], val) if key in out else val
        return self.like(out)

    # -- substitution ----------------------------------------------------------------
    def at_body(self, point) -> "SuperPoly":
        """Set every even variable to the given numbers; result has nb = 0."""
        point = np.asarray(point, complex).ravel()
        out: dict = {}
        for (e, g), c in self.terms.items():
            w = complex(np.prod([point[j] ** p for j, p in enumerate(e) if p]))
            if w == 0:
                continue
            key = ((), g)
            out[key] = _cadd(out[key], w * c) if key in out else w * c
        return SuperPoly(0, self.ng, out)

    def compose(self, even_subs, odd_subs) -> "SuperPoly":
        """Substitute even variable j by ``even_subs[j]`` and generator k by ``odd_subs[k]``.

        All substitutes must live on one common target space; even
        substitutes must be even and odd ones odd.
        """
        target = (even_subs[0] if even_subs else odd_subs[0])
        nb, ng = target.nb, target.ng
        one = SuperPoly.const(nb, ng, 1.0)
        pow_cache: dict = {}

        def power(j, p):
            if (j, p) not in pow_cache:
                pow_cache[(j, p)] = one if p == 0 else power(j, p - 1) * even_subs[j]
            return pow_cache[(j, p)]

        gen_cache: dict = {}

        def gens(g):
            if g not in gen_cache:
                gen_cache[g] = one if not g else gens(g[:-1]) * odd_subs[g[-1]]
            return gen_cache[g]

        out = SuperPoly.zero(nb, ng)
        for (e, g), c in self.terms.items():
            term = gens(g)
            for j, p in enumerate(e):
                if p:
                    term = power(j, p) * term
            out = out + term * c
        return out


def monomials(ng: int, max_degree: int) -> list:
    out = []
    for d in range(max_degree + 1):
        out.extend(combinations(range(ng), d))
    return out


def even_monomials(nb: int, max_degree: int) -> list:
    """Exponent tuples of total degree <= max_degree."""
    out = [()]
    for j in range(nb):
        out = [e + (p,) for e in out for p in range(max_degree + 1)]
    return sorted([e for e in out if sum(e) <= max_degree], key=lambda e: (sum(e), e))


def random_poly(rng, nb: int, ng: int, n_terms: int, max_gen_degree: int | None = None, shape=()) -> SuperPoly:
    """Sparse random element (used by property tests)."""
    max_gen_degree = ng if max_gen_degree is None else max_gen_degree
    terms = {}
    for _ in range(n_terms):
        d = int(rng.integers(0, max_gen_degree + 1))
        g = tuple(sorted(rng.choice(ng, size=d, replace=False).tolist())) if d else ()
        e = tuple(int(v) for v in rng.integers(0, 2, size=nb))
        c = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        terms[(e, g)] = c
    return SuperPoly(nb, ng, terms)


def sum_polys(polys: Iterable[SuperPoly], nb: int, ng: int) -> SuperPoly:
    out = SuperPoly.zero(nb, ng)
    for p in polys:
        out = out + p
    return out
