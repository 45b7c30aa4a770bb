"""Superspace C^{4|4N}: susy generators, superconnections and extended morphisms.

Coordinates on superspace are four even variables ``x^{a ad}`` (index
``2a + ad``) and ``4N`` odd generators ``theta^{i a}`` (index ``2i + a``) and
``thetabar_i^{ad}`` (index ``2N + 2i + ad``).  A super null line is
parameterised by ``(s, xi^i, xibar_i)``: one even and ``2N`` odd variables.

Everything here is polynomial in the even variables, so x-derivatives of
coefficients are exact.  Operators are first order, and operator identities
are decided on a test family of monomials (even degree <= 2 times odd degree
<= 2): a first-order operator is fixed by its action on 1 and on the
coordinates, and the quadratic monomials catch any stray second-order part.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import (
    FormViolation,
    IndexOutOfRange,
    NoSolution,
    ShapeMismatch,
    SingularMatrix,
)
from .grassmann import SuperPoly, even_monomials, monomials
from .morphism import CausalMorphism
from .report import record
from .spinor import EPS, NullLine, factor_null, outer, projective_distance

GrassmannPoly = SuperPoly


def gp_mul(a: SuperPoly, b: SuperPoly) -> SuperPoly:
    return a * b


def gp_add(a: SuperPoly, b: SuperPoly) -> SuperPoly:
    return a + b


def gp_derive(a: SuperPoly, gen_index: int) -> SuperPoly:
    if not 0 <= gen_index < a.ng:
        raise IndexOutOfRange(f"generator {gen_index} not in 0..{a.ng - 1}")
    return a.d_odd(gen_index)


# ---------------------------------------------------------------------------
# coordinate spaces


@dataclass(frozen=True)
class SuperSpace:
    N: int

    @property
    def nb(self) -> int:
        return 4

    @property
    def ng(self) -> int:
        return 4 * self.N

    def _check(self, i, a):
        if not (0 <= i < self.N and a in (0, 1)):
            raise IndexOutOfRange(f"index ({i}, {a}) out of range for N = {self.N}")

    @staticmethod
    def xi(a: int, ad: int) -> int:
        return 2 * a + ad

    def th(self, i: int, a: int) -> int:
        self._check(i, a)
        return 2 * i + a

    def tb(self, i: int, ad: int) -> int:
        self._check(i, ad)
        return 2 * self.N + 2 * i + ad

    def zero(self) -> SuperPoly:
        return SuperPoly.zero(self.nb, self.ng)

    def const(self, c) -> SuperPoly:
        return SuperPoly.const(self.nb, self.ng, c)

    def x(self, a: int, ad: int) -> SuperPoly:
        return SuperPoly.var(self.nb, self.ng, self.xi(a, ad))

    def theta(self, i: int, a: int) -> SuperPoly:
        return SuperPoly.gen(self.nb, self.ng, self.th(i, a))

    def thetabar(self, i: int, ad: int) -> SuperPoly:
        return SuperPoly.gen(self.nb, self.ng, self.tb(i, ad))


@dataclass(frozen=True)
class LineSpace:
    """Parameter space (s, xi^i, xibar_i) of a super null line."""

    N: int

    @property
    def nb(self) -> int:
        return 1

    @property
    def ng(self) -> int:
        return 2 * self.N

    def s(self) -> SuperPoly:
        return SuperPoly.var(1, self.ng, 0)

    def xi(self, i: int) -> SuperPoly:
        return SuperPoly.gen(1, self.ng, i)

    def xibar(self, i: int) -> SuperPoly:
        return SuperPoly.gen(1, self.ng, self.N + i)


# ---------------------------------------------------------------------------
# first-order operators


@dataclass(frozen=True)
class SuperVectorOp:
    """``sum_j bos[j] d/dx_j + sum_k odd[k] d/dtheta_k + mult``."""

    nb: int
    ng: int
    bos: tuple
    odd: tuple
    mult: SuperPoly
    parity: int

    def __post_init__(self):
        if len(self.bos) != self.nb or len(self.odd) != self.ng:
            raise ShapeMismatch("coefficient count does not match the space")
        for c in self.bos:
            _check_parity(c, self.parity, "even-direction coefficient")
        for c in self.odd:
            _check_parity(c, 1 - self.parity, "odd-direction coefficient")
        _check_parity(self.mult, self.parity, "multiplication part")

    def derive(self, p: SuperPoly) -> SuperPoly:
        out = SuperPoly.zero(self.nb, self.ng)
        for j, c in enumerate(self.bos):
            if c:
                out = out + c * p.d_even(j)
        for k, c in enumerate(self.odd):
            if c:
                out = out + c * p.d_odd(k)
        return out

    def apply(self, p: SuperPoly) -> SuperPoly:
        return self.derive(p) + self.mult * p

    def is_derivation(self) -> bool:
        return not self.mult

    def norm(self) -> float:
        return float(
            np.sqrt(sum(c.norm() ** 2 for c in self.bos + self.odd) + self.mult.norm() ** 2)
        )

    def __add__(self, other: "SuperVectorOp") -> "SuperVectorOp":
        if other.parity != self.parity:
            raise FormViolation("cannot add operators of different parity")
        return SuperVectorOp(
            self.nb,
            self.ng,
            tuple(a + b for a, b in zip(self.bos, other.bos)),
            tuple(a + b for a, b in zip(self.odd, other.odd)),
            self.mult + other.mult,
            self.parity,
        )

    def __sub__(self, other: "SuperVectorOp") -> "SuperVectorOp":
        return self + other.scale(-1.0)

    def scale(self, c) -> "SuperVectorOp":
        return SuperVectorOp(
            self.nb,
            self.ng,
            tuple(p.scale(c) for p in self.bos),
            tuple(p.scale(c) for p in self.odd),
            self.mult.scale(c),
            self.parity,
        )

    def with_mult(self, m: SuperPoly) -> "SuperVectorOp":
        return SuperVectorOp(self.nb, self.ng, self.bos, self.odd, self.mult + m, self.parity)


def _check_parity(p: SuperPoly, parity: int, what: str):
    if not p:
        return
    got = p.parity()
    if got is None or got != parity:
        raise FormViolation(f"{what} has parity {got}, expected {parity}")


def zero_op(nb: int, ng: int, parity: int) -> SuperVectorOp:
    z = SuperPoly.zero(nb, ng)
    return SuperVectorOp(nb, ng, (z,) * nb, (z,) * ng, z, parity)


def combine(terms, nb: int, ng: int, parity: int) -> SuperVectorOp:
    """Linear combination ``sum c * op`` with numeric c."""
    out = zero_op(nb, ng, parity)
    for c, op in terms:
        if c != 0:
            out = out + op.scale(c)
    return out


def graded_bracket(P: SuperVectorOp, Q: SuperVectorOp) -> SuperVectorOp:
    """``PQ - (-1)^{|P||Q|} QP`` as a first-order operator plus multiplication part."""
    if (P.nb, P.ng) != (Q.nb, Q.ng):
        raise ShapeMismatch("operators live on different spaces")
    s = -1.0 if (P.parity and Q.parity) else 1.0
    bos = tuple(P.derive(qb) - Q.derive(pb).scale(s) for pb, qb in zip(P.bos, Q.bos))
    odd = tuple(P.derive(qo) - Q.derive(po).scale(s) for po, qo in zip(P.odd, Q.odd))
    mult = P.derive(Q.mult) - Q.derive(P.mult).scale(s)
    if P.mult and Q.mult:
        mult = mult + P.mult * Q.mult - (Q.mult * P.mult).scale(s)
    return SuperVectorOp(P.nb, P.ng, bos, odd, mult, (P.parity + Q.parity) % 2)


def bracket_mult(P: SuperVectorOp, Q: SuperVectorOp) -> SuperPoly:
    """Multiplication part of ``graded_bracket(P, Q)`` alone."""
    s = -1.0 if (P.parity and Q.parity) else 1.0
    mult = P.derive(Q.mult) - Q.derive(P.mult).scale(s)
    if P.mult and Q.mult:
        mult = mult + P.mult * Q.mult - (Q.mult * P.mult).scale(s)
    return mult


def anticommutator(A: SuperVectorOp, B: SuperVectorOp) -> SuperVectorOp:
    """Graded bracket; for two odd operators this is ``AB + BA``."""
    return graded_bracket(A, B)


def susy_generator(kind: str, i: int, index: int, N: int) -> SuperVectorOp:
    """Flat generator ``q_{i a}`` (kind "q") or ``qbar^i_{ad}`` (kind "qbar")."""
    sp = SuperSpace(N)
    z = sp.zero()
    bos = [z] * 4
    odd = [z] * sp.ng
    if kind == "q":
        odd[sp.th(i, index)] = sp.const(1.0)
        for ad in (0, 1):
            bos[sp.xi(index, ad)] = sp.thetabar(i, ad).scale(1j)
    elif kind in ("qbar", "qt"):
        odd[sp.tb(i, index)] = sp.const(1.0)
        for a in (0, 1):
            bos[sp.xi(a, index)] = sp.theta(i, a).scale(1j)
    else:
        raise IndexOutOfRange(f"unknown generator kind {kind!r}")
    return SuperVectorOp(4, sp.ng, tuple(bos), tuple(odd), z, 1)


def x_derivative(a: int, ad: int, N: int) -> SuperVectorOp:
    sp = SuperSpace(N)
    z = sp.zero()
    bos = [z] * 4
    bos[sp.xi(a, ad)] = sp.const(1.0)
    return SuperVectorOp(4, sp.ng, tuple(bos), (z,) * sp.ng, z, 0)


# ---------------------------------------------------------------------------
# points, lines, connections


@dataclass(frozen=True)
class SuperPoint:
    """Numeric body ``x`` plus odd coordinates written in a fixed frame of generators.

    ``theta`` and ``thetabar`` are N x N mixing matrices: the point's odd
    coordinates are ``theta^{i a} = sum_j theta[i, j] eta^{j a}`` and
    ``thetabar_i^{ad} = sum_j thetabar[i, j] etabar_j^{ad}`` with generic
    generators ``eta``.  Identity matrices give the generic point itself.
    """

    x: np.ndarray
    theta: Optional[np.ndarray] = None
    thetabar: Optional[np.ndarray] = None

    def frames(self, N: int):
        R = np.eye(N, dtype=complex) if self.theta is None else np.asarray(self.theta, complex)
        Rt = np.eye(N, dtype=complex) if self.thetabar is None else np.asarray(self.thetabar, complex)
        if R.shape != (N, N) or Rt.shape != (N, N):
            raise ShapeMismatch(f"odd frames must be {N}x{N}")
        return R, Rt

    def odd_subs(self, N: int) -> list:
        sp = SuperSpace(N)
        R, Rt = self.frames(N)
        subs = [None] * sp.ng
        for i in range(N):
            for a in (0, 1):
                subs[sp.th(i, a)] = _lin(sp, [(R[i, j], sp.th(j, a)) for j in range(N)], nb=0)
                subs[sp.tb(i, a)] = _lin(sp, [(Rt[i, j], sp.tb(j, a)) for j in range(N)], nb=0)
        return subs

    def evaluate(self, p: SuperPoly, N: int) -> SuperPoly:
        """Value at this point: even variables set to ``x``, odd ones rotated."""
        return p.at_body(np.asarray(self.x, complex)).compose([], self.odd_subs(N))

    def tau_equal(self, other: "SuperPoint", N: int, tol: float = 1e-12) -> bool:
        R1, T1 = self.frames(N)
        R2, T2 = other.frames(N)
        return bool(
            np.allclose(self.x, other.x, atol=tol) and np.allclose(R1.T @ T1, R2.T @ T2, atol=tol)
        )


def same_tau_point(x, R) -> SuperPoint:
    """Point with body x whose odd frame is rotated by R while tau is unchanged."""
    R = np.asarray(R, complex)
    return SuperPoint(np.asarray(x, complex), R, np.linalg.inv(R).T)


def _lin(sp, pairs, nb=None) -> SuperPoly:
    nb = sp.nb if nb is None else nb
    return SuperPoly(nb, sp.ng, {((0,) * nb, (g,)): c for c, g in pairs if c != 0})


@dataclass(frozen=True)
class SuperNullLine:
    base: SuperPoint
    dir_l: np.ndarray
    dir_r: np.ndarray

    def body(self) -> NullLine:
        return NullLine(np.asarray(self.base.x, complex), self.dir_l, self.dir_r)

    def point(self, s) -> np.ndarray:
        return self.body().point(s)


def line_embedding(L: SuperNullLine, N: int) -> list:
    """Components of the line as polynomials in (s, xi, xibar), superspace order."""
    sp, ls = SuperSpace(N), LineSpace(N)
    lam, lt = np.asarray(L.dir_l, complex), np.asarray(L.dir_r, complex)
    x0 = np.asarray(L.base.x, complex)
    out = [None] * (4 + sp.ng)
    for a in (0, 1):
        for ad in (0, 1):
            out[sp.xi(a, ad)] = ls.s().scale(lam[a] * lt[ad]) + x0[a, ad]
    for i in range(N):
        for a in (0, 1):
            out[4 + sp.th(i, a)] = ls.xi(i).scale(lam[a])
            out[4 + sp.tb(i, a)] = ls.xibar(i).scale(lt[a])
    return out


@dataclass
class SuperConnection:
    N: int
    n: int
    omega: list  # [i][a]
    omegabar: list  # [i][ad]
    a: list  # [a][ad]

    def components(self) -> list:
        out = [self.a[a][ad] for a in (0, 1) for ad in (0, 1)]
        out += [self.omega[i][a] for i in range(self.N) for a in (0, 1)]
        out += [self.omegabar[i][ad] for i in range(self.N) for ad in (0, 1)]
        return out


def flat_connection(N: int, n: int = 1) -> SuperConnection:
    z = SuperSpace(N).zero()
    return SuperConnection(
        N, n, [[z, z] for _ in range(N)], [[z, z] for _ in range(N)], [[z, z], [z, z]]
    )


def random_connection(N: int, seed: int = 0, scale: float = 0.5) -> SuperConnection:
    """Abelian superconnection with random odd-linear omega terms (not integrable)."""
    rng = np.random.default_rng(seed)
    sp = SuperSpace(N)
    phi = flat_connection(N)

    def rnd_odd():
        p = sp.zero()
        for k in range(sp.ng):
            c = scale * complex(rng.normal(), rng.normal())
            p = p + sp.const(1.0).scale(c) * SuperPoly.gen(4, sp.ng, k) * (
                sp.const(1.0) + sp.x(int(rng.integers(2)), int(rng.integers(2)))
            )
        return p

    phi.omega = [[rnd_odd(), rnd_odd()] for _ in range(N)]
    return phi


def covariant_line_ops(phi: SuperConnection, lam, lt):
    """``(T_i, Tbar^i, D)`` for a super null line with directions (lam, lt)."""
    N = phi.N
    sp = SuperSpace(N)
    lam, lt = np.asarray(lam, complex), np.asarray(lt, complex)
    T = []
    Tb = []
    for i in range(N):
        T.append(
            combine(
                [(lam[a], susy_generator("q", i, a, N).with_mult(phi.omega[i][a])) for a in (0, 1)],
                4, sp.ng, 1,
            )
        )
        Tb.append(
            combine(
                [(lt[ad], susy_generator("qbar", i, ad, N).with_mult(phi.omegabar[i][ad])) for ad in (0, 1)],
                4, sp.ng, 1,
            )
        )
    D = combine(
        [
            (lam[a] * lt[ad], x_derivative(a, ad, N).with_mult(phi.a[a][ad]))
            for a in (0, 1)
            for ad in (0, 1)
        ],
        4, sp.ng, 0,
    )
    return T, Tb, D


def line_relations(phi: SuperConnection, lam, lt) -> list:
    """Operators that vanish on every line through an integrable superconnection."""
    T, Tb, D = covariant_line_ops(phi, lam, lt)
    N = phi.N
    out = []
    for i in range(N):
        for j in range(i, N):
            out.append((f"TT[{i},{j}]", anticommutator(T[i], T[j])))
            out.append((f"TbTb[{i},{j}]", anticommutator(Tb[i], Tb[j])))
    for i in range(N):
        for j in range(N):
            r = anticommutator(T[i], Tb[j])
            if i == j:
                r = r - D.scale(2j)
            out.append((f"TTb[{i},{j}]", r))
    return out


@lru_cache(maxsize=8)
def test_family(N: int, degree: int = 2) -> tuple:
    sp = SuperSpace(N)
    return tuple(
        SuperPoly(4, sp.ng, {(e, g): 1.0})
        for e in even_monomials(4, degree)
        for g in monomials(sp.ng, degree)
    )


def _dense(polys: list) -> np.ndarray:
    """Stack nb = 0 polynomials as rows over their common generator keys."""
    n = max((c.shape[0] for p in polys for c in p.terms.values() if c.ndim == 2), default=0)
    keys: dict = {}
    for p in polys:
        for key in p.terms:
            keys.setdefault(key, len(keys))
    width = max(n * n, 1)
    out = np.zeros((len(polys), len(keys), width), complex)
    for r, p in enumerate(polys):
        for key, c in p.terms.items():
            if n and c.ndim == 0:
                c = c * np.eye(n)
            out[r, keys[key]] = np.ravel(c)
    return out.reshape(len(polys), -1)


def op_residual_at(op: SuperVectorOp, x0, family) -> float:
    """Largest norm of ``op(psi)`` at body point x0 over the test family.

    Family members are monomials ``x^e theta^g``; for a first-order operator
    ``op(psi)(x0) = sum_j e_j x0^(e - 1_j) c_j theta^g + x0^e (m theta^g +
    sum_k c_k d_k theta^g)``, so the odd products are formed once per g.
    """
    x0 = np.asarray(x0, complex).ravel()
    ng = op.ng
    bos = [c.at_body(x0) for c in op.bos]
    odd = [(k, c.at_body(x0)) for k, c in enumerate(op.odd) if c]
    mult = op.mult.at_body(x0)
    by_g: dict = {}
    for psi in family:
        (e, g), = psi.terms.keys()
        by_g.setdefault(g, []).append(e)
    worst = 0.0
    for g, exps in by_g.items():
        mono = SuperPoly(0, ng, {((), g): 1.0})
        rest = mult * mono
        for k, c in odd:
            d = mono.d_odd(k)
            if d:
                rest = rest + c * d
        rows = _dense([c * mono for c in bos] + [rest])
        if rows.shape[1] == 0:
            continue
        weights = np.zeros((len(exps), 5), complex)
        for r, e in enumerate(exps):
            e = np.asarray(e)
            weights[r, 4] = np.prod(x0 ** e)
            for j in range(4):
                if e[j]:
                    e2 = e.copy()
                    e2[j] -= 1
                    weights[r, j] = e[j] * np.prod(x0 ** e2)
        worst = max(worst, float(np.max(np.linalg.norm(weights @ rows, axis=1))))
    return worst


def line_integrability_residual(phi: SuperConnection, L: SuperNullLine, samples, degree: int = 2) -> float:
    """Max over sample parameters s and relations of the relation operators on the test family."""
    family = test_family(phi.N, degree)
    rels = line_relations(phi, L.dir_l, L.dir_r)
    worst = 0.0
    for s in np.atleast_1d(samples):
        x0 = L.point(complex(s))
        for _, op in rels:
            worst = max(worst, op_residual_at(op, x0, family))
    return worst


# ---------------------------------------------------------------------------
# prolongation of super null curves


@dataclass
class MMatrices:
    M: list
    Mbar: list

    def product_residual(self) -> float:
        """``max_{i,k} |sum_j M[i][j] Mbar[k][j] - delta_ik|``."""
        N = len(self.M)
        worst = 0.0
        for i in range(N):
            for k in range(N):
                acc = self.M[i][0] * self.Mbar[k][0]
                for j in range(1, N):
                    acc = acc + self.M[i][j] * self.Mbar[k][j]
                worst = max(worst, (acc - (1.0 if i == k else 0.0)).norm())
        return worst


@dataclass
class SuperProlongation:
    lam: np.ndarray
    lt: np.ndarray
    mm: MMatrices
    residual: float


def line_ops(N: int):
    """``(d_s, q_i, qbar^i)`` on the line parameter space."""
    ls = LineSpace(N)
    z = SuperPoly.zero(1, ls.ng)
    one = SuperPoly.const(1, ls.ng, 1.0)
    ds = SuperVectorOp(1, ls.ng, (one,), (z,) * ls.ng, z, 0)
    q, qb = [], []
    for i in range(N):
        odd = [z] * ls.ng
        odd[i] = one
        q.append(SuperVectorOp(1, ls.ng, (ls.xibar(i).scale(1j),), tuple(odd), z, 1))
        odd = [z] * ls.ng
        odd[N + i] = one
        qb.append(SuperVectorOp(1, ls.ng, (ls.xi(i).scale(1j),), tuple(odd), z, 1))
    return ds, q, qb


def super_prolong(chi: list, N: int, s0: float = 0.0, tol: float = 1e-8, strict: bool = False) -> SuperProlongation:
    """Fibre spinors and M matrices of a super null curve at parameter s0.

    ``chi`` lists the 4 + 4N superspace components as polynomials on the
    line space.  The reported residual is the mismatch between the pushed
    operators and ``(D, M T, Mbar Tbar)`` of the tangent line.
    """
    sp = SuperSpace(N)
    ds, q, qb = line_ops(N)
    pt = [s0]
    at = [c.at_body(pt) for c in chi]
    push_s = [ds.derive(c).at_body(pt) for c in chi]
    v = np.array([[_body(push_s[sp.xi(a, ad)]) for ad in (0, 1)] for a in (0, 1)])
    lam, lt = factor_null(v, tol=tol)
    res = 0.0
    for a in (0, 1):
        for ad in (0, 1):
            res = max(res, (push_s[sp.xi(a, ad)] - lam[a] * lt[ad]).norm())
    for k in range(sp.ng):
        res = max(res, push_s[4 + k].norm())

    p = int(np.argmax(np.abs(lam)))
    pp = int(np.argmax(np.abs(lt)))
    M = [[None] * N for _ in range(N)]
    Mb = [[None] * N for _ in range(N)]
    for i in range(N):
        pushed = [q[i].derive(c).at_body(pt) for c in chi]
        for j in range(N):
            M[i][j] = pushed[4 + sp.th(j, p)].scale(1.0 / lam[p])
        for j in range(N):
            for b in (0, 1):
                res = max(res, (pushed[4 + sp.th(j, b)] - M[i][j].scale(lam[b])).norm())
                res = max(res, pushed[4 + sp.tb(j, b)].norm())
        for b in (0, 1):
            for bd in (0, 1):
                pred = SuperPoly.zero(0, 2 * N)
                for j in range(N):
                    pred = pred + M[i][j] * at[4 + sp.tb(j, bd)].scale(1j * lam[b])
                res = max(res, (pushed[sp.xi(b, bd)] - pred).norm())

        pushed = [qb[i].derive(c).at_body(pt) for c in chi]
        for j in range(N):
            Mb[i][j] = pushed[4 + sp.tb(j, pp)].scale(1.0 / lt[pp])
        for j in range(N):
            for b in (0, 1):
                res = max(res, (pushed[4 + sp.tb(j, b)] - Mb[i][j].scale(lt[b])).norm())
                res = max(res, pushed[4 + sp.th(j, b)].norm())
        for b in (0, 1):
            for bd in (0, 1):
                pred = SuperPoly.zero(0, 2 * N)
                for j in range(N):
                    pred = pred + Mb[i][j] * at[4 + sp.th(j, b)].scale(1j * lt[bd])
                res = max(res, (pushed[sp.xi(b, bd)] - pred).norm())
    if strict and res > tol:
        raise FormViolation(f"pushforward is not of line form: residual {res:.3e}")
    return SuperProlongation(lam, lt, MMatrices(M, Mb), res)


def _body(p: SuperPoly) -> complex:
    return complex(p.terms.get(((0,) * p.nb, ()), 0.0))


# ---------------------------------------------------------------------------
# extended causal morphisms


def _matrix_fn(V) -> Callable:
    if callable(V):
        return V
    V = np.asarray(V, complex)
    return lambda x, lam, lt: V


@dataclass
class ExtendedCausalMorphism:
    """Causal morphism with frame matrices acting on the odd coordinates.

    The odd coordinates transform as ``theta' = V theta`` and
    ``thetabar' = Vt thetabar`` (see the ledger for the direction).
    ``twist`` optionally adds an odd-dependent 2x2 block to V; it exists
    only to build controls whose frame depends on the odd coordinates.
    """

    f: CausalMorphism
    V: Callable
    Vt: Callable
    name: str = "extended"
    twist: Optional[Callable] = None  # SuperSpace -> 2x2 nested list of even SuperPolys

    def matrices(self, x, lam, lt):
        V = np.asarray(self.V(x, lam, lt), complex)
        Vt = np.asarray(self.Vt(x, lam, lt), complex)
        for m in (V, Vt):
            if abs(np.linalg.det(m)) < 1e-14:
                raise SingularMatrix("frame matrix is not invertible")
        return V, Vt

    def __call__(self, x, lam, lt, theta, thetabar):
        """Numeric action; ``theta`` and ``thetabar`` are N x 2 arrays of odd-frame coefficients."""
        V, Vt = self.matrices(x, lam, lt)
        xp, lp, ltp = self.f(x, lam, lt)
        return xp, lp, ltp, np.asarray(theta) @ V.T, np.asarray(thetabar) @ Vt.T

    def superspace_map(self, x0, lam, lt, N: int):
        """Components of the map on a line through x0 with fibre (lam, lt).

        Returns ``(even, odd)`` substitution lists on superspace.  V and Vt
        are evaluated at the line's base, which is exact for constant frames.
        """
        if self.f.affine is None:
            raise FormViolation("symbolic superspace map needs a lifted affine causal morphism")
        Lam, Lt, b = self.f.affine
        sp = SuperSpace(N)
        V, Vt = self.matrices(x0, lam, lt)
        Vs = [[sp.const(V[a, c]) for c in (0, 1)] for a in (0, 1)]
        if self.twist is not None:
            tw = self.twist(sp)
            Vs = [[Vs[a][c] + tw[a][c] for c in (0, 1)] for a in (0, 1)]
        even = [None] * 4
        for a in (0, 1):
            for ad in (0, 1):
                acc = sp.const(b[a, ad])
                for c in (0, 1):
                    for cd in (0, 1):
                        coef = Lam[a, c] * Lt[ad, cd]
                        if coef != 0:
                            acc = acc + sp.x(c, cd).scale(coef)
                even[sp.xi(a, ad)] = acc
        odd = [None] * sp.ng
        for i in range(N):
            for a in (0, 1):
                acc = sp.zero()
                for c in (0, 1):
                    acc = acc + Vs[a][c] * sp.theta(i, c)
                odd[sp.th(i, a)] = acc
                odd[sp.tb(i, a)] = _lin(sp, [(Vt[a, c], sp.tb(i, c)) for c in (0, 1)])
        return even, odd


def extend_causal(f: CausalMorphism, V, Vt, name: Optional[str] = None, twist=None) -> ExtendedCausalMorphism:
    fh = ExtendedCausalMorphism(f, _matrix_fn(V), _matrix_fn(Vt), name or f"extended_{f.name}", twist)
    if not callable(V) and not callable(Vt):
        fh.matrices(None, None, None)
    return fh


def extended_affine(f: CausalMorphism, scale_t: complex = 1.0) -> ExtendedCausalMorphism:
    """Lifted affine f with V = Lam and Vt = scale_t * Lt (scale_t != 1 is the mismatch control)."""
    Lam, Lt, _ = f.affine
    return extend_causal(f, Lam, scale_t * Lt, name=f"extended_{f.name}")


def twisted_extension(f: CausalMorphism, eps: float = 0.5) -> ExtendedCausalMorphism:
    """Control: V picks up an odd bilinear that is not a function of tau."""
    Lam, Lt, _ = f.affine

    def twist(sp):
        if sp.N < 2:
            raise IndexOutOfRange("the twisted control needs N >= 2")
        t = (sp.theta(0, 0) * sp.thetabar(1, 0)).scale(eps)
        z = sp.zero()
        return [[t, z], [z, t]]

    return extend_causal(f, Lam, Lt, name=f"twisted_{f.name}", twist=twist)


def image_curve(fh: ExtendedCausalMorphism, L: SuperNullLine, N: int) -> list:
    """``fh`` restricted to the super null line L, as line-space polynomials."""
    even, odd = fh.superspace_map(L.base.x, L.dir_l, L.dir_r, N)
    emb = line_embedding(L, N)
    return [c.compose(emb[:4], emb[4:]) for c in even + odd]


def vv_compatibility_residual(f: CausalMorphism, V, Vt, L: NullLine) -> float:
    V, Vt = _matrix_fn(V), _matrix_fn(Vt)
    x, lam, lt = np.asarray(L.base, complex), L.dir_l, L.dir_r
    v = outer(lam, lt)
    Vx = np.asarray(V(x, lam, lt), complex)
    Vtx = np.asarray(Vt(x, lam, lt), complex)
    return float(np.linalg.norm(Vx @ v @ Vtx.T - f.pushforward(x, lam, lt, v)))


def super_contact_residuals(fh: ExtendedCausalMorphism, L: SuperNullLine, N: int, s_samples=(0.0,)):
    """(fit residual, fibre mismatch, M Mbar residual), each maximised over s."""
    chi = image_curve(fh, L, N)
    fit = fib = mm = 0.0
    for s in s_samples:
        pro = super_prolong(chi, N, s0=float(s))
        _, lp, ltp = fh.f(L.point(s), L.dir_l, L.dir_r)
        fit = max(fit, pro.residual)
        fib = max(fib, projective_distance(lp, pro.lam), projective_distance(ltp, pro.lt))
        mm = max(mm, pro.mm.product_residual())
    return fit, fib, mm


def super_line_suite(seed: int = 0, count: int = 4) -> list:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        x = 0.5 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        lam = np.array([1.0, 0.0]) + 0.5 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        lt = np.array([0.0, 1.0]) + 0.5 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        out.append(SuperNullLine(SuperPoint(x), lam, lt))
    return out


def certify_extended(fh: ExtendedCausalMorphism, N: int = 3, seed: int = 0, count: int = 4, tols=None) -> list:
    tols = {"vv": 1e-10, "mm": 1e-10, "contact": 1e-8, **(tols or {})}
    vv, mm, contact = [], [], []
    for L in super_line_suite(seed, count):
        vv.append(vv_compatibility_residual(fh.f, fh.V, fh.Vt, L.body()))
        fit, fib, m = super_contact_residuals(fh, L, N, s_samples=(0.0, 0.5))
        contact.append(max(fit, fib))
        mm.append(m)
    return [
        record("vv_compatibility", "frame compatibility on null lines", vv, tols["vv"]),
        record("mm_identity", "M Mbar = 1 on super null lines", mm, tols["mm"]),
        record("super_contact", "super contact condition", contact, tols["contact"]),
    ]


# ---------------------------------------------------------------------------
# pullback of superconnections


def push_components(Y: SuperVectorOp, even, odd) -> list:
    return [Y.derive(c) for c in list(even) + list(odd)]


def _pair(comps: list, odd_img: list, phi_img: SuperConnection, N: int) -> SuperPoly:
    """Contract pushed components with the target connection through the susy frame."""
    sp = SuperSpace(N)
    out = sp.zero()
    for i in range(N):
        for a in (0, 1):
            ca = comps[4 + sp.th(i, a)]
            if ca:
                out = out + ca * phi_img.omega[i][a]
            cb = comps[4 + sp.tb(i, a)]
            if cb:
                out = out + cb * phi_img.omegabar[i][a]
    for a in (0, 1):
        for ad in (0, 1):
            c = comps[sp.xi(a, ad)]
            for i in range(N):
                c = c - (comps[4 + sp.th(i, a)] * odd_img[sp.tb(i, ad)]).scale(1j)
                c = c - (comps[4 + sp.tb(i, ad)] * odd_img[sp.th(i, a)]).scale(1j)
            if c:
                out = out + c * phi_img.a[a][ad]
    return out


def compose_connection(phi: SuperConnection, even, odd) -> SuperConnection:
    N = phi.N
    c = lambda p: p.compose(even, odd)
    return SuperConnection(
        N,
        phi.n,
        [[c(phi.omega[i][a]) for a in (0, 1)] for i in range(N)],
        [[c(phi.omegabar[i][a]) for a in (0, 1)] for i in range(N)],
        [[c(phi.a[a][ad]) for ad in (0, 1)] for a in (0, 1)],
    )


def pullback_connection(fh: ExtendedCausalMorphism, phi: SuperConnection, L: SuperNullLine) -> SuperConnection:
    """Pullback of phi along the superspace map fh uses on the line L."""
    N = phi.N
    even, odd = fh.superspace_map(L.base.x, L.dir_l, L.dir_r, N)
    img = compose_connection(phi, even, odd)
    pair = lambda Y: _pair(push_components(Y, even, odd), odd, img, N)
    return SuperConnection(
        N,
        phi.n,
        [[pair(susy_generator("q", i, a, N)) for a in (0, 1)] for i in range(N)],
        [[pair(susy_generator("qbar", i, a, N)) for a in (0, 1)] for i in range(N)],
        [[pair(x_derivative(a, ad, N)) for ad in (0, 1)] for a in (0, 1)],
    )


def super_pullback_component(fh: ExtendedCausalMorphism, phi: SuperConnection, z: SuperPoint, L: SuperNullLine, which=("D",)) -> SuperPoly:
    """Pulled-back component along a line operator: ``("D",)``, ``("T", i)`` or ``("Tbar", i)``."""
    N = phi.N
    sp = SuperSpace(N)
    lam, lt = np.asarray(L.dir_l, complex), np.asarray(L.dir_r, complex)
    if which[0] == "D":
        Y = combine([(lam[a] * lt[ad], x_derivative(a, ad, N)) for a in (0, 1) for ad in (0, 1)], 4, sp.ng, 0)
    elif which[0] == "T":
        Y = combine([(lam[a], susy_generator("q", which[1], a, N)) for a in (0, 1)], 4, sp.ng, 1)
    elif which[0] in ("Tbar", "Tb"):
        Y = combine([(lt[a], susy_generator("qbar", which[1], a, N)) for a in (0, 1)], 4, sp.ng, 1)
    else:
        raise IndexOutOfRange(f"unknown line operator {which!r}")
    even, odd = fh.superspace_map(L.base.x, lam, lt, N)
    img = compose_connection(phi, even, odd)
    return z.evaluate(_pair(push_components(Y, even, odd), odd, img, N), N)


# ---------------------------------------------------------------------------
# tau, embedded Yang-Mills data and the reduction solver

NX = 4  # even variables of x; tau-space polynomials have 4 more for tau


def tau_of(N: int) -> list:
    """``tau^{a ad} = sum_i theta^{i a} thetabar_i^{ad}`` as a 2x2 nested list."""
    sp = SuperSpace(N)
    out = [[sp.zero(), sp.zero()], [sp.zero(), sp.zero()]]
    for a in (0, 1):
        for ad in (0, 1):
            for i in range(N):
                out[a][ad] = out[a][ad] + sp.theta(i, a) * sp.thetabar(i, ad)
    return out


def tau_space_poly(terms) -> SuperPoly:
    """Polynomial in (x^{00}, x^{01}, x^{10}, x^{11}, tau^{00}, tau^{01}, tau^{10}, tau^{11})."""
    return SuperPoly(8, 0, terms)


def _tzero() -> SuperPoly:
    return SuperPoly.zero(8, 0)


@dataclass
class EmbeddedYMData:
    """``h``, ``hbar`` and ``a`` as 2x2 nested lists of polynomials in (x, tau)."""

    N: int
    h: list
    hbar: list
    a: list
    n: int = 1

    @classmethod
    def zero(cls, N: int) -> "EmbeddedYMData":
        z = _tzero()
        return cls(N, [[z, z], [z, z]], [[z, z], [z, z]], [[z, z], [z, z]])

    def entries(self):
        for name in ("h", "hbar", "a"):
            blk = getattr(self, name)
            for a in (0, 1):
                for ad in (0, 1):
                    yield name, a, ad, blk[a][ad]

    def norm(self) -> float:
        return float(np.sqrt(sum(p.norm() ** 2 for *_, p in self.entries())))


def _superspace_subs(N: int, even=None, odd=None):
    """Substitution sending (x, tau) to superspace, optionally through a map."""
    sp = SuperSpace(N)
    xs = [sp.x(a, ad) for a in (0, 1) for ad in (0, 1)]
    tau = tau_of(N)
    ts = [tau[a][ad] for a in (0, 1) for ad in (0, 1)]
    subs = xs + ts
    if even is not None:
        subs = [p.compose(even, odd) for p in subs]
    return subs


def lift(p: SuperPoly, subs) -> SuperPoly:
    if not p:
        return SuperPoly.zero(subs[0].nb, subs[0].ng)
    return p.compose(subs, [])


def embed_ym(data: EmbeddedYMData) -> SuperConnection:
    """``omega_{i a} = thetabar_i^{ad} h_{a ad}`` and ``omegabar^i_{ad} = -theta^{i a} hbar_{a ad}``."""
    N = data.N
    sp = SuperSpace(N)
    subs = _superspace_subs(N)
    H = [[lift(data.h[a][ad], subs) for ad in (0, 1)] for a in (0, 1)]
    Hb = [[lift(data.hbar[a][ad], subs) for ad in (0, 1)] for a in (0, 1)]
    omega = [[sum_poly(sp, [sp.thetabar(i, ad) * H[a][ad] for ad in (0, 1)]) for a in (0, 1)] for i in range(N)]
    omegabar = [
        [sum_poly(sp, [sp.theta(i, a) * Hb[a][ad] for a in (0, 1)]).scale(-1.0) for ad in (0, 1)]
        for i in range(N)
    ]
    A = [[lift(data.a[a][ad], subs) for ad in (0, 1)] for a in (0, 1)]
    return SuperConnection(N, data.n, omega, omegabar, A)


def sum_poly(sp, polys) -> SuperPoly:
    out = sp.zero()
    for p in polys:
        out = out + p
    return out


def gauge_condition_residual(data: EmbeddedYMData) -> float:
    """Norm of ``tau^{a ad} (h + hbar)_{a ad}`` as an element of superspace."""
    sp = SuperSpace(data.N)
    subs = _superspace_subs(data.N)
    tau = tau_of(data.N)
    acc = sp.zero()
    for a in (0, 1):
        for ad in (0, 1):
            s = data.h[a][ad] + data.hbar[a][ad]
            if s:
                acc = acc + tau[a][ad] * lift(s, subs)
    return acc.norm()


def radial_gauge_residual(phi: SuperConnection) -> float:
    """Norm of ``theta^{i a} omega_{i a} + thetabar_i^{ad} omegabar^i_{ad}``."""
    sp = SuperSpace(phi.N)
    acc = sp.zero()
    for i in range(phi.N):
        for a in (0, 1):
            acc = acc + sp.theta(i, a) * phi.omega[i][a] + sp.thetabar(i, a) * phi.omegabar[i][a]
    return acc.norm()


def relation_polys(phi: SuperConnection) -> list:
    """Multiplication parts of the frame relations of phi (abelian case).

    For every i, j: the part of ``{Q_{i a}, Q_{j b}}`` symmetric in (a, b),
    the same for Qbar, and ``{Q_{i a}, Qbar^j_{bd}} - 2i delta_ij D_{a bd}``.
    The derivation parts of these cancel identically.
    """
    N = phi.N
    Q = [[susy_generator("q", i, a, N).with_mult(phi.omega[i][a]) for a in (0, 1)] for i in range(N)]
    Qb = [[susy_generator("qbar", i, a, N).with_mult(phi.omegabar[i][a]) for a in (0, 1)] for i in range(N)]
    out = []
    for i in range(N):
        for j in range(i, N):
            for a in (0, 1):
                for b in range(a, 2):
                    out.append(bracket_mult(Q[i][a], Q[j][b]) + bracket_mult(Q[i][b], Q[j][a]))
                    out.append(bracket_mult(Qb[i][a], Qb[j][b]) + bracket_mult(Qb[i][b], Qb[j][a]))
    for i in range(N):
        for j in range(N):
            for a in (0, 1):
                for bd in (0, 1):
                    r = bracket_mult(Q[i][a], Qb[j][bd])
                    if i == j:
                        r = r - phi.a[a][bd].scale(2j)
                    out.append(r)
    return out


def maxwell_residual(a: list) -> float:
    """``eps^{ab} eps^{ad bd} d_{a ad} F_{b bd, c cd}`` for a 2x2 list of x-polynomials (any nb >= 4)."""
    xi = SuperSpace.xi
    F = {}
    for b in (0, 1):
        for bd in (0, 1):
            for c in (0, 1):
                for cd in (0, 1):
                    F[(b, bd, c, cd)] = a[c][cd].d_even(xi(b, bd)) - a[b][bd].d_even(xi(c, cd))
    worst = 0.0
    for c in (0, 1):
        for cd in (0, 1):
            acc = a[0][0] - a[0][0]
            for aa in (0, 1):
                for b in (0, 1):
                    for ad in (0, 1):
                        for bd in (0, 1):
                            w = EPS[aa, b] * EPS[ad, bd]
                            if w:
                                acc = acc + F[(b, bd, c, cd)].d_even(xi(aa, ad)).scale(w)
            worst = max(worst, acc.norm())
    return worst


def potential_poly(A, degree: int = 1, seed: int = 0, tol: float = 1e-9) -> list:
    """Abelian GaugeField as a 2x2 list of polynomials in x (tau-space), by exact interpolation."""
    if A.n != 1:
        raise ShapeMismatch("polynomial reduction handles rank-1 (abelian) fields only")
    mons = even_monomials(4, degree)
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(3 * len(mons) + 5, 4)) + 1j * rng.normal(size=(3 * len(mons) + 5, 4))
    basis = np.array([[np.prod(p ** np.array(e)) for e in mons] for p in pts])
    vals = np.array([A(p.reshape(2, 2))[:, :, 0, 0] for p in pts]).reshape(len(pts), 4)
    coef, *_ = np.linalg.lstsq(basis, vals, rcond=None)
    fit = np.max(np.abs(basis @ coef - vals)) / (1 + np.max(np.abs(vals)))
    if fit > tol:
        raise FormViolation(f"field is not a polynomial of degree {degree} (fit residual {fit:.2e})")
    out = [[None, None], [None, None]]
    for a in (0, 1):
        for ad in (0, 1):
            col = coef[:, SuperSpace.xi(a, ad)]
            out[a][ad] = tau_space_poly(
                {(e + (0, 0, 0, 0), ()): c for e, c in zip(mons, col) if abs(c) > 1e-13}
            )
    return out


def constant_abelian_potential(F_asd=None, F_sd=None) -> list:
    """Linear potential ``A_Q = 1/2 x^P F_PQ`` with generic constant curvature."""
    from .field import make_constant_field

    F_asd = np.array([[0.7, 0.2 - 0.1j], [0.2 - 0.1j, -0.4]]) if F_asd is None else F_asd
    F_sd = np.array([[0.3j, 0.5], [0.5, 0.1]]) if F_sd is None else F_sd
    return potential_poly(make_constant_field(F_asd, F_sd), degree=1)


def non_maxwell_potential(c: complex = 1.0) -> list:
    """Quadratic control ``A_{00} = c (x^{11})^2``; its curvature violates Maxwell."""
    z = _tzero()
    return [[tau_space_poly({((0, 0, 0, 2, 0, 0, 0, 0), ()): c}), z], [z, z]]


def _basis_entries(order: int, xdeg: int, names):
    taus = [e for e in even_monomials(4, order) if sum(e) == order]
    xs = even_monomials(4, xdeg) if xdeg >= 0 else []
    for name in names:
        for a in (0, 1):
            for ad in (0, 1):
                for t in taus:
                    for e in xs:
                        yield name, a, ad, e + t


def _data_with(N: int, entries) -> EmbeddedYMData:
    d = EmbeddedYMData.zero(N)
    for (name, a, ad, key), c in entries:
        blk = getattr(d, name)
        blk[a][ad] = blk[a][ad] + tau_space_poly({(key, ()): c})
    return d


def _add_data(d: EmbeddedYMData, other: EmbeddedYMData) -> EmbeddedYMData:
    out = EmbeddedYMData.zero(d.N)
    for name in ("h", "hbar", "a"):
        getattr(out, name)[:] = [
            [getattr(d, name)[a][ad] + getattr(other, name)[a][ad] for ad in (0, 1)] for a in (0, 1)
        ]
    return out


def _equations(data: EmbeddedYMData, max_grade: int) -> dict:
    """Flattened equations: relation multiplication parts and the gauge condition."""
    phi = embed_ym(data)
    out = {}
    for r, p in enumerate(relation_polys(phi)):
        for key, c in p.terms.items():
            if len(key[1]) <= max_grade:
                out[("rel", r) + key] = complex(np.sum(c))
    sp = SuperSpace(data.N)
    tau = tau_of(data.N)
    subs = _superspace_subs(data.N)
    g = sp.zero()
    for a in (0, 1):
        for ad in (0, 1):
            s = data.h[a][ad] + data.hbar[a][ad]
            if s:
                g = g + tau[a][ad] * lift(s, subs)
    for key, c in g.terms.items():
        if len(key[1]) <= max_grade + 2:
            out[("gauge",) + key] = complex(np.sum(c))
    return out


def solve_embedding(A, N: int = 3, degree: Optional[int] = None, tol: float = 1e-9) -> EmbeddedYMData:
    """Superfield extension of an abelian potential, order by order in tau.

    ``A`` is a GaugeField or a 2x2 list of x-polynomials.  At order k the
    unknowns are the tau^k parts of h, hbar (and of a for k >= 1), with
    x-degree at most ``degree - k``; they are fixed by the relations of odd
    degree 2k together with the gauge condition.  Raises NoSolution when an
    order cannot be satisfied.
    """
    if not isinstance(A, list):
        A = potential_poly(A, degree=degree or 1)
    if degree is None:
        degree = max((sum(e[:4]) for row in A for p in row for (e, _) in p.terms), default=0)
    data = EmbeddedYMData.zero(N)
    data.a = [[A[a][ad] for ad in (0, 1)] for a in (0, 1)]
    if all(not p for row in A for p in row):
        return data
    for k in range(degree + 1):
        names = ("h", "hbar") if k == 0 else ("h", "hbar", "a")
        basis = list(_basis_entries(k, degree - k, names))
        base_eq = _equations(data, 2 * k)
        cols = []
        keys = set(base_eq)
        for ent in basis:
            eq = _equations(_data_with(N, [(ent, 1.0)]), 2 * k)
            cols.append(eq)
            keys.update(eq)
        keys = sorted(keys, key=repr)
        idx = {kk: r for r, kk in enumerate(keys)}
        M = np.zeros((len(keys), len(basis)), complex)
        rhs = np.zeros(len(keys), complex)
        for kk, v in base_eq.items():
            rhs[idx[kk]] = -v
        for j, eq in enumerate(cols):
            for kk, v in eq.items():
                M[idx[kk], j] = v
        sol, *_ = np.linalg.lstsq(M, rhs, rcond=None) if basis else (np.zeros(0),)
        resid = float(np.max(np.abs(M @ sol - rhs))) if len(keys) else 0.0
        if resid > tol:
            raise NoSolution(f"superfield equations inconsistent at tau order {k} (residual {resid:.2e})")
        sol = np.where(np.abs(sol) < 1e-14, 0, sol)
        data = _add_data(data, _data_with(N, [(ent, c) for ent, c in zip(basis, sol) if c != 0]))
    final = _equations(data, 4 * N)
    worst = max((abs(v) for v in final.values()), default=0.0)
    if worst > tol:
        raise NoSolution(f"superfield equations fail beyond the last order (residual {worst:.2e})")
    return data


def fit_embedding(phi: SuperConnection, xdeg: int, taudeg: int) -> tuple:
    """Least-squares ``(data, residual)`` with ``embed_ym(data) ~ phi``."""
    N = phi.N
    basis = [ent for k in range(taudeg + 1) for ent in _basis_entries(k, xdeg, ("h", "hbar", "a"))]
    target = phi.components()
    keys: dict = {}

    def flat(comps):
        out = {}
        for c, p in enumerate(comps):
            for key, v in p.terms.items():
                out[(c,) + key] = complex(np.sum(v))
        return out

    tgt = flat(target)
    cols = [flat(embed_ym(_data_with(N, [(ent, 1.0)])).components()) for ent in basis]
    for kk in list(tgt) + [kk for col in cols for kk in col]:
        keys.setdefault(kk, len(keys))
    M = np.zeros((len(keys), len(basis)), complex)
    rhs = np.zeros(len(keys), complex)
    for kk, v in tgt.items():
        rhs[keys[kk]] = v
    for j, col in enumerate(cols):
        for kk, v in col.items():
            M[keys[kk], j] = v
    sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    resid = float(np.max(np.abs(M @ sol - rhs))) if len(keys) else 0.0
    sol = np.where(np.abs(sol) < 1e-14, 0, sol)
    return _data_with(N, [(ent, c) for ent, c in zip(basis, sol) if c != 0]), resid


def form_quantities(fh: ExtendedCausalMorphism, data: EmbeddedYMData, L: SuperNullLine) -> list:
    """Symbolic ``a_i^{j b} h_{b cd}(x', tau')`` and ``b_i^{j bd} hbar_{c bd}(x', tau')``.

    ``a`` and ``b`` are the frame components of the pushed T_i and Tbar^i;
    these are the factors multiplying thetabar and theta in the pulled-back
    omega and omegabar.
    """
    N = data.N
    sp = SuperSpace(N)
    lam, lt = np.asarray(L.dir_l, complex), np.asarray(L.dir_r, complex)
    even, odd = fh.superspace_map(L.base.x, lam, lt, N)
    subs = _superspace_subs(N, even, odd)
    H = [[lift(data.h[a][ad], subs) for ad in (0, 1)] for a in (0, 1)]
    Hb = [[lift(data.hbar[a][ad], subs) for ad in (0, 1)] for a in (0, 1)]
    out = []
    for i in range(N):
        T = combine([(lam[a], susy_generator("q", i, a, N)) for a in (0, 1)], 4, sp.ng, 1)
        comps = push_components(T, even, odd)
        for j in range(N):
            for cd in (0, 1):
                out.append(sum_poly(sp, [comps[4 + sp.th(j, b)] * H[b][cd] for b in (0, 1)]))
        Tb = combine([(lt[a], susy_generator("qbar", i, a, N)) for a in (0, 1)], 4, sp.ng, 1)
        comps = push_components(Tb, even, odd)
        for j in range(N):
            for c in (0, 1):
                out.append(sum_poly(sp, [comps[4 + sp.tb(j, bd)] * Hb[c][bd] for bd in (0, 1)]))
    return out


def form_preservation_residual(fh: ExtendedCausalMorphism, data: EmbeddedYMData, z1: SuperPoint, z2: SuperPoint, L: SuperNullLine) -> float:
    """Difference of the form quantities at two points with the same (x, tau)."""
    N = data.N
    worst = 0.0
    for p in form_quantities(fh, data, L):
        worst = max(worst, (z1.evaluate(p, N) - z2.evaluate(p, N)).norm())
    return worst


def flat_algebra_residual(N: int) -> float:
    """Largest deviation from ``{q, q} = {qbar, qbar} = 0`` and ``{q_{ia}, qbar^j_{bd}} = 2i delta d_{a bd}``."""
    ops = [("q", i, a, susy_generator("q", i, a, N)) for i in range(N) for a in (0, 1)]
    ops += [("qbar", i, a, susy_generator("qbar", i, a, N)) for i in range(N) for a in (0, 1)]
    worst = 0.0
    for k1, i, a, P in ops:
        for k2, j, b, Q in ops:
            r = anticommutator(P, Q)
            if k1 != k2 and i == j:
                aa, bb = (a, b) if k1 == "q" else (b, a)
                r = r - x_derivative(aa, bb, N).scale(2j)
            worst = max(worst, r.norm())
    return worst


SuperCausalMorphism = ExtendedCausalMorphism
