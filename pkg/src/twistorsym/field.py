"""GL(n, C) gauge potentials on C^4, curvature spinors and Wilson lines.

A potential is stored as ``A[a, ad]`` (an ``(2, 2, n, n)`` array at each
point) and acts on a vector by ``v . A = v^{a ad} A[a, ad]``.  Derivatives
are indexed ``dA[b, bd, a, ad] = d A_{a ad} / d x^{b bd}``.

Curvature is ``F_{PQ} = d_P A_Q - d_Q A_P + [A_P, A_Q]`` and splits as
``F[a, ad, b, bd] = eps_ab Ft[ad, bd] + eps_{ad bd} F[a, b]``.  ``Ft`` is the
self-dual block; the field is anti-self-dual (ASDYM) when it vanishes, which
is exactly flatness on every alpha-plane.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateSpan,
    DerivativeDivergence,
    NoConvergence,
    NonSymmetric,
    SingularEvaluation,
)
from .spinor import EPS, contract, outer

FD_STEPS = (1e-4, 5e-5)
BASIS = [outer(np.eye(2)[a], np.eye(2)[ad]) for a in range(2) for ad in range(2)]


@dataclass
class GaugeField:
    n: int
    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    singular: Optional[Callable[[np.ndarray], bool]] = None
    eval_many: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = "field"
    params: dict = dc_field(default_factory=dict)
    singular_many: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if self.singular is not None and self.singular(x):
            raise SingularEvaluation(f"{self.name} is singular at {x.ravel()}")
        return self.eval(x)

    def at_many(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=complex)
        if self.singular_many is not None:
            bad = np.asarray(self.singular_many(xs))
            if np.any(bad):
                raise SingularEvaluation(f"{self.name} is singular at {xs[np.argmax(bad)].ravel()}")
        elif self.singular is not None:
            for x in xs:
                if self.singular(x):
                    raise SingularEvaluation(f"{self.name} is singular at {x.ravel()}")
        if self.eval_many is not None:
            return self.eval_many(xs)
        return np.array([self.eval(x) for x in xs])

    def contract(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        return np.einsum("ab,abij->ij", v, self(x))


@dataclass
class CurvatureSpinors:
    f_asd: np.ndarray  # F[a, b], shape (2, 2, n, n)
    f_sd: np.ndarray  # Ft[ad, bd]
    full: np.ndarray  # F[a, ad, b, bd]


def _fd_derivative(fn, x: np.ndarray, steps=FD_STEPS) -> np.ndarray:
    """Central differences along each complex coordinate with one Richardson level.

    Holomorphy lets a real step stand in for the complex derivative.
    """
    out = []
    for e in BASIS:
        est = []
        for h in steps:
            est.append((fn(x + h * e) - fn(x - h * e)) / (2 * h))
        r = (steps[0] / steps[1]) ** 2
        rich = (r * est[1] - est[0]) / (r - 1)
        diff = np.max(np.abs(est[1] - est[0]))
        if not np.isfinite(diff) or diff > 1e-3 * (1.0 + np.max(np.abs(rich))):
            raise DerivativeDivergence(f"Richardson estimates disagree by {diff:.3e}")
        out.append(rich)
    return np.array(out).reshape((2, 2) + out[0].shape)


def derivative(A: GaugeField, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if A.singular is not None and A.singular(x):
        raise SingularEvaluation(f"{A.name} is singular at {x.ravel()}")
    if A.deriv is not None:
        return A.deriv(x)
    return _fd_derivative(A, x)


def field_strength(A: GaugeField, x: np.ndarray) -> np.ndarray:
    """Full curvature ``F[a, ad, b, bd]`` as n x n matrices."""
    a = A(x)
    da = derivative(A, x)
    f = da - np.transpose(da, (2, 3, 0, 1, 4, 5))
    f = f + np.einsum("abij,cdjk->abcdik", a, a) - np.einsum("cdij,abjk->abcdik", a, a)
    return f


def curvature(A: GaugeField, x: np.ndarray) -> CurvatureSpinors:
    f = field_strength(A, x)
    f_sd = 0.5 * np.einsum("ab,acbdij->cdij", EPS, f)
    f_asd = 0.5 * np.einsum("cd,acbdij->abij", EPS, f)
    f_sd = 0.5 * (f_sd + np.transpose(f_sd, (1, 0, 2, 3)))
    f_asd = 0.5 * (f_asd + np.transpose(f_asd, (1, 0, 2, 3)))
    return CurvatureSpinors(f_asd=f_asd, f_sd=f_sd, full=f)


def asd_residual(A: GaugeField, x: np.ndarray) -> float:
    return float(np.linalg.norm(curvature(A, x).f_sd))


def curvature_on(f_full: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    return np.einsum("ab,cd,abcdij->ij", v, w, f_full)


def plane_commutator_residual(A: GaugeField, x, lam1, lam2, lt, cross_check: bool = False):
    """Norm of ``[v1 . D, v2 . D]`` for two tangents of the alpha-plane at x.

    With ``cross_check`` also returns the prediction
    ``|lam1 eps lam2| * |lt lt Ft|`` from the spinor decomposition.
    """
    pair = contract(lam1, lam2)
    if abs(pair) <= 1e-12 * np.linalg.norm(lam1) * np.linalg.norm(lam2):
        raise DegenerateSpan("spinors are parallel")
    curv = curvature(A, x)
    res = float(np.linalg.norm(curvature_on(curv.full, outer(lam1, lt), outer(lam2, lt))))
    if not cross_check:
        return res
    pred = abs(pair) * float(np.linalg.norm(np.einsum("a,b,abij->ij", lt, lt, curv.f_sd)))
    return res, pred


# -- Wilson lines ------------------------------------------------------------


@dataclass
class PathSpec:
    """Curve gamma: [0, 1] -> C^4 with vectorised point and velocity samplers."""

    point: Callable[[np.ndarray], np.ndarray]
    velocity: Callable[[np.ndarray], np.ndarray]
    segments: int = 1

    def reversed(self) -> "PathSpec":
        return PathSpec(lambda t: self.point(1 - t), lambda t: -self.velocity(1 - t), self.segments)

    def then(self, other: "PathSpec") -> "PathSpec":
        """Traverse ``self`` first, then ``other`` (each in half the time)."""

        def point(t):
            t = np.asarray(t, float)
            first = t < 0.5
            out = np.empty(t.shape + (2, 2), complex)
            if np.any(first):
                out[first] = self.point(2 * t[first])
            if np.any(~first):
                out[~first] = other.point(2 * t[~first] - 1)
            return out

        def velocity(t):
            t = np.asarray(t, float)
            first = t < 0.5
            out = np.empty(t.shape + (2, 2), complex)
            if np.any(first):
                out[first] = 2 * self.velocity(2 * t[first])
            if np.any(~first):
                out[~first] = 2 * other.velocity(2 * t[~first] - 1)
            return out

        return PathSpec(point, velocity, self.segments + other.segments)


def segment(a: np.ndarray, b: np.ndarray) -> PathSpec:
    a = np.asarray(a, complex)
    d = np.asarray(b, complex) - a
    return PathSpec(
        lambda t: a + np.asarray(t)[..., None, None] * d,
        lambda t: np.broadcast_to(d, np.shape(t) + (2, 2)).copy(),
    )


def polyline(points) -> PathSpec:
    """Piecewise linear path spending equal parameter time on each edge."""
    pts = [np.asarray(p, complex) for p in points]
    k = len(pts) - 1

    def point(t):
        t = np.asarray(t, float)
        idx = np.minimum((t * k).astype(int), k - 1)
        u = t * k - idx
        a = np.array(pts)[idx]
        d = np.array(pts)[idx + 1] - a
        return a + u[..., None, None] * d

    def velocity(t):
        t = np.asarray(t, float)
        idx = np.minimum((t * k).astype(int), k - 1)
        return k * (np.array(pts)[idx + 1] - np.array(pts)[idx])

    return PathSpec(point, velocity, k)


def _ordered_product(factors: np.ndarray) -> np.ndarray:
    """``factors[-1] @ ... @ factors[0]`` by pairwise reduction."""
    f = factors
    while f.shape[0] > 1:
        if f.shape[0] % 2:
            f = np.concatenate([f, np.broadcast_to(np.eye(f.shape[-1]), (1,) + f.shape[1:])])
        f = f[1::2] @ f[0::2]
    return f[0]


def _generators(A: GaugeField, path: PathSpec, t: np.ndarray) -> np.ndarray:
    """``-A(gamma(t)) . gamma'(t)`` at each parameter value."""
    return -np.einsum("kab,kabij->kij", path.velocity(t), A.at_many(path.point(t)))


def _step_count(path: PathSpec, steps: int) -> int:
    k = max(path.segments, 1)
    return k * ((steps + k - 1) // k)


def midpoint_product(A: GaugeField, path: PathSpec, steps: int) -> np.ndarray:
    """Second-order product of midpoint exponentials."""
    steps = _step_count(path, steps)
    t = (np.arange(steps) + 0.5) / steps
    return _ordered_product(scipy.linalg.expm(_generators(A, path, t) / steps))


_GAUSS = 0.5 - np.sqrt(3) / 6, 0.5 + np.sqrt(3) / 6


def magnus4_product(A: GaugeField, path: PathSpec, steps: int) -> np.ndarray:
    """Fourth-order Magnus product on two Gauss-Legendre nodes per step."""
    steps = _step_count(path, steps)
    h = 1.0 / steps
    left = np.arange(steps) * h
    m1 = _generators(A, path, left + _GAUSS[0] * h)
    m2 = _generators(A, path, left + _GAUSS[1] * h)
    omega = 0.5 * h * (m1 + m2) + (np.sqrt(3) / 12) * h * h * (m2 @ m1 - m1 @ m2)
    return _ordered_product(scipy.linalg.expm(omega))


SCHEMES = {"midpoint": midpoint_product, "magnus4": magnus4_product}


def wilson_line(
    A: GaugeField,
    path: PathSpec,
    tol: float = 1e-9,
    max_steps: int = 2**14,
    start_steps: int = 16,
    scheme: str = "magnus4",
) -> np.ndarray:
    """Parallel transport of ``D = d + A`` along ``path``, leftmost factor at gamma(1).

    Solves ``dW/dt = -(A . gamma') W`` as a product of one-step exponentials,
    doubling the step count until successive refinements differ by less
    than ``tol``.  Composition reads ``W(g2 after g1) = W(g2) W(g1)``.
    """
    product = SCHEMES[scheme]
    steps = max(start_steps, path.segments)
    prev = product(A, path, steps)
    while True:
        steps *= 2
        if steps > max_steps:
            raise NoConvergence(f"Wilson line did not converge within {max_steps} steps")
        cur = product(A, path, steps)
        if np.max(np.abs(cur - prev)) < tol:
            return cur
        prev = cur


# -- catalog -----------------------------------------------------------------


def zero_field(n: int = 1) -> GaugeField:
    return GaugeField(
        n,
        eval=lambda x: np.zeros((2, 2, n, n), complex),
        deriv=lambda x: np.zeros((2, 2, 2, 2, n, n), complex),
        eval_many=lambda xs: np.zeros((len(xs), 2, 2, n, n), complex),
        name="zero",
    )


def _linear_field(f_full: np.ndarray, name: str, params: dict) -> GaugeField:
    """``A_Q(x) = 1/2 x^P F_PQ`` for constant, pairwise commuting F."""
    n = f_full.shape[-1]
    half = 0.5 * f_full
    deriv = np.ascontiguousarray(half)

    return GaugeField(
        n,
        eval=lambda x: np.einsum("ab,abcdij->cdij", x, half),
        deriv=lambda x: deriv,
        eval_many=lambda xs: np.einsum("kab,abcdij->kcdij", xs, half),
        name=name,
        params=params,
    )


def assemble_curvature(f_asd: np.ndarray, f_sd: np.ndarray) -> np.ndarray:
    return np.einsum("ab,cdij->acbdij", EPS, f_sd) + np.einsum("cd,abij->acbdij", EPS, f_asd)


def _symmetric_block(F) -> np.ndarray:
    F = np.asarray(F, dtype=complex)
    if F.ndim == 2:
        F = F[:, :, None, None]
    if np.max(np.abs(F - np.transpose(F, (1, 0, 2, 3)))) > 1e-12:
        raise NonSymmetric("curvature spinor block must be symmetric")
    return F


def make_constant_asd(F) -> GaugeField:
    """Linear potential with anti-self-dual curvature ``F[a, b]`` and ``Ft = 0``.

    The entries of F must commute pairwise (abelian or simultaneously
    diagonal) so the commutator term vanishes.
    """
    F = _symmetric_block(F)
    n = F.shape[-1]
    full = assemble_curvature(F, np.zeros_like(F))
    return _linear_field(full, "constant_asd", {"n": n})


def make_constant_field(f_asd, f_sd) -> GaugeField:
    """Linear potential with both blocks prescribed (non-ASD when ``f_sd != 0``)."""
    f_asd = _symmetric_block(f_asd)
    f_sd = _symmetric_block(f_sd)
    return _linear_field(assemble_curvature(f_asd, f_sd), "constant", {})


def adj(m: np.ndarray) -> np.ndarray:
    """Adjugate of (a stack of) 2x2 matrices; linear in its argument."""
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 1, 1] = m[..., 0, 0]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    return out


_E = np.array(BASIS).reshape(2, 2, 2, 2)
_ADJ_E = adj(_E)


def make_instanton(rho: complex = 2.0, center=None, singular_margin: float = 1e-8) -> GaugeField:
    """Complexified one-instanton (n = 2) in regular gauge.

    With ``y = x - center`` and ``s = det y + rho^2``:
    ``A_P = (y adj(E_P) - E_P adj(y)) / (2 s)`` where ``E_P`` is the unit
    bispinor of coordinate P.  The opposite product order gives the
    self-dual branch; the catalog tests pin this one as anti-self-dual.
    """
    rho = complex(rho)
    if rho == 0:
        raise ValueError("instanton scale must be nonzero")
    c = np.zeros((2, 2), complex) if center is None else np.asarray(center, complex)
    rho2 = rho * rho

    def denom(y):
        return y[..., 0, 0] * y[..., 1, 1] - y[..., 0, 1] * y[..., 1, 0] + rho2

    def numer(y):
        ay = adj(y)
        # result[..., a, ad, i, j]
        t1 = np.einsum("...ik,abkj->...abij", y, _ADJ_E)
        t2 = np.einsum("abik,...kj->...abij", _E, ay)
        return t1 - t2

    def ev_many(xs):
        y = xs - c
        return numer(y) / (2 * denom(y))[..., None, None, None, None]

    def ev(x):
        return ev_many(x[None])[0]

    def deriv(x):
        y = x - c
        s = denom(y)
        num = numer(y)
        # d/dx^Q of the numerator: E_Q adj(E_P) - E_P adj(E_Q)
        dnum = np.einsum("cdik,abkj->cdabij", _E, _ADJ_E) - np.einsum("abik,cdkj->cdabij", _E, _ADJ_E)
        ds = np.einsum("ij,cdji->cd", adj(y), _E)  # d det(y) = tr(adj(y) dy)
        return dnum / (2 * s) - np.einsum("cd,abij->cdabij", ds, num) / (2 * s * s)

    def singular(x):
        return abs(denom(x - c)) < singular_margin

    return GaugeField(
        2,
        eval=ev,
        deriv=deriv,
        singular=singular,
        singular_many=lambda xs: np.abs(denom(xs - c)) < singular_margin,
        eval_many=ev_many,
        name="instanton",
        params={"rho": rho, "center": c},
    )


def perturbed(A: GaugeField, f_sd, strength: float = 0.1) -> GaugeField:
    """Add a linear non-ASD term proportional to the identity in gauge space.

    The extra term commutes with A, so the self-dual block of the result is
    exactly ``strength * f_sd``.
    """
    f_sd = _symmetric_block(f_sd)
    if f_sd.shape[-1] != A.n:
        f_sd = f_sd[..., 0, 0][..., None, None] * np.eye(A.n)
    extra = _linear_field(assemble_curvature(np.zeros_like(f_sd), strength * f_sd), "sd", {})

    def ev_many(xs):
        return A.at_many(xs) + extra.eval_many(xs)

    def deriv(x):
        return derivative(A, x) + extra.deriv(x)

    return GaugeField(
        A.n,
        eval=lambda x: A.eval(x) + extra.eval(x),
        deriv=deriv,
        singular=A.singular,
        singular_many=A.singular_many,
        eval_many=ev_many,
        name=f"perturbed_{A.name}",
        params={"strength": strength},
    )


def abelian_potential(fn: Callable[[np.ndarray], np.ndarray], name: str = "abelian") -> GaugeField:
    """n = 1 field from a map x -> 2x2 complex array of components."""

    return GaugeField(1, eval=lambda x: np.asarray(fn(x), complex)[:, :, None, None], name=name)
