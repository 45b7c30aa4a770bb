"""Self-dual and causal morphisms, prolongations and contact certification.

A self-dual morphism acts on the correspondence space C^4 x CP^1 through
``eval(x, lt) -> (x', lt')``.  It preserves the contact condition when every
prolonged alpha-surface maps to a prolonged alpha-surface; this module checks
that on sampled surfaces rather than assuming it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NoCommonFactor, SingularEvaluation, SingularMatrix, TwistorError
from .spinor import (
    AlphaPlane,
    NullLine,
    factor_null,
    null_residual,
    outer,
    projective_distance,
)

FD_STEP = 1e-5


def _directional(fn, x, v, h=FD_STEP):
    """Holomorphic directional derivative of ``fn`` at x along v (Richardson)."""
    d1 = (fn(x + h * v) - fn(x - h * v)) / (2 * h)
    d2 = (fn(x + 0.5 * h * v) - fn(x - 0.5 * h * v)) / h
    return (4 * d2 - d1) / 3


@dataclass
class SelfDualMorphism:
    eval: Callable
    push: Optional[Callable] = None  # (x, lt, v) -> pushforward of v at fixed lt
    singular: Optional[Callable] = None
    name: str = "morphism"
    # optional vectorised forms over a stack of points at one fibre value
    eval_many: Optional[Callable] = None  # (xs, lt) -> xs'
    push_many: Optional[Callable] = None  # (xs, lt, v) -> stack of pushforwards

    def __call__(self, x, lt):
        x = np.asarray(x, complex)
        if self.singular is not None and self.singular(x, lt):
            raise SingularEvaluation(f"{self.name} is singular at {x.ravel()}")
        return self.eval(x, np.asarray(lt, complex))

    def pushforward(self, x, lt, v):
        if self.push is not None:
            self(x, lt)  # singularity check
            return self.push(np.asarray(x, complex), np.asarray(lt, complex), np.asarray(v, complex))
        return _directional(lambda y: self(y, lt)[0], np.asarray(x, complex), np.asarray(v, complex))

    @property
    def analytic(self) -> bool:
        return self.push is not None


@dataclass
class CausalMorphism:
    eval: Callable  # (x, lam, lt) -> (x', lam', lt')
    push: Optional[Callable] = None  # (x, lam, lt, v) -> pushforward at fixed fibre
    singular: Optional[Callable] = None
    name: str = "causal"
    affine: Optional[tuple] = None  # (Lam, Lt, b) when the map is a lifted affine map

    def __call__(self, x, lam, lt):
        x = np.asarray(x, complex)
        if self.singular is not None and self.singular(x, lam, lt):
            raise SingularEvaluation(f"{self.name} is singular at {x.ravel()}")
        return self.eval(x, np.asarray(lam, complex), np.asarray(lt, complex))

    def pushforward(self, x, lam, lt, v):
        if self.push is not None:
            self(x, lam, lt)
            return self.push(np.asarray(x, complex), lam, lt, np.asarray(v, complex))
        return _directional(lambda y: self(y, lam, lt)[0], np.asarray(x, complex), np.asarray(v, complex))


@dataclass
class SurfaceMap:
    """Candidate self-dual embedding chi: C^2 -> C^4."""

    chi: Callable
    jac: Optional[Callable] = None  # t -> array (2, 2, 2): column k is d chi / d t_k

    def __call__(self, t):
        return self.chi(np.asarray(t, complex))

    def columns(self, t) -> np.ndarray:
        t = np.asarray(t, complex)
        if self.jac is not None:
            return np.asarray(self.jac(t))
        return np.array([_directional(self.chi, t, e) for e in np.eye(2, dtype=complex)])


@dataclass
class Prolongation:
    base: SurfaceMap
    codir: Callable  # t -> CoSpinor

    def __call__(self, t):
        return self.base(t), self.codir(np.asarray(t, complex))


@dataclass
class ContactReport:
    max_residual: float
    mean_residual: float
    samples: int
    residuals: list

    def passed(self, tol: float) -> bool:
        return self.max_residual < tol


def _report(res) -> ContactReport:
    res = [float(r) for r in res]
    return ContactReport(max(res), float(np.mean(res)), len(res), res)


def common_codirection(cols, tol: float = 1e-8):
    """Right factor shared by two null tangent columns, plus the fit residual."""
    factors = []
    for c in cols:
        _, lt = factor_null(c, tol=tol)
        factors.append(lt)
    res = projective_distance(factors[0], factors[1])
    return factors[0], res


def prolong(chi: SurfaceMap, t, tol: float = 1e-8):
    """Tangent co-spinor of a self-dual embedding at t.

    Returns ``(lt, residual)``; raises when a column is not null or the
    two columns do not share a right factor within tol.
    """
    cols = chi.columns(t)
    lt, res = common_codirection(cols, tol=tol)
    if res > tol:
        raise NoCommonFactor(f"tangent columns have different co-directions (residual {res:.3e})")
    return lt, res


def contact_residual(cols, fiber) -> float:
    """Largest of the three contact defects for image tangents ``cols``."""
    nulls = max(null_residual(c) for c in cols)
    try:
        lts = [factor_null(c, tol=np.inf)[1] for c in cols]
    except TwistorError:
        return float("inf")
    common = projective_distance(lts[0], lts[1])
    match = projective_distance(lts[0], fiber)
    return max(nulls, common, match)


def check_contact(f: SelfDualMorphism, prol: Prolongation, samples) -> ContactReport:
    """Contact defect of ``f`` composed with a prolonged surface at each sample t."""
    res = []
    for t in samples:
        t = np.asarray(t, complex)
        x, lt = prol(t)
        cols = prol.base.columns(t)
        if f.push is not None:
            img = [f.pushforward(x, lt, c) for c in cols]
        else:
            img = [
                _directional(lambda s: f(prol.base(s), prol.codir(s))[0], t, e)
                for e in np.eye(2, dtype=complex)
            ]
        _, lt_img = f(x, lt)
        res.append(contact_residual(img, lt_img))
    return _report(res)


def contract_plane(f: SelfDualMorphism, Z: AlphaPlane) -> SurfaceMap:
    """``t -> pi_1 f(Z.point(t), Z.codir)`` in the plane's own chart."""

    def chi(t):
        return f(Z.point(t), Z.codir)[0]

    jac = None
    if f.push is not None:

        def jac(t):
            x = Z.point(t)
            return np.array([f.pushforward(x, Z.codir, outer(e, Z.codir)) for e in np.eye(2, dtype=complex)])

    return SurfaceMap(chi, jac)


def plane_prolongation(Z: AlphaPlane) -> Prolongation:
    chart = SurfaceMap(Z.point, lambda t: np.array([outer(e, Z.codir) for e in np.eye(2, dtype=complex)]))
    return Prolongation(chart, lambda t: Z.codir)


# -- surfaces built by integrating a tangent distribution ---------------------


def integrate_null_surface(lam_fields, codir, base, t, steps: int = 64, order: str = "01"):
    """Integrate ``d chi / d t_k = lam_k(t) (x) codir(t)`` from t = 0 to t with RK4.

    The path first moves along the coordinate ``order[0]`` and then along
    ``order[1]``.  For an integrable distribution the end point does not
    depend on ``order``.
    """
    t = np.asarray(t, complex)
    x = np.asarray(base, complex).copy()
    cur = np.zeros(2, complex)
    for k in (int(order[0]), int(order[1])):
        start = cur.copy()
        d = t[k]
        h = 1.0 / steps

        def rhs(u):
            p = start.copy()
            p[k] = start[k] + u * d
            return d * outer(lam_fields[k](p), codir(p))

        for i in range(steps):
            u = i * h
            k1 = rhs(u)
            k2 = rhs(u + h / 2)
            k3 = rhs(u + h / 2)
            k4 = rhs(u + h)
            x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        cur[k] = t[k]
    return x


def curved_surface(base, codir, coeffs=(0.3, -0.2, 0.25), steps: int = 64) -> Prolongation:
    """Self-dual surface with a nonlinear chart, built by RK4 integration.

    The chart is ``phi(t) = (t0 + a t1^2, t1 + b t0 t1 + c t0^2)`` and the
    tangent distribution ``d chi/d t_k = d_k phi (x) codir`` is integrated
    numerically; the Jacobian columns are supplied analytically.
    """
    a, b, c = coeffs
    codir = np.asarray(codir, complex)

    def dphi0(t):
        return np.array([1.0, b * t[1] + 2 * c * t[0]], complex)

    def dphi1(t):
        return np.array([2 * a * t[1], 1.0 + b * t[0]], complex)

    def chi(t):
        return integrate_null_surface([dphi0, dphi1], lambda p: codir, base, t, steps)

    def jac(t):
        return np.array([outer(dphi0(t), codir), outer(dphi1(t), codir)])

    return Prolongation(SurfaceMap(chi, jac), lambda t: codir)


# -- catalog -------------------------------------------------------------------


def identity_sd() -> SelfDualMorphism:
    return SelfDualMorphism(
        lambda x, lt: (x, lt),
        push=lambda x, lt, v: v,
        name="identity",
        eval_many=lambda xs, lt: xs,
        push_many=lambda xs, lt, v: np.broadcast_to(v, xs.shape),
    )


def lifted_affine_sd(Lam, Lt, b=None) -> SelfDualMorphism:
    """Point transformation ``x -> Lam x Lt^T + b`` lifted by ``lt -> Lt lt``."""
    Lam = np.asarray(Lam, complex)
    Lt = np.asarray(Lt, complex)
    b = np.zeros((2, 2), complex) if b is None else np.asarray(b, complex)
    if abs(np.linalg.det(Lam)) < 1e-14 or abs(np.linalg.det(Lt)) < 1e-14:
        raise SingularMatrix("lifted affine map needs invertible Lam and Lt")
    return SelfDualMorphism(
        lambda x, lt: (Lam @ x @ Lt.T + b, Lt @ lt),
        push=lambda x, lt, v: Lam @ v @ Lt.T,
        name="lifted_affine",
        eval_many=lambda xs, lt: Lam @ xs @ Lt.T + b,
        push_many=lambda xs, lt, v: np.broadcast_to(Lam @ v @ Lt.T, xs.shape),
    )


def dilation_sd(a: complex) -> SelfDualMorphism:
    f = lifted_affine_sd(a * np.eye(2), np.eye(2))
    f.name = "dilation"
    return f


def inversion_sd(margin: float = 1e-8) -> SelfDualMorphism:
    """Inversion ``x -> x^{-1}``; alpha-planes go to alpha-planes.

    On the plane through x with co-direction lt the image tangents are
    ``-x^{-1} lam lt^T x^{-1}``, whose right factor ``adj(x)^T lt`` is
    constant along the plane.
    """

    def adj(m):
        return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])

    def ev(x, lt):
        return np.linalg.inv(x), adj(x).T @ lt

    def push(x, lt, v):
        xi = np.linalg.inv(x)
        return -xi @ v @ xi

    def singular(x, lt):
        return abs(np.linalg.det(x)) < margin

    def push_many(xs, lt, v):
        xi = np.linalg.inv(xs)
        return -xi @ v @ xi

    return SelfDualMorphism(
        ev,
        push=push,
        singular=singular,
        name="inversion",
        eval_many=lambda xs, lt: np.linalg.inv(xs),
        push_many=push_many,
    )


def squaring_sd() -> SelfDualMorphism:
    """Negative control: componentwise square, fibre untouched."""
    return SelfDualMorphism(lambda x, lt: (x * x, lt), push=lambda x, lt, v: 2 * x * v, name="squaring")


def compose_sd(f: SelfDualMorphism, g: SelfDualMorphism) -> SelfDualMorphism:
    """``f o g``."""

    def ev(x, lt):
        y, mt = g(x, lt)
        return f(y, mt)

    push = None
    if f.push is not None and g.push is not None:

        def push(x, lt, v):
            y, mt = g(x, lt)
            return f.pushforward(y, mt, g.pushforward(x, lt, v))

    return SelfDualMorphism(ev, push=push, name=f"{f.name}*{g.name}")


def random_gl2(rng, scale: float = 0.4) -> np.ndarray:
    m = np.eye(2) + scale * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return m.astype(complex)


def random_lifted_affine_sd(seed: int = 42) -> SelfDualMorphism:
    rng = np.random.default_rng(seed)
    Lam, Lt = random_gl2(rng), random_gl2(rng)
    b = 0.3 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return lifted_affine_sd(Lam, Lt, b)


# -- causal morphisms on null curves ---------------------------------------------


@dataclass
class NullCurve:
    curve: Callable  # s -> point
    tangent: Optional[Callable] = None  # s -> d curve / ds

    def __call__(self, s):
        return self.curve(s)

    def velocity(self, s):
        if self.tangent is not None:
            return np.asarray(self.tangent(s), complex)
        h = FD_STEP
        d1 = (self.curve(s + h) - self.curve(s - h)) / (2 * h)
        d2 = (self.curve(s + h / 2) - self.curve(s - h / 2)) / h
        return (4 * d2 - d1) / 3


def prolong_null_curve(chi: NullCurve, s, tol: float = 1e-8):
    return factor_null(chi.velocity(s), tol=tol)


def line_curve(L: NullLine) -> NullCurve:
    return NullCurve(L.point, lambda s: L.tangent)


def twisted_null_curve(base) -> NullCurve:
    """Null curve with tangent ``(1, s) (x) (1, s^2)``, in closed form."""
    base = np.asarray(base, complex)

    def curve(s):
        return base + np.array([[s, s**3 / 3], [s**2 / 2, s**4 / 4]], complex)

    def tangent(s):
        return outer([1, s], [1, s * s])

    return NullCurve(curve, tangent)


def check_contact_causal(f: CausalMorphism, chi: NullCurve, samples) -> ContactReport:
    """Image tangent must be null with factors matching the image fibre."""
    res = []
    for s in samples:
        v = chi.velocity(s)
        lam, lt = factor_null(v, tol=1e-8)
        x = chi(s)
        w = f.pushforward(x, lam, lt, v)
        _, lam2, lt2 = f(x, lam, lt)
        nul = null_residual(w)
        try:
            wl, wr = factor_null(w, tol=np.inf)
        except TwistorError:
            res.append(float("inf"))
            continue
        res.append(max(nul, projective_distance(wl, lam2), projective_distance(wr, lt2)))
    return _report(res)


def contract_line(f: CausalMorphism, L: NullLine) -> NullCurve:
    def curve(s):
        return f(L.point(s), L.dir_l, L.dir_r)[0]

    tangent = None
    if f.push is not None:

        def tangent(s):
            return f.pushforward(L.point(s), L.dir_l, L.dir_r, L.tangent)

    return NullCurve(curve, tangent)


def identity_causal() -> CausalMorphism:
    return CausalMorphism(
        lambda x, lam, lt: (x, lam, lt),
        push=lambda x, lam, lt, v: v,
        name="identity",
        affine=(np.eye(2, dtype=complex), np.eye(2, dtype=complex), np.zeros((2, 2), complex)),
    )


def lifted_affine_causal(Lam, Lt, b=None) -> CausalMorphism:
    Lam = np.asarray(Lam, complex)
    Lt = np.asarray(Lt, complex)
    b = np.zeros((2, 2), complex) if b is None else np.asarray(b, complex)
    if abs(np.linalg.det(Lam)) < 1e-14 or abs(np.linalg.det(Lt)) < 1e-14:
        raise SingularMatrix("lifted affine map needs invertible Lam and Lt")
    return CausalMorphism(
        lambda x, lam, lt: (Lam @ x @ Lt.T + b, Lam @ lam, Lt @ lt),
        push=lambda x, lam, lt, v: Lam @ v @ Lt.T,
        name="lifted_affine",
        affine=(Lam, Lt, b),
    )


def random_lifted_affine_causal(seed: int = 42) -> CausalMorphism:
    rng = np.random.default_rng(seed)
    Lam, Lt = random_gl2(rng), random_gl2(rng)
    b = 0.3 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return lifted_affine_causal(Lam, Lt, b)


def squaring_causal() -> CausalMorphism:
    return CausalMorphism(
        lambda x, lam, lt: (x * x, lam, lt),
        push=lambda x, lam, lt, v: 2 * x * v,
        name="squaring",
    )


def compose_causal(f: CausalMorphism, g: CausalMorphism) -> CausalMorphism:
    def ev(x, lam, lt):
        return f(*g(x, lam, lt))

    push = None
    if f.push is not None and g.push is not None:

        def push(x, lam, lt, v):
            y, m, mt = g(x, lam, lt)
            return f.pushforward(y, m, mt, g.pushforward(x, lam, lt, v))

    return CausalMorphism(ev, push=push, name=f"{f.name}*{g.name}")


# -- certification suite ---------------------------------------------------------


def sample_ball(rng, n: int, dim: int, radius: float = 1.0) -> np.ndarray:
    """Uniform samples from the complex ball of the given radius in C^dim."""
    z = rng.normal(size=(n, 2 * dim))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    r = radius * rng.uniform(size=(n, 1)) ** (1.0 / (2 * dim))
    z *= r
    return z[:, :dim] + 1j * z[:, dim:]


def certification_suite(seed: int = 0, samples: int = 25):
    """Three flat plane prolongations and two curved surfaces, with sample charts."""
    rng = np.random.default_rng(seed)
    suite = []
    for _ in range(3):
        base = sample_ball(rng, 1, 4)[0].reshape(2, 2)
        codir = sample_ball(rng, 1, 2)[0] + np.array([1.0, 0.0])
        suite.append(plane_prolongation(AlphaPlane(base, codir)))
    for k in range(2):
        base = sample_ball(rng, 1, 4)[0].reshape(2, 2)
        codir = sample_ball(rng, 1, 2)[0] + np.array([0.0, 1.0])
        suite.append(curved_surface(base, codir, coeffs=(0.3 + 0.1 * k, -0.2, 0.25)))
    ts = sample_ball(rng, samples, 2, radius=0.5)
    return suite, ts


def certify_sd(f: SelfDualMorphism, seed: int = 0, samples: int = 25) -> ContactReport:
    suite, ts = certification_suite(seed, samples)
    res = []
    for prol in suite:
        res.extend(check_contact(f, prol, ts).residuals)
    return _report(res)


def causal_suite(seed: int = 0):
    rng = np.random.default_rng(seed)
    curves = []
    for _ in range(3):
        base = sample_ball(rng, 1, 4)[0].reshape(2, 2)
        lam = sample_ball(rng, 1, 2)[0] + np.array([1.0, 0.0])
        lt = sample_ball(rng, 1, 2)[0] + np.array([0.0, 1.0])
        curves.append(line_curve(NullLine(base, lam, lt)))
    curves.append(twisted_null_curve(sample_ball(rng, 1, 4)[0].reshape(2, 2)))
    ss = sample_ball(rng, 25, 1, radius=0.8)[:, 0]
    return curves, ss


def certify_causal(f: CausalMorphism, seed: int = 0) -> ContactReport:
    curves, ss = causal_suite(seed)
    res = []
    for c in curves:
        res.extend(check_contact_causal(f, c, ss).residuals)
    return _report(res)


