"""Nonlocal pullback of an ASD connection by a self-dual morphism.

On the alpha-plane Z through x with co-direction lt, a tangent ``v = lam lt``
pairs with the pulled-back potential as the image tangent pairs with A at
the image point:

    v . f*A (x) = (f|Z)_* v . A(f|Z(x))

The four components of f*A are read off from basis spinors and the
remaining samples are used to certify that the pairing is bilinear.
Wilson lines along the mapped planes and the patching matrix
``G = Ht H^{-1}`` give an independent check of the same construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BilinearityViolation, SingularEvaluation, TwistorError
from .field import (
    GaugeField,
    PathSpec,
    asd_residual,
    polyline,
    wilson_line,
)
from .morphism import SelfDualMorphism, sample_ball
from .report import Report, record
from .spinor import P_HAT, Q_HAT, AlphaPlane, alpha_plane, outer, plane_intersect

E2 = np.eye(2, dtype=complex)
# (lam, lt) pairs beyond the basis used for the bilinearity certificate
EXTRA_PAIRS = [
    (np.array([1, 1], complex), np.array([1, 0], complex)),
    (np.array([1, 0], complex), np.array([1, 1], complex)),
    (np.array([1, 1], complex), np.array([1, 1], complex)),
    (np.array([1, -1], complex), np.array([1, 2], complex)),
    (np.array([2, 1j], complex), np.array([0.5j, 1], complex)),
]


def pullback_component(f: SelfDualMorphism, A: GaugeField, x, lam, lt) -> np.ndarray:
    x = np.asarray(x, complex)
    lt = np.asarray(lt, complex)
    y, _ = f(x, lt)
    w = f.pushforward(x, lt, outer(lam, lt))
    return np.einsum("ab,abij->ij", w, A(y))


def bilinearity_defect(f, A, x, comps) -> float:
    worst = 0.0
    for lam, lt in EXTRA_PAIRS:
        direct = pullback_component(f, A, x, lam, lt)
        assembled = np.einsum("a,b,abij->ij", lam, lt, comps)
        worst = max(worst, float(np.linalg.norm(direct - assembled)))
    return worst


def default_bilin_tol(f: SelfDualMorphism) -> float:
    return 1e-7 if f.analytic else 1e-5


def pullback_connection_at(f, A, x, bilin_tol=None, check: bool = True, return_defect: bool = False):
    """Components ``A*[a, ad]`` of the pulled-back potential at x."""
    comps = np.array(
        [[pullback_component(f, A, x, E2[a], E2[ad]) for ad in range(2)] for a in range(2)]
    )
    if not check:
        return comps
    tol = default_bilin_tol(f) if bilin_tol is None else bilin_tol
    defect = bilinearity_defect(f, A, x, comps)
    if defect > tol:
        raise BilinearityViolation(f"pullback is not bilinear at x: defect {defect:.3e} > {tol:.1e}")
    return (comps, defect) if return_defect else comps


class PullbackField(GaugeField):
    """The GaugeField ``f*A``; derivatives fall back to finite differences."""

    def __init__(self, f: SelfDualMorphism, A: GaugeField):
        self.f = f
        self.A = A
        self._batched = f.eval_many is not None and f.push_many is not None
        super().__init__(
            n=A.n,
            eval=lambda x: pullback_connection_at(f, A, x, check=False),
            singular=self._singular,
            eval_many=self._eval_many if self._batched else None,
            singular_many=self._singular_many if self._batched else None,
            name=f"pullback[{f.name}]({A.name})",
        )

    def _singular_many(self, xs):
        bad = np.zeros(len(xs), bool)
        if self.f.singular is not None:
            bad |= np.array([self.f.singular(x, E2[0]) or self.f.singular(x, E2[1]) for x in xs])
            if np.any(bad):
                return bad
        if self.A.singular_many is not None:
            for lt in E2:
                bad |= np.asarray(self.A.singular_many(self.f.eval_many(xs, lt)))
        elif self.A.singular is not None:
            for lt in E2:
                bad |= np.array([self.A.singular(y) for y in self.f.eval_many(xs, lt)])
        return bad

    def _eval_many(self, xs):
        out = np.empty((len(xs), 2, 2, self.n, self.n), complex)
        for ad in range(2):
            lt = E2[ad]
            a_img = self.A.at_many(self.f.eval_many(xs, lt))
            for a in range(2):
                w = self.f.push_many(xs, lt, outer(E2[a], lt))
                out[:, a, ad] = np.einsum("kab,kabij->kij", w, a_img)
        return out

    def _singular(self, x) -> bool:
        try:
            for lt in E2:
                y, _ = self.f(x, lt)
                if self.A.singular is not None and self.A.singular(y):
                    return True
        except SingularEvaluation:
            return True
        return False


# -- Wilson lines along mapped planes ---------------------------------------------


def mapped_path(f: SelfDualMorphism, Z: AlphaPlane, chart_points) -> PathSpec:
    """Image under f|Z of the chart polyline through ``chart_points``."""
    chart = polyline([np.diag(np.asarray(t, complex)) for t in chart_points])

    def to_t(m):
        return np.array([m[0, 0], m[1, 1]])

    def point(ts):
        ms = chart.point(ts)
        return np.array([f(Z.point(to_t(m)), Z.codir)[0] for m in ms])

    def velocity(ts):
        ms = chart.point(ts)
        vs = chart.velocity(ts)
        out = []
        for m, dv in zip(ms, vs):
            x = Z.point(to_t(m))
            out.append(f.pushforward(x, Z.codir, outer(to_t(dv), Z.codir)))
        return np.array(out)

    return PathSpec(point, velocity, len(chart_points) - 1)


def path_independence_residual(f, A, Z: AlphaPlane, x1, x2, tol: float = 1e-9) -> float:
    """Difference of Wilson lines along the two edge orders of the chart parallelogram."""
    t1 = Z.chart(np.asarray(x1, complex))
    t2 = Z.chart(np.asarray(x2, complex))
    d = t2 - t1
    via0 = t1 + np.array([d[0], 0])
    via1 = t1 + np.array([0, d[1]])
    w_a = wilson_line(A, mapped_path(f, Z, [t1, via0, t2]), tol=tol)
    w_b = wilson_line(A, mapped_path(f, Z, [t1, via1, t2]), tol=tol)
    return float(np.linalg.norm(w_a - w_b))


@dataclass
class PatchingData:
    H: np.ndarray
    Ht: np.ndarray
    G: np.ndarray
    p: np.ndarray
    q: np.ndarray


def patching_data(f, A, Z: AlphaPlane, x, tol: float = 1e-9) -> PatchingData:
    """Transition matrix of the bundle of parallel sections over Z.

    ``H`` transports from x to p and ``Ht`` from x to q (leftmost factor at
    the end point), so ``G = Ht H^{-1}`` transports p to q and does not
    depend on x when A is integrable on the image of Z.
    """
    p = plane_intersect(Z, AlphaPlane.from_twistor(P_HAT))
    q = plane_intersect(Z, AlphaPlane.from_twistor(Q_HAT))
    tx = Z.chart(np.asarray(x, complex))
    H = wilson_line(A, mapped_path(f, Z, [tx, Z.chart(p)]), tol=tol)
    Ht = wilson_line(A, mapped_path(f, Z, [tx, Z.chart(q)]), tol=tol)
    return PatchingData(H, Ht, Ht @ np.linalg.inv(H), p, q)


def patching_route_component(f, A, Z: AlphaPlane, x, lam, h: float = 1e-4, tol: float = 1e-11) -> np.ndarray:
    """``v . f*A`` recovered from H alone as ``H^{-1} (v . dH)`` with v = lam lt."""
    v = outer(lam, Z.codir)

    def H(y):
        t = Z.chart(y)
        pt = Z.chart(plane_intersect(Z, AlphaPlane.from_twistor(P_HAT)))
        return wilson_line(A, mapped_path(f, Z, [t, pt]), tol=tol, max_steps=2**16)

    x = np.asarray(x, complex)
    dH = (H(x + h * v) - H(x - h * v)) / (2 * h)
    return np.linalg.solve(H(x), dH)


# -- the symmetry verification ----------------------------------------------------


@dataclass
class Region:
    basepoint: np.ndarray
    radius: float = 1.0
    count: int = 100
    seed: int = 0

    def sample(self, ok=None, max_tries: int = 100) -> np.ndarray:
        """Rejection-sample ``count`` points for which ``ok(x)`` holds."""
        rng = np.random.default_rng(self.seed)
        out = []
        tries = 0
        while len(out) < self.count:
            tries += 1
            if tries > max_tries * self.count:
                raise SingularEvaluation("region sampler rejected too many points")
            x = np.asarray(self.basepoint, complex) + sample_ball(rng, 1, 4, self.radius)[0].reshape(2, 2)
            if ok is None or ok(x):
                out.append(x)
        return np.array(out)


def _nonsingular(field: GaugeField, margin: float = 1e-3):
    probes = [np.zeros((2, 2))] + [margin * m for m in np.eye(4).reshape(4, 2, 2)]

    def ok(x):
        try:
            for d in probes:
                field(x + d)
                field(x - d)
        except TwistorError:
            return False
        return True

    return ok


def holonomy_defect(field: GaugeField, x, lam1, lam2, lt, side: float = 0.1, tol: float = 1e-10) -> float:
    """``|W(loop) - I|`` around a small parallelogram in the alpha-plane at x."""
    v1 = side * outer(lam1, lt)
    v2 = side * outer(lam2, lt)
    loop = polyline([x, x + v1, x + v1 + v2, x + v2, x])
    w = wilson_line(field, loop, tol=tol)
    return float(np.linalg.norm(w - np.eye(field.n)))


DEFAULT_TOLS = {"asd": 1e-5, "bilinearity": 1e-7, "holonomy": 1e-6}


def verify_morphism_symmetry(f, A, region: Region, tols=None, holonomy_samples=None) -> Report:
    """Check that ``f*A`` is again ASD on the sampled region.

    Records (i) the self-dual curvature of ``f*A`` by finite differences,
    (ii) the bilinearity defect and (iii) small alpha-plane holonomies.
    Per-sample failures are collected instead of aborting the run.
    """
    tols = dict(DEFAULT_TOLS, **(tols or {}))
    if not f.analytic and "bilinearity" not in (tols or {}):
        tols["bilinearity"] = 1e-5
    pb = PullbackField(f, A)
    pts = region.sample(_nonsingular(pb))
    rng = np.random.default_rng(region.seed + 1)
    n_hol = len(pts) if holonomy_samples is None else min(holonomy_samples, len(pts))
    asd, bil, hol = [], [], []
    errors = {"asd": [], "bilinearity": [], "holonomy": []}
    for k, x in enumerate(pts):
        try:
            asd.append(asd_residual(pb, x))
        except TwistorError as exc:
            errors["asd"].append(f"sample {k}: {type(exc).__name__}: {exc}")
        try:
            _, defect = pullback_connection_at(f, A, x, bilin_tol=np.inf, return_defect=True)
            bil.append(defect)
        except TwistorError as exc:
            errors["bilinearity"].append(f"sample {k}: {type(exc).__name__}: {exc}")
        if k < n_hol:
            lam1, lam2, lt = sample_ball(rng, 3, 2) + np.array([[1, 0], [0, 1], [1, 1]])
            try:
                hol.append(holonomy_defect(pb, x, lam1, lam2, lt))
            except TwistorError as exc:
                errors["holonomy"].append(f"sample {k}: {type(exc).__name__}: {exc}")
    anchor = "self-dual morphisms preserve ASDYM under the nonlocal pullback"
    return Report(
        [
            record("pullback_asd_residual", anchor, asd, tols["asd"], errors["asd"]),
            record("pullback_bilinearity", "pullback pairing is bilinear in (lam, lt)", bil, tols["bilinearity"], errors["bilinearity"]),
            record("pullback_alpha_holonomy", "[v1.D*, v2.D*] = 0 on alpha-planes", hol, tols["holonomy"], errors["holonomy"]),
        ]
    )


# -- catalog control -------------------------------------------------------------


def shear_sd(eps: complex = 0.3, margin: float = 1e-6) -> SelfDualMorphism:
    """Self-dual morphism whose pullback is not bilinear.

    ``x -> x + eps lt lt^T / (lt0^2 + lt1^2)`` slides each alpha-plane
    along itself, so contact holds, but the shift is singular on CP^1 and
    the pullback pairing fails to be linear in lt.
    """

    def q(lt):
        return lt[0] ** 2 + lt[1] ** 2

    def ev(x, lt):
        return x + eps * np.outer(lt, lt) / q(lt), lt

    return SelfDualMorphism(
        ev,
        push=lambda x, lt, v: v,
        singular=lambda x, lt: abs(q(lt)) < margin * float(np.vdot(lt, lt).real),
        name="shear",
    )
