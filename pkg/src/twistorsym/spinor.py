"""Two-component spinor algebra on complexified Minkowski space.

Points and vectors of C^4 are stored as complex 2x2 arrays ``x[a, ad]``
(undotted index first).  Spinors and co-spinors are complex arrays of shape
(2,).  Conventions:

* epsilon: ``EPS[0, 1] = +1`` for both the lowered and raised symbol, so
  ``EPS @ EPS == -I``.
* lowering: ``lam_b = lam^a EPS[a, b]``; raising: ``lam^a = EPS[a, b] lam_b``.
  The two are mutually inverse.
* incidence: ``omega^a = x^{a ad} lt_ad`` with ``lt_ad = lower(lt)``.

Every index manipulation in the package goes through :func:`lower` and
:func:`raise_`, so the convention is tested in one place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotNull, ParallelPlanes, AtInfinity, ZeroVector

EPS = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
DEFAULT_TOL = 1e-10


def spinor(a, b=None) -> np.ndarray:
    if b is None:
        return np.asarray(a, dtype=complex).reshape(2)
    return np.array([a, b], dtype=complex)


def lower(lam: np.ndarray) -> np.ndarray:
    return EPS.T @ np.asarray(lam, dtype=complex)


def raise_(lam_low: np.ndarray) -> np.ndarray:
    return EPS @ np.asarray(lam_low, dtype=complex)


def contract(a: np.ndarray, b: np.ndarray) -> complex:
    """Invariant pairing ``a^A EPS[A, B] b^B`` (antisymmetric)."""
    return complex(np.asarray(a) @ EPS @ np.asarray(b))


def outer(lam: np.ndarray, lt: np.ndarray) -> np.ndarray:
    return np.outer(np.asarray(lam, dtype=complex), np.asarray(lt, dtype=complex))


def det(v: np.ndarray) -> complex:
    return complex(v[0, 0] * v[1, 1] - v[0, 1] * v[1, 0])


def null_residual(v: np.ndarray) -> float:
    """Scale free nullity defect ``|det v| / |v|^2`` (0 for a rank-1 bispinor)."""
    n2 = float(np.sum(np.abs(v) ** 2))
    if n2 == 0.0:
        return 0.0
    return abs(det(v)) / n2


def factor_null(v: np.ndarray, tol: float = DEFAULT_TOL):
    """Split a null bispinor as ``outer(lam, lt)``.

    The largest entry of ``v`` is the pivot; ``lam`` is the pivot column
    scaled so its pivot component is 1, and ``lt`` is the pivot row, which
    carries the whole scale.
    """
    v = np.asarray(v, dtype=complex)
    if not np.any(v):
        raise ZeroVector("cannot factor the zero bispinor")
    if null_residual(v) > tol:
        raise NotNull(f"bispinor is not null: |det|/|v|^2 = {null_residual(v):.3e}")
    i, j = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    lam = v[:, j] / v[i, j]
    lt = v[i, :].copy()
    return lam, lt


def normalize(s: np.ndarray) -> np.ndarray:
    """Projective representative with the largest component set to 1."""
    s = np.asarray(s, dtype=complex)
    k = int(np.argmax(np.abs(s)))
    if s[k] == 0:
        raise ZeroVector("zero spinor has no projective class")
    return s / s[k]


def projective_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Distance between projective classes using the pivot of ``a``.

    Both vectors are divided by their component at the pivot index of
    ``a``; returns inf when ``b`` vanishes there.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    k = int(np.argmax(np.abs(a)))
    if a[k] == 0:
        raise ZeroVector("zero spinor has no projective class")
    if abs(b[k]) <= 1e-300:
        return float("inf")
    return float(np.linalg.norm(a / a[k] - b / b[k]))


@dataclass(frozen=True)
class Twistor:
    omega: np.ndarray
    pi: np.ndarray

    def vector(self) -> np.ndarray:
        return np.concatenate([self.omega, self.pi])

    def projectively_equal(self, other: "Twistor", tol: float = DEFAULT_TOL) -> bool:
        return projective_distance(self.vector(), other.vector()) <= tol


P_HAT = Twistor(np.zeros(2, complex), spinor(1, 0))
Q_HAT = Twistor(np.zeros(2, complex), spinor(0, 1))


def incidence(x: np.ndarray, lt: np.ndarray) -> Twistor:
    lt = np.asarray(lt, dtype=complex)
    if not np.any(lt):
        raise ZeroVector("incidence needs a nonzero co-spinor")
    return Twistor(np.asarray(x, dtype=complex) @ lower(lt), lt.copy())


@dataclass(frozen=True)
class AlphaPlane:
    """The set ``{base + outer(mu, codir)}`` for mu in C^2."""

    base: np.ndarray
    codir: np.ndarray

    def point(self, mu) -> np.ndarray:
        return self.base + outer(mu, self.codir)

    def contains(self, p: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
        return float(np.linalg.norm((p - self.base) @ lower(self.codir))) <= tol

    def twistor(self) -> Twistor:
        return incidence(self.base, self.codir)

    def chart(self, p: np.ndarray) -> np.ndarray:
        """Inverse of :meth:`point` for a point on the plane."""
        k = int(np.argmax(np.abs(self.codir)))
        return (p - self.base)[:, k] / self.codir[k]

    @classmethod
    def from_twistor(cls, z: Twistor) -> "AlphaPlane":
        # x @ lower(pi) = omega has the particular solution below
        pl = lower(z.pi)
        k = int(np.argmax(np.abs(pl)))
        x = np.zeros((2, 2), complex)
        x[:, k] = z.omega / pl[k]
        return cls(x, np.asarray(z.pi, dtype=complex))


def alpha_plane(x: np.ndarray, lt: np.ndarray) -> AlphaPlane:
    return AlphaPlane(np.asarray(x, dtype=complex), np.asarray(lt, dtype=complex))


@dataclass(frozen=True)
class NullLine:
    base: np.ndarray
    dir_l: np.ndarray
    dir_r: np.ndarray

    def point(self, s) -> np.ndarray:
        return self.base + s * outer(self.dir_l, self.dir_r)

    @property
    def tangent(self) -> np.ndarray:
        return outer(self.dir_l, self.dir_r)


def plane_intersect(z: AlphaPlane, w: AlphaPlane, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Common point of two alpha-planes.

    Solves the 4x4 system ``x @ lower(codir) = omega`` for both planes,
    unknowns ordered as ``x.ravel()``.
    """
    if projective_distance(z.codir, w.codir) <= tol or abs(contract(z.codir, w.codir)) <= tol * np.linalg.norm(z.codir) * np.linalg.norm(w.codir):
        raise ParallelPlanes("alpha-planes share a co-direction")
    rows = []
    rhs = []
    for plane in (z, w):
        lt_low = lower(plane.codir)
        omega = plane.base @ lt_low
        for a in range(2):
            row = np.zeros(4, complex)
            row[2 * a : 2 * a + 2] = lt_low
            rows.append(row)
            rhs.append(omega[a])
    m = np.array(rows)
    if abs(np.linalg.det(m)) <= tol * max(1.0, np.linalg.norm(m) ** 4):
        raise AtInfinity("incidence system is singular")
    x = np.linalg.solve(m, np.array(rhs)).reshape(2, 2)
    return x
