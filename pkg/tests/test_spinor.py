import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistorsym.errors import NotNull, ParallelPlanes, ZeroVector
from twistorsym.spinor import (
    EPS,
    P_HAT,
    Q_HAT,
    AlphaPlane,
    NullLine,
    contract,
    det,
    factor_null,
    incidence,
    lower,
    null_residual,
    outer,
    plane_intersect,
    projective_distance,
    raise_,
    spinor,
)

cplx = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
spinors = st.tuples(cplx, cplx).map(lambda t: np.array(t, complex))
points = st.lists(cplx, min_size=4, max_size=4).map(lambda v: np.array(v, complex).reshape(2, 2))


def test_epsilon_squares_to_minus_one():
    assert np.allclose(EPS @ EPS, -np.eye(2))


@given(spinors)
def test_lower_and_raise_are_inverse(lam):
    assert np.allclose(raise_(lower(lam)), lam)
    assert np.allclose(lower(raise_(lam)), lam)


@given(spinors, spinors)
def test_contract_matches_determinant(a, b):
    # independent formula: a^0 b^1 - a^1 b^0
    assert np.isclose(contract(a, b), a[0] * b[1] - a[1] * b[0])
    assert np.isclose(contract(a, b), -contract(b, a))


@given(spinors, spinors)
def test_outer_is_null(lam, lt):
    v = outer(lam, lt)
    assert abs(det(v)) <= 1e-9 * (1 + np.abs(v).max() ** 2)


@given(spinors, spinors)
def test_factor_null_round_trip(lam, lt):
    v = outer(lam, lt)
    if np.abs(v).max() < 1e-6:
        return
    l2, r2 = factor_null(v, tol=1e-8)
    assert np.allclose(outer(l2, r2), v, atol=1e-9 * np.abs(v).max())
    assert projective_distance(l2, lam) < 1e-8


def test_factor_null_errors():
    with pytest.raises(NotNull):
        factor_null(np.eye(2))
    with pytest.raises(ZeroVector):
        factor_null(np.zeros((2, 2)))


def test_null_residual_scale_free():
    v = np.array([[1, 2], [3, 4]], complex)
    assert np.isclose(null_residual(v), null_residual(7j * v))


@given(points, spinors, spinors)
@settings(max_examples=60)
def test_points_of_alpha_plane_share_twistor(x, lt, mu):
    if np.linalg.norm(lt) < 1e-3:
        return
    Z = AlphaPlane(x, lt)
    p = Z.point(mu)
    assert Z.contains(p, tol=1e-8 * (1 + np.abs(p).max()))
    assert incidence(p, lt).projectively_equal(Z.twistor(), tol=1e-8)
    assert np.allclose(Z.chart(p), mu)


def test_from_twistor_recovers_plane():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    lt = spinor(0.4, 1.2 - 0.3j)
    Z = AlphaPlane.from_twistor(incidence(x, lt))
    assert Z.contains(x)


@pytest.mark.parametrize("seed", range(5))
def test_plane_intersection_lies_on_both(seed):
    rng = np.random.default_rng(seed)
    z = AlphaPlane(rng.normal(size=(2, 2)) + 0j, rng.normal(size=2) + 1j * rng.normal(size=2))
    w = AlphaPlane(rng.normal(size=(2, 2)) + 0j, rng.normal(size=2) + 1j * rng.normal(size=2))
    p = plane_intersect(z, w)
    assert z.contains(p, 1e-9) and w.contains(p, 1e-9)


def test_reference_planes_meet_at_origin():
    p = plane_intersect(AlphaPlane.from_twistor(P_HAT), AlphaPlane.from_twistor(Q_HAT))
    assert np.allclose(p, 0)


def test_parallel_planes_raise():
    lt = spinor(1, 2)
    with pytest.raises(ParallelPlanes):
        plane_intersect(AlphaPlane(np.zeros((2, 2)), lt), AlphaPlane(np.eye(2), 3 * lt))


def test_null_line_tangent():
    L = NullLine(np.eye(2, dtype=complex), spinor(1, 2j), spinor(0.5, -1))
    assert np.allclose(L.point(2.0) - L.point(0.0), 2 * L.tangent)
    assert null_residual(L.tangent) < 1e-15
