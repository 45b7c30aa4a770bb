import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistorsym import morphism as M
from twistorsym.errors import NoCommonFactor
from twistorsym.spinor import AlphaPlane, NullLine, outer, projective_distance

SD_CATALOG = {
    "identity": M.identity_sd,
    "affine": lambda: M.random_lifted_affine_sd(42),
    "dilation": lambda: M.dilation_sd(1.7 - 0.2j),
    "inversion": M.inversion_sd,
    "affine_then_inversion": lambda: M.compose_sd(M.inversion_sd(), M.random_lifted_affine_sd(7)),
}


@pytest.mark.parametrize("name", sorted(SD_CATALOG))
def test_catalog_morphisms_satisfy_contact(name):
    rep = M.certify_sd(SD_CATALOG[name](), seed=1)
    assert rep.max_residual < 1e-8
    assert rep.samples == 125


def test_squaring_breaks_contact():
    assert M.certify_sd(M.squaring_sd()).max_residual > 1e-3


@pytest.mark.parametrize("seed", range(3))
def test_inversion_pushforward_matches_fd(seed):
    rng = np.random.default_rng(seed)
    f = M.inversion_sd()
    x = 2 * np.eye(2) + 0.3 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    lt = rng.normal(size=2) + 1j * rng.normal(size=2)
    v = rng.normal(size=(2, 2)) + 0j
    fd = M._directional(lambda y: f(y, lt)[0], x, v)
    assert np.max(np.abs(f.pushforward(x, lt, v) - fd)) < 1e-8


def test_inversion_batched_matches_pointwise():
    f = M.inversion_sd()
    rng = np.random.default_rng(2)
    xs = 2 * np.eye(2) + 0.2 * rng.normal(size=(4, 2, 2))
    lt = np.array([1.0, 0.4j])
    v = np.array([[0.1, 0.2], [0.3j, -0.4]])
    xb, pb = f.eval_many(xs, lt), f.push_many(xs, lt, v)
    for k, x in enumerate(xs):
        assert np.allclose(xb[k], f(x, lt)[0])
        assert np.allclose(pb[k], f.pushforward(x, lt, v))


def test_lifted_affine_maps_planes_to_planes():
    f = M.random_lifted_affine_sd(3)
    Z = AlphaPlane(np.eye(2, dtype=complex), np.array([0.3, 1.0]))
    chi = M.contract_plane(f, Z)
    for t in ([0, 0], [0.5, -1j], [2, 1]):
        cols = chi.columns(np.array(t, complex))
        lt, res = M.common_codirection(cols)
        assert res < 1e-10
        assert projective_distance(lt, f(Z.point(np.array(t)), Z.codir)[1]) < 1e-10


def test_prolong_rejects_non_self_dual_surface():
    chi = M.SurfaceMap(
        lambda t: np.zeros((2, 2)),
        lambda t: np.array([outer([1, 0], [1, 0]), outer([0, 1], [0, 1])]),
    )
    with pytest.raises(NoCommonFactor):
        M.prolong(chi, np.zeros(2))


def test_constant_codirection_surface_is_path_independent():
    base = np.zeros((2, 2), complex)
    prol = M.curved_surface(base, np.array([0.2, 1.0]))
    lams = [lambda p: np.array([1, -0.2 * p[1] + 0.5 * p[0]]), lambda p: np.array([0.6 * p[1], 1 - 0.2 * p[0]])]
    codir = lambda p: np.array([0.2, 1.0])
    t = np.array([0.4, -0.3j])
    x01 = M.integrate_null_surface(lams, codir, base, t, order="01")
    x10 = M.integrate_null_surface(lams, codir, base, t, order="10")
    assert np.max(np.abs(x01 - x10)) < 1e-10
    assert np.max(np.abs(prol.base(t) - x01)) < 1e-10


def test_varying_codirection_is_not_integrable():
    # lambda_0 = (1, 0), lambda_1 = (0, 1), lt(t) = (1, t_1): the two integration orders disagree
    lams = [lambda p: np.array([1.0, 0.0]), lambda p: np.array([0.0, 1.0])]
    codir = lambda p: np.array([1.0, p[1]])
    t = np.array([0.5, 0.5])
    x01 = M.integrate_null_surface(lams, codir, np.zeros((2, 2)), t, order="01")
    x10 = M.integrate_null_surface(lams, codir, np.zeros((2, 2)), t, order="10")
    assert np.max(np.abs(x01 - x10)) > 1e-2


def test_curved_surface_jacobian_matches_fd():
    prol = M.curved_surface(np.eye(2, dtype=complex), np.array([1.0, 0.3j]), steps=128)
    t = np.array([0.2, 0.1])
    jac = prol.base.columns(t)
    for k in range(2):
        e = np.eye(2)[k]
        fd = M._directional(lambda s: prol.base(s), t.astype(complex), e.astype(complex))
        assert np.max(np.abs(fd - jac[k])) < 1e-6


CAUSAL = {
    "identity": M.identity_causal,
    "affine": lambda: M.random_lifted_affine_causal(42),
    "composed": lambda: M.compose_causal(M.random_lifted_affine_causal(1), M.random_lifted_affine_causal(2)),
}


@pytest.mark.parametrize("name", sorted(CAUSAL))
def test_causal_catalog_certified(name):
    assert M.certify_causal(CAUSAL[name]()).max_residual < 1e-8


def test_causal_squaring_detected():
    assert M.certify_causal(M.squaring_causal()).max_residual > 1e-3


def test_affine_image_of_line_has_expected_tangent():
    f = M.random_lifted_affine_causal(5)
    Lam, Lt, _ = f.affine
    L = NullLine(np.eye(2, dtype=complex), np.array([1.0, 0.5j]), np.array([0.2, 1.0]))
    curve = M.contract_line(f, L)
    assert np.allclose(curve.velocity(0.3), Lam @ L.tangent @ Lt.T)


@given(st.floats(-1, 1))
@settings(max_examples=30, deadline=None)
def test_twisted_null_curve_is_null(s):
    v = M.twisted_null_curve(np.zeros((2, 2))).velocity(s)
    assert abs(v[0, 0] * v[1, 1] - v[0, 1] * v[1, 0]) < 1e-12
