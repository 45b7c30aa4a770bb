import numpy as np
import pytest

from twistorsym import field as F
from twistorsym import morphism as M
from twistorsym import pullback as P
from twistorsym.errors import BilinearityViolation
from twistorsym.spinor import AlphaPlane

F_ASD = np.array([[1.0, 0.5], [0.5, -0.3]])


@pytest.fixture(scope="module")
def instanton():
    return F.make_instanton(2.0, np.array([[3, 1], [0.5, -2]], complex))


def points(seed, count=5, scale=0.4):
    rng = np.random.default_rng(seed)
    return scale * (rng.normal(size=(count, 2, 2)) + 1j * rng.normal(size=(count, 2, 2)))


def test_identity_reproduces_field(instanton):
    for x in points(0):
        assert np.max(np.abs(P.pullback_connection_at(M.identity_sd(), instanton, x) - instanton(x))) < 1e-12


def test_affine_pullback_closed_form():
    # for x -> Lam x Lt^T + b the pulled-back components are Lam^T A(f(x)) Lt
    Lam = np.array([[1.2, 0.3j], [-0.4, 0.9]])
    Lt = np.array([[0.8, 0.1], [0.5j, 1.1]])
    f = M.lifted_affine_sd(Lam, Lt, np.ones((2, 2)))
    A = F.make_constant_asd(F_ASD)
    for x in points(1):
        y, _ = f(x, np.array([1.0, 0.0]))
        expect = np.einsum("ca,db,cd->ab", Lam, Lt, A(y)[..., 0, 0])
        assert np.allclose(P.pullback_connection_at(f, A, x)[..., 0, 0], expect, atol=1e-12)


@pytest.mark.parametrize("make", [M.identity_sd, lambda: M.random_lifted_affine_sd(42), M.inversion_sd])
def test_pullback_is_bilinear(instanton, make):
    f = make()
    for x in points(2, scale=0.3):
        _, defect = P.pullback_connection_at(f, instanton, x + 2 * np.eye(2), return_defect=True)
        assert defect < 1e-7


def test_shear_violates_bilinearity(instanton):
    with pytest.raises(BilinearityViolation):
        P.pullback_connection_at(P.shear_sd(), instanton, np.eye(2, dtype=complex))


def test_shear_is_invisible_to_linear_asd_potential():
    # the shift lies along the alpha-plane and the linear ASD potential pairs it away
    A = F.make_constant_asd(F_ASD)
    _, defect = P.pullback_connection_at(P.shear_sd(), A, np.eye(2, dtype=complex), return_defect=True)
    assert defect < 1e-12


def test_batched_pullback_matches_pointwise(instanton):
    pb = P.PullbackField(M.inversion_sd(), instanton)
    xs = points(3) + 2 * np.eye(2)
    batch = pb.at_many(xs)
    for k, x in enumerate(xs):
        assert np.allclose(batch[k], pb(x), atol=1e-12)


@pytest.mark.parametrize(
    "make", [M.identity_sd, lambda: M.random_lifted_affine_sd(42), lambda: M.dilation_sd(1.3)]
)
def test_symmetry_report_passes(instanton, make):
    rep = P.verify_morphism_symmetry(make(), instanton, P.Region(np.zeros((2, 2)), 0.5, 8, 0), holonomy_samples=2)
    assert rep.passed, [r.to_dict() for r in rep.records]


def test_symmetry_report_flags_non_asd(instanton):
    A = F.perturbed(instanton, np.eye(2))
    rep = P.verify_morphism_symmetry(M.identity_sd(), A, P.Region(np.zeros((2, 2)), 0.5, 4, 0), holonomy_samples=0)
    assert not rep.by_name("pullback_asd_residual").passed


def test_path_independence_and_control(instanton):
    f = M.random_lifted_affine_sd(42)
    Z = AlphaPlane(np.zeros((2, 2), complex), np.array([1.0, 0.4 - 0.2j]))
    x1, x2 = Z.point(np.array([0.1, -0.2])), Z.point(np.array([0.3j, 0.25]))
    assert P.path_independence_residual(f, instanton, Z, x1, x2) < 1e-6
    ctrl = F.perturbed(F.make_constant_asd(F_ASD), np.eye(2))
    r = P.path_independence_residual(M.identity_sd(), ctrl, Z, Z.point(np.zeros(2)), Z.point(np.ones(2)))
    assert r > 1e-3


def test_patching_matrix_is_independent_of_base(instanton):
    f = M.random_lifted_affine_sd(42)
    Z = AlphaPlane(0.2 * np.eye(2, dtype=complex), np.array([0.7, 1.0]))
    g = [P.patching_data(f, instanton, Z, Z.point(t)).G for t in ([0, 0], [0.2, -0.1j], [-0.3, 0.15])]
    assert np.linalg.norm(g[0] - g[1]) < 1e-6
    assert np.linalg.norm(g[0] - g[2]) < 1e-6


def test_zero_field_patching_is_identity():
    Z = AlphaPlane(np.eye(2, dtype=complex), np.array([1.0, 2.0]))
    d = P.patching_data(M.identity_sd(), F.zero_field(2), Z, Z.point(np.array([0.3, 0.1])))
    assert np.array_equal(d.G, np.eye(2))


def test_patching_route_matches_pairing(instanton):
    f = M.random_lifted_affine_sd(42)
    Z = AlphaPlane(0.1 * np.ones((2, 2), complex), np.array([1.0, -0.5]))
    x = Z.point(np.array([0.2, 0.1]))
    lam = np.array([0.6, 1.0j])
    route = P.patching_route_component(f, instanton, Z, x, lam)
    direct = P.pullback_component(f, instanton, x, lam, Z.codir)
    assert np.max(np.abs(route - direct)) < 1e-6


def test_holonomy_vanishes_on_alpha_planes(instanton):
    x = points(4, 1)[0]
    lam1, lam2, lt = np.array([1, 0.2]), np.array([0.1j, 1]), np.array([1, 0.5])
    assert P.holonomy_defect(instanton, x, lam1, lam2, lt) < 1e-8
    bad = F.perturbed(instanton, np.eye(2))
    assert P.holonomy_defect(bad, x, lam1, lam2, np.array([1, 0.5])) > 1e-4


def test_region_sampler_is_seeded():
    r = P.Region(np.eye(2), 0.3, 6, seed=11)
    assert np.array_equal(r.sample(), r.sample())
    assert np.all(np.abs(r.sample() - np.eye(2)).reshape(6, -1).sum(1) > 0)
