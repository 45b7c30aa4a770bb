"""Acceptance criteria 1-10, one test each.

Each test prints a single ``PASS``/``FAIL`` line with the measured numbers;
the lines are also collected into a summary section at the end of the run.
"""

import json
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from twistorsym import cli
from twistorsym import field as F
from twistorsym import morphism as M
from twistorsym import pullback as P
from twistorsym import supersym as S
from twistorsym.errors import NoSolution
from twistorsym.grassmann import random_poly
from twistorsym.spinor import AlphaPlane, NullLine

F_ASD = np.array([[1.0, 0.5], [0.5, -0.3]])
BASE = 2 * np.eye(2, dtype=complex)


def verdict(n, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


@pytest.fixture(scope="module")
def fields():
    return {
        "constant_abelian": F.make_constant_asd(F_ASD),
        "instanton": F.make_instanton(2.0, np.array([[3, 1], [0.5, -2]], complex)),
    }


@pytest.fixture(scope="module")
def solved():
    return S.solve_embedding(S.constant_abelian_potential(), 3)


def planes(seed, count):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        x = BASE + M.sample_ball(rng, 1, 4, 0.3)[0].reshape(2, 2)
        out.append(AlphaPlane(x, np.array([1.0, 0.0]) + M.sample_ball(rng, 1, 2, 0.5)[0]))
    return out, rng


def test_criterion_01_asd_preservation(fields):
    morphisms = {"affine": M.random_lifted_affine_sd(42), "dilation": M.dilation_sd(1.7 - 0.2j), "inversion": M.inversion_sd()}
    start = time.perf_counter()
    worst, count, errors = 0.0, 0, []
    for A in fields.values():
        for f in morphisms.values():
            rep = P.verify_morphism_symmetry(f, A, P.Region(BASE, 0.5, 100, 0), holonomy_samples=10)
            r = rep.by_name("pullback_asd_residual")
            worst, count = max(worst, r.max_residual), count + r.samples
            errors += r.errors
    elapsed = time.perf_counter() - start
    ok = worst < 1e-5 and not errors and count == 600 and elapsed < 60
    verdict(1, ok, f"max asd residual {worst:.2e} < 1e-05 over {count} points, {elapsed:.1f}s < 60s")


def test_criterion_02_identity_law(fields):
    A = fields["instanton"]
    xs = P.Region(BASE, 0.5, 100, 1).sample()
    start = time.perf_counter()
    worst = max(float(np.max(np.abs(P.pullback_connection_at(M.identity_sd(), A, x) - A(x)))) for x in xs)
    elapsed = time.perf_counter() - start
    verdict(2, worst < 1e-12 and elapsed < 1, f"identity pullback error {worst:.2e} < 1e-12 at 100 points, {elapsed:.2f}s < 1s")


def test_criterion_03_bilinearity(fields):
    xs = P.Region(BASE, 0.5, 100, 2).sample()
    worst = 0.0
    for f in (M.random_lifted_affine_sd(42), M.inversion_sd()):
        assert f.analytic
        for x in xs:
            _, d = P.pullback_connection_at(f, fields["instanton"], x, bilin_tol=np.inf, return_defect=True)
            worst = max(worst, d)
    verdict(3, worst < 1e-7, f"bilinearity defect {worst:.2e} < 1e-07 at 100 points")


def test_criterion_04_path_independence(fields):
    zs, rng = planes(4, 3)
    worst = 0.0
    for A in fields.values():
        for f in (M.random_lifted_affine_sd(42), M.inversion_sd()):
            for Z in zs:
                x1, x2 = Z.point(M.sample_ball(rng, 1, 2, 0.3)[0]), Z.point(M.sample_ball(rng, 1, 2, 0.3)[0])
                worst = max(worst, P.path_independence_residual(f, A, Z, x1, x2))
    ctrl = F.perturbed(F.make_constant_asd(F_ASD), np.eye(2))
    Z = AlphaPlane(np.zeros((2, 2), complex), np.array([1.0, 0.3]))
    det = P.path_independence_residual(M.identity_sd(), ctrl, Z, Z.point(np.zeros(2)), Z.point(np.ones(2)))
    verdict(4, worst < 1e-6 and det > 1e-3, f"ASD path difference {worst:.2e} < 1e-06, non-ASD control {det:.2e} > 1e-03")


def test_criterion_05_patching_invariance(fields):
    zs, rng = planes(5, 3)
    f = M.random_lifted_affine_sd(42)
    worst = 0.0
    for Z in zs:
        for _ in range(10):
            g1 = P.patching_data(f, fields["instanton"], Z, Z.point(M.sample_ball(rng, 1, 2, 0.3)[0])).G
            g2 = P.patching_data(f, fields["instanton"], Z, Z.point(M.sample_ball(rng, 1, 2, 0.3)[0])).G
            worst = max(worst, float(np.linalg.norm(g1 - g2)))
    G0 = P.patching_data(f, F.zero_field(2), zs[0], zs[0].point(np.array([0.1, 0.2]))).G
    exact = bool(np.array_equal(G0, np.eye(2)))
    verdict(5, worst < 1e-6 and exact, f"|G(x1) - G(x2)| {worst:.2e} < 1e-06 over 30 pairs, A = 0 gives G = I exactly: {exact}")


def test_criterion_06_flat_susy_algebra():
    r1, r3 = S.flat_algebra_residual(1), S.flat_algebra_residual(3)
    verdict(6, max(r1, r3) < 1e-12, f"flat algebra residual N=1 {r1:.1e}, N=3 {r3:.1e} < 1e-12")


def test_criterion_07_grassmann_engine():
    from test_grassmann import ORACLE, close, part

    rng = np.random.default_rng(7)
    start = time.perf_counter()
    bad = 0
    for case in range(1000):
        a, b, c = (random_poly(rng, 4, 12, 6, max_gen_degree=4) for _ in range(3))
        kind = case % 3
        if kind == 0:
            bad += not close((a * b) * c, a * (b * c))
        elif kind == 1:
            pa, pb = int(rng.integers(2)), int(rng.integers(2))
            a, b = part(a, pa), part(b, pb)
            bad += not close(a * b, (b * a).scale(-1 if pa and pb else 1))
        else:
            k, pa = int(rng.integers(12)), int(rng.integers(2))
            a = part(a, pa)
            bad += not close((a * b).d_odd(k), a.d_odd(k) * b + (a * b.d_odd(k)).scale(-1 if pa else 1))
    for _ in range(50):
        a, b = random_poly(rng, 0, 4, 5), random_poly(rng, 0, 4, 5)
        bad += not close(a * b, ORACLE.back(ORACLE.dense(a) @ ORACLE.dense(b)), 1e-12)
    elapsed = time.perf_counter() - start
    verdict(7, bad == 0 and elapsed < 30, f"{bad} failures in 1000 N=3 cases + 50 dense N=1 checks, {elapsed:.1f}s < 30s")


def test_criterion_08_extended_certification():
    f = M.random_lifted_affine_causal(42)
    recs = {r.name: r.max_residual for r in S.certify_extended(S.extended_affine(f), 3)}
    ctrl = S.certify_extended(S.extended_affine(f, 2.0), 3, count=1)
    detected = not any(r.passed for r in ctrl)
    ok = recs["vv_compatibility"] < 1e-10 and recs["mm_identity"] < 1e-10 and recs["super_contact"] < 1e-8 and detected
    verdict(
        8, ok,
        f"vv {recs['vv_compatibility']:.1e} < 1e-10, M Mbar {recs['mm_identity']:.1e} < 1e-10, "
        f"contact {recs['super_contact']:.1e} < 1e-08, scale mismatch detected: {detected}",
    )


def test_criterion_09_reduction(solved):
    lines = S.super_line_suite(0, 2)
    integ = max(S.line_integrability_residual(S.embed_ym(solved), L, [0.0, 0.4]) for L in lines)
    gauge = S.gauge_condition_residual(solved)
    fh = S.extended_affine(M.random_lifted_affine_causal(42))
    rng = np.random.default_rng(9)
    form = 0.0
    for L in S.super_line_suite(1, 20):
        R = np.eye(3) + 0.5 * (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        form = max(form, S.form_preservation_residual(fh, solved, S.SuperPoint(L.base.x), S.same_tau_point(L.base.x, R), L))
    try:
        S.solve_embedding(S.non_maxwell_potential(), 3)
        no_solution = False
    except NoSolution:
        no_solution = True
    ok = integ < 1e-8 and gauge < 1e-10 and form < 1e-8 and no_solution
    verdict(
        9, ok,
        f"integrability {integ:.1e} < 1e-08, gauge {gauge:.1e} < 1e-10, form {form:.1e} < 1e-08 over 20 lines, "
        f"non-YM NoSolution: {no_solution}",
    )


CONTROLS = {
    "non_asd_field": {"suite": "asdym", "field": "perturbed", "region": {"samples": 5}},
    "non_asd_pullback": {"suite": "pullback", "field": "perturbed", "region": {"samples": 3}},
    "non_bilinear_shear": {"suite": "pullback", "morphism": "shear", "region": {"samples": 3}},
    "squaring_contact": {"suite": "contact", "morphism": "squaring"},
    "frame_scale_mismatch": {"suite": "super", "super": {"extension": {"scale_t": 2.0}, "lines": 1}},
    "non_maxwell_reduction": {"suite": "reduction", "super": {"reduction_field": "non_maxwell", "lines": 1, "form_samples": 1}},
    "twisted_frame_reduction": {"suite": "reduction", "super": {"extension": {"twist": 0.5}, "lines": 1, "form_samples": 2}},
}


def test_criterion_10_negative_controls(tmp_path):
    codes = {}
    for name, cfg in CONTROLS.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(cfg))
        codes[name] = cli.main(["--config", str(path), "--out", str(tmp_path / f"{name}.out.json")])
    flipped = [n for n, c in codes.items() if c == 1]
    verdict(10, len(flipped) == len(CONTROLS), f"{len(flipped)}/{len(CONTROLS)} controls exit 1 ({codes})")
