"""Batch verification runner.

Reads a JSON config, runs the selected suites and writes a JSON report with
sorted keys.  Exit status: 0 when every record passes, 1 otherwise, 2 for a
bad config.

Config keys (all optional)::

    suite        asdym | pullback | contact | super | reduction | all
    seed         integer seed for every sampler
    N            1 or 3, odd-coordinate count for the super suites
    field        {"name": ..., "params": {...}}
    morphism     {"name": ..., "params": {...}}
    region       {"basepoint": 2x2 numbers, "radius": r, "samples": k}
    tolerances   {"asd": ..., "bilinearity": ..., ...}
    super        {"reduction_field": {...}, "extension": {"scale_t": 1, "twist": 0}, "lines": 4}

Complex numbers may be written as numbers, strings such as "1+2j", or
[re, im] pairs.
"""

from __future__ import annotations

import argparse
from concurrent.futures import ThreadPoolExecutor
import json
import os
import sys
import time
from importlib import metadata

import numpy as np

from . import field as F
from . import morphism as M
from . import pullback as P
from . import supersym as S
from .errors import ConfigError, NoSolution, TwistorError
from .report import CheckRecord, Report, record
from .spinor import AlphaPlane

SCHEMA = "twistorsym.report/1"
SUITES = ("asdym", "pullback", "contact", "super", "reduction")
THREADS_ENV = "TWISTORSYM_THREADS"

DEFAULT_TOLS = {
    "asd": 1e-5,
    "bilinearity": 1e-7,
    "holonomy": 1e-6,
    "path": 1e-6,
    "patching": 1e-6,
    "contact": 1e-8,
    "vv": 1e-10,
    "mm": 1e-10,
    "super_contact": 1e-8,
    "susy": 1e-12,
    "integrability": 1e-8,
    "gauge": 1e-10,
    "form": 1e-8,
    "pullback_integrability": 1e-7,
    "pullback_gauge": 1e-8,
    "detect": 1e-3,
}


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0.0.0"


# -- parsing -------------------------------------------------------------------


def _complex(v):
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    if isinstance(v, (int, float, complex)):
        return complex(v)
    raise ConfigError(f"cannot read {v!r} as a complex number")


def _array(v, shape) -> np.ndarray:
    try:
        arr = np.array(v, dtype=object)
        if arr.shape[: len(shape)] != shape:
            raise ValueError
        flat = arr.reshape(int(np.prod(shape)), *arr.shape[len(shape):])
        return np.array([_complex(list(t) if isinstance(t, np.ndarray) else t) for t in flat]).reshape(shape)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"expected an array of shape {shape}, got {v!r}") from exc


def normalize_config(cfg: dict) -> dict:
    """Fill defaults and validate; raises ConfigError."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - {"suite", "seed", "N", "field", "morphism", "region", "tolerances", "super"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    out = {
        "suite": cfg.get("suite", "all"),
        "seed": cfg.get("seed", 42),
        "N": cfg.get("N", 3),
        "field": cfg.get("field", {"name": "instanton"}),
        "morphism": cfg.get("morphism", {"name": "lifted_affine"}),
        "region": dict(cfg.get("region", {})),
        "tolerances": dict(DEFAULT_TOLS, **cfg.get("tolerances", {})),
        "super": dict(cfg.get("super", {})),
    }
    if out["suite"] not in SUITES + ("all",):
        raise ConfigError(f"unknown suite {out['suite']!r}")
    if not isinstance(out["seed"], int) or not 0 <= out["seed"] < 2**64:
        raise ConfigError("seed must be a 64-bit non-negative integer")
    if out["N"] not in (1, 3):
        raise ConfigError("N must be 1 or 3")
    for key in ("field", "morphism"):
        spec = out[key]
        if isinstance(spec, str):
            spec = {"name": spec}
        if not isinstance(spec, dict) or "name" not in spec:
            raise ConfigError(f"{key} must name a catalog entry")
        out[key] = {"name": spec["name"], "params": dict(spec.get("params", {}))}
    for name, tol in out["tolerances"].items():
        if not isinstance(tol, (int, float)) or not tol > 0:
            raise ConfigError(f"tolerance {name!r} must be positive")
    reg = out["region"]
    reg.setdefault("radius", 0.5)
    reg.setdefault("samples", 20)
    if not isinstance(reg["samples"], int) or reg["samples"] < 1:
        raise ConfigError("region.samples must be an integer >= 1")
    if not reg["radius"] > 0:
        raise ConfigError("region.radius must be positive")
    sup = out["super"]
    sup.setdefault("reduction_field", {"name": "constant_abelian"})
    sup.setdefault("extension", {})
    sup["extension"] = {"scale_t": 1.0, "twist": 0.0, **sup["extension"]}
    sup.setdefault("lines", 4)
    sup.setdefault("form_samples", 20)
    return out


# -- catalogs --------------------------------------------------------------------


def _matrix_param(params, key, default):
    return _array(params[key], (2, 2)) if key in params else default


def build_field(spec: dict) -> F.GaugeField:
    name, p = spec["name"], spec["params"]
    try:
        if name == "zero":
            return F.zero_field(int(p.get("n", 1)))
        if name == "constant_asd":
            return F.make_constant_asd(_matrix_param(p, "F", np.array([[1.0, 0.5], [0.5, -0.3]])))
        if name == "constant":
            return F.make_constant_field(
                _matrix_param(p, "f_asd", np.array([[1.0, 0.5], [0.5, -0.3]])),
                _matrix_param(p, "f_sd", np.zeros((2, 2))),
            )
        if name == "constant_abelian":
            return F.make_constant_field(
                _matrix_param(p, "f_asd", np.array([[0.7, 0.2 - 0.1j], [0.2 - 0.1j, -0.4]])),
                _matrix_param(p, "f_sd", np.array([[0.3j, 0.5], [0.5, 0.1]])),
            )
        if name == "instanton":
            center = _matrix_param(p, "center", np.array([[3, 1], [0.5, -2]], complex))
            return F.make_instanton(_complex(p.get("rho", 2.0)), center)
        if name == "perturbed":
            base = build_field({"name": p.get("base", "instanton"), "params": p.get("base_params", {})})
            f_sd = _matrix_param(p, "f_sd", np.array([[1.0, 0.0], [0.0, 1.0]]))
            return F.perturbed(base, f_sd, float(p.get("strength", 0.1)))
        if name == "non_maxwell":
            c = _complex(p.get("c", 1.0))
            return F.abelian_potential(lambda x: np.array([[c * x[1, 1] ** 2, 0], [0, 0]]), name="non_maxwell")
    except ConfigError:
        raise
    except (TwistorError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad parameters for field {name!r}: {exc}") from exc
    raise ConfigError(f"unknown field {name!r}")


def build_morphism(spec: dict, seed: int) -> M.SelfDualMorphism:
    name, p = spec["name"], spec["params"]
    try:
        if name == "identity":
            return M.identity_sd()
        if name == "lifted_affine":
            if "Lam" in p:
                return M.lifted_affine_sd(_array(p["Lam"], (2, 2)), _array(p["Lt"], (2, 2)), _matrix_param(p, "b", None))
            return M.random_lifted_affine_sd(int(p.get("seed", seed)))
        if name == "dilation":
            return M.dilation_sd(_complex(p.get("a", 1.5)))
        if name == "inversion":
            return M.inversion_sd()
        if name == "squaring":
            return M.squaring_sd()
        if name == "shear":
            return P.shear_sd(_complex(p.get("eps", 0.3)))
    except ConfigError:
        raise
    except (TwistorError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"bad parameters for morphism {name!r}: {exc}") from exc
    raise ConfigError(f"unknown morphism {name!r}")


def build_causal(spec: dict, seed: int) -> M.CausalMorphism:
    name, p = spec["name"], spec["params"]
    if name == "identity":
        return M.identity_causal()
    if name == "lifted_affine":
        if "Lam" in p:
            return M.lifted_affine_causal(_array(p["Lam"], (2, 2)), _array(p["Lt"], (2, 2)), _matrix_param(p, "b", None))
        return M.random_lifted_affine_causal(int(p.get("seed", seed)))
    if name == "dilation":
        a = _complex(p.get("a", 1.5))
        return M.lifted_affine_causal(np.sqrt(a) * np.eye(2), np.sqrt(a) * np.eye(2))
    if name == "squaring":
        return M.squaring_causal()
    raise ConfigError(f"morphism {name!r} has no causal counterpart for the super suite")


def _basepoint(cfg) -> np.ndarray:
    reg = cfg["region"]
    if "basepoint" in reg:
        return _array(reg["basepoint"], (2, 2))
    if cfg["morphism"]["name"] == "inversion":
        return 2.0 * np.eye(2, dtype=complex)
    return np.zeros((2, 2), complex)


def _region(cfg) -> P.Region:
    reg = cfg["region"]
    return P.Region(_basepoint(cfg), float(reg["radius"]), int(reg["samples"]), cfg["seed"])


# -- suites ----------------------------------------------------------------------


def _guard(name, anchor, fn):
    try:
        return fn()
    except TwistorError as exc:
        return [CheckRecord(name, anchor, float("nan"), float("nan"), 0, False, [f"{type(exc).__name__}: {exc}"])]


def suite_asdym(cfg) -> list:
    tols = cfg["tolerances"]
    A = build_field(cfg["field"])
    region = _region(cfg)

    def go():
        pts = region.sample(P._nonsingular(A))
        rng = np.random.default_rng(cfg["seed"] + 7)
        asd = [F.asd_residual(A, x) for x in pts]
        hol = []
        for x in pts[: min(10, len(pts))]:
            lam1, lam2, lt = M.sample_ball(rng, 3, 2) + np.array([[1, 0], [0, 1], [1, 1]])
            hol.append(P.holonomy_defect(A, x, lam1, lam2, lt))
        return [
            record("field_asd_residual", "self-dual curvature block vanishes", asd, tols["asd"]),
            record("field_alpha_holonomy", "flat on alpha-planes", hol, tols["holonomy"]),
        ]

    return _guard("field_asd_residual", "self-dual curvature block vanishes", go)


def _planes(cfg, count=2):
    rng = np.random.default_rng(cfg["seed"] + 11)
    base = _basepoint(cfg)
    out = []
    for _ in range(count):
        x = base + M.sample_ball(rng, 1, 4, 0.3)[0].reshape(2, 2)
        lt = np.array([1.0, 0.0]) + M.sample_ball(rng, 1, 2, 0.5)[0]
        out.append(AlphaPlane(x, lt))
    return out, rng


def suite_pullback(cfg) -> list:
    tols = cfg["tolerances"]
    A = build_field(cfg["field"])
    f = build_morphism(cfg["morphism"], cfg["seed"])
    n = cfg["region"]["samples"]
    recs = _guard(
        "pullback_asd_residual",
        "self-dual morphisms preserve ASDYM",
        lambda: P.verify_morphism_symmetry(
            f, A, _region(cfg), {k: tols[k] for k in ("asd", "bilinearity", "holonomy")}, holonomy_samples=min(n, 10)
        ).records,
    )

    def paths():
        planes, rng = _planes(cfg)
        path_res, patch_res = [], []
        for Z in planes:
            for _ in range(min(n, 5)):
                x1 = Z.point(M.sample_ball(rng, 1, 2, 0.3)[0])
                x2 = Z.point(M.sample_ball(rng, 1, 2, 0.3)[0])
                path_res.append(P.path_independence_residual(f, A, Z, x1, x2))
                g1 = P.patching_data(f, A, Z, x1).G
                g2 = P.patching_data(f, A, Z, x2).G
                patch_res.append(float(np.linalg.norm(g1 - g2)))
        return [
            record("path_independence", "Wilson lines on mapped alpha-planes", path_res, tols["path"]),
            record("patching_invariance", "G = Ht H^-1 is independent of x", patch_res, tols["patching"]),
        ]

    recs = recs + _guard("path_independence", "Wilson lines on mapped alpha-planes", paths)

    def control():
        Z = AlphaPlane(np.zeros((2, 2), complex), np.array([1.0, 0.3]))
        ctrl = F.perturbed(F.make_constant_asd(np.array([[1.0, 0.5], [0.5, -0.3]])), np.eye(2))
        x1 = Z.point(np.zeros(2))
        x2 = Z.point(np.ones(2))
        r = P.path_independence_residual(M.identity_sd(), ctrl, Z, x1, x2)
        return [record("control_path_dependence", "non-ASD input is path dependent", [r], tols["detect"], below=False)]

    return recs + _guard("control_path_dependence", "non-ASD input is path dependent", control)


def suite_contact(cfg) -> list:
    tols = cfg["tolerances"]
    f = build_morphism(cfg["morphism"], cfg["seed"])
    seed = cfg["seed"]

    def go():
        rep = M.certify_sd(f, seed=seed % 2**32)
        ctrl = M.certify_sd(M.squaring_sd(), seed=seed % 2**32)
        recs = [
            record("sd_contact", "contact condition on alpha-plane prolongations", rep.residuals, tols["contact"]),
            record("control_squaring_contact", "squaring breaks contact", ctrl.residuals, tols["detect"], below=False),
        ]
        try:
            causal = build_causal(cfg["morphism"], seed)
        except ConfigError:
            return recs
        crep = M.certify_causal(causal, seed=seed % 2**32)
        return recs + [record("causal_contact", "contact condition on null-line prolongations", crep.residuals, tols["contact"])]

    return _guard("sd_contact", "contact condition on alpha-plane prolongations", go)


def _extension(cfg):
    f = build_causal(cfg["morphism"], cfg["seed"])
    if f.affine is None:
        raise ConfigError("super suites need an affine causal morphism")
    ext = cfg["super"]["extension"]
    scale_t = _complex(ext["scale_t"])
    twist = float(ext["twist"])
    if twist:
        fh = S.twisted_extension(f, twist)
        if scale_t != 1:
            Lam, Lt, _ = f.affine
            fh = S.extend_causal(f, Lam, scale_t * Lt, twist=fh.twist)
        return fh
    return S.extended_affine(f, scale_t)


def suite_super(cfg) -> list:
    tols = cfg["tolerances"]
    N = cfg["N"]
    seed = cfg["seed"] % 2**32
    fh = _extension(cfg)

    def go():
        recs = [record("flat_susy_algebra", "flat supersymmetry algebra", [S.flat_algebra_residual(N)], tols["susy"])]
        recs += S.certify_extended(
            fh, N, seed=seed, count=int(cfg["super"]["lines"]),
            tols={"vv": tols["vv"], "mm": tols["mm"], "contact": tols["super_contact"]},
        )
        ctrl = S.certify_extended(S.extended_affine(build_causal(cfg["morphism"], cfg["seed"]), 2.0), N, seed=seed, count=1)
        recs.append(record("control_scale_mismatch", "mismatched frames are detected", [ctrl[0].max_residual], tols["detect"], below=False))
        L = S.super_line_suite(seed, 1)[0]
        rnd = S.line_integrability_residual(S.random_connection(N, seed), L, [0.0])
        recs.append(record("control_random_connection", "random superconnection is not integrable", [rnd], 1e-2, below=False))
        return recs

    return _guard("flat_susy_algebra", "flat supersymmetry algebra", go)


def _reduction_potential(spec):
    if spec["name"] == "non_maxwell":
        return S.non_maxwell_potential(_complex(spec["params"].get("c", 1.0)))
    if spec["name"] == "zero":
        return [[S._tzero(), S._tzero()], [S._tzero(), S._tzero()]]
    A = build_field(spec)
    if A.n != 1:
        raise ConfigError("reduction needs an abelian (n = 1) field")
    try:
        return S.potential_poly(A, degree=2)
    except TwistorError as exc:
        raise ConfigError(f"reduction field is not polynomial: {exc}") from exc


def suite_reduction(cfg) -> list:
    tols = cfg["tolerances"]
    N = cfg["N"]
    seed = cfg["seed"] % 2**32
    spec = cfg["super"]["reduction_field"]
    spec = {"name": spec["name"], "params": dict(spec.get("params", {}))} if isinstance(spec, dict) else {"name": spec, "params": {}}
    A = _reduction_potential(spec)
    fh = _extension(cfg)
    anchor = "superfield extension of Yang-Mills data"
    state = {}

    def go():
        data = state["data"] = S.solve_embedding(A, N)
        phi = S.embed_ym(data)
        lines = S.super_line_suite(seed, int(cfg["super"]["lines"]))
        integ = [S.line_integrability_residual(phi, L, [0.0, 0.4]) for L in lines[:2]]
        recs = [
            record("reduction_line_integrability", anchor, integ, tols["integrability"]),
            record("reduction_gauge", "radial gauge tau (h + hbar) = 0", [S.gauge_condition_residual(data)], tols["gauge"]),
        ]
        rng = np.random.default_rng(seed + 3)
        form = []
        for L in S.super_line_suite(seed + 1, int(cfg["super"]["form_samples"])):
            R = np.eye(N) + 0.5 * (rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N)))
            z1, z2 = S.SuperPoint(L.base.x), S.same_tau_point(L.base.x, R)
            form.append(S.form_preservation_residual(fh, data, z1, z2, L))
        recs.append(record("form_preservation", "pullback keeps the tau-form", form, tols["form"]))
        L = lines[0]
        pb = S.pullback_connection(fh, phi, L)
        pdata, fit = S.fit_embedding(pb, xdeg=max(1, _degree(A)), taudeg=max(1, _degree(A)))
        recs.append(record("pullback_line_integrability", "pullback of an integrable superconnection", [S.line_integrability_residual(pb, L, [0.0])], tols["pullback_integrability"]))
        recs.append(record("pullback_gauge", "pulled-back data stays in radial gauge", [max(fit, S.gauge_condition_residual(pdata))], tols["pullback_gauge"]))
        return recs

    recs = _guard("reduction_line_integrability", anchor, go)

    def controls():
        try:
            S.solve_embedding(S.non_maxwell_potential(), N)
            detected = 0.0
        except NoSolution:
            detected = 1.0
        L = S.super_line_suite(seed + 1, 1)[0]
        R = np.eye(N) + 0.5 * np.random.default_rng(seed).normal(size=(N, N))
        data = None
        if N > 1:
            data = state.get("data") or S.solve_embedding(S.constant_abelian_potential(), N)
        out = [record("control_non_maxwell", "non-Maxwell input has no superfield extension", [detected], 0.5, below=False)]
        if data is not None:
            f = build_causal(cfg["morphism"], cfg["seed"])
            tw = S.twisted_extension(f) if f.affine is not None else None
            if tw is not None:
                r = S.form_preservation_residual(tw, data, S.SuperPoint(L.base.x), S.same_tau_point(L.base.x, R), L)
                out.append(record("control_twisted_frame", "odd-dependent frames break the tau-form", [r], tols["detect"], below=False))
        return out

    return recs + _guard("control_non_maxwell", "non-Maxwell input has no superfield extension", controls)


def _degree(A) -> int:
    return max((sum(e[:4]) for row in A for p in row for (e, _) in p.terms), default=0)


SUITE_FNS = {
    "asdym": suite_asdym,
    "pullback": suite_pullback,
    "contact": suite_contact,
    "super": suite_super,
    "reduction": suite_reduction,
}


def run(config: dict, threads: int | None = None) -> tuple:
    """Run the configured suites; returns ``(Report, report_dict)``."""
    cfg = normalize_config(config)
    names = SUITES if cfg["suite"] == "all" else (cfg["suite"],)
    threads = threads or int(os.environ.get(THREADS_ENV, "1") or 1)
    start = time.perf_counter()
    if threads > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda n: SUITE_FNS[n](cfg), names))
    else:
        results = [SUITE_FNS[n](cfg) for n in names]
    records = [r for recs in results for r in recs]
    rep = Report(records)
    doc = {
        "schema": SCHEMA,
        "version": version(),
        "config": _jsonable(cfg),
        "passed": rep.passed,
        "records": [r.to_dict() for r in records],
        "wall_time": round(time.perf_counter() - start, 3),
    }
    return rep, doc


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(t) for k, t in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(t) for t in v]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    return v


def dumps(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="twistorsym", description="Run twistor symmetry verification suites.")
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--suite", choices=SUITES + ("all",))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="write the report here instead of stdout")
    ap.add_argument("--samples", type=int, help="override region.samples")
    args = ap.parse_args(argv)
    try:
        cfg = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    cfg = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
        if args.suite:
            cfg["suite"] = args.suite
        if args.seed is not None:
            cfg["seed"] = args.seed
        if args.samples is not None:
            cfg.setdefault("region", {})["samples"] = args.samples
        rep, doc = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    text = dumps(doc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
