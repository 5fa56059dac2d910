"""Command-line interface: JSON configs in, JSON reports out.

Subcommands:
    describe     dimensions, m-basis order, blocks, root planes, invariance
    check        norm invariant suite (homogeneity, Euler, Cartan symmetry,
                 FD oracle agreement, convexity, Ad(H)-invariance)
    condition-a  Condition (A) verdict for one subsystem of a root system
    classify     full table up to a rank, compared against Wallach's list
    curvature    flag curvature of one flag with diagnostics
    scan         positivity scan; optional CSV dump of raw samples

Exit codes: 0 success, 1 config/usage error, 2 numerical failure,
3 positivity assertion failed.  Errors print one machine-parsable line on
stderr: "error: <Kind>: <message>".
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from . import curvature as cv
from . import lie_core as lc
from . import minkowski as mk
from . import presets
from . import root_systems as rsys
from . import scanner as sc
from .errors import (
    AssertPositiveFailed,
    ConfigError,
    HomflagError,
)

_USAGE_ERRORS = (ConfigError, KeyError, ValueError, OSError,
                 json.JSONDecodeError)


# ---------------------------------------------------------------------------
# Config handling
# ---------------------------------------------------------------------------

def load_config(path):
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return resolve_config(raw)


def resolve_config(raw):
    """Apply preset defaults; explicit fields override preset fields.

    The metric mapping merges per key so a preset metric can be perturbed
    (e.g. just raising epsilon); algebra and subalgebra replace wholesale.
    """
    cfg = dict(raw)
    preset = cfg.get("preset")
    if preset is not None:
        if preset not in presets.PRESET_NAMES:
            raise ConfigError(
                f"unknown preset {preset!r}; choose from {presets.PRESET_NAMES}")
        space = presets.build_space(preset)
        metric = dict(space.default_metric)
        metric.update(cfg.get("metric", {}))
        cfg["metric"] = metric
    elif "algebra" not in cfg:
        raise ConfigError("config needs a preset or an algebra")
    cfg.setdefault("metric", {"variant": "riemannian"})
    cfg.setdefault("numerics", {})
    return cfg


def build_geometry(cfg):
    """Geometry plus a description bundle from a resolved config."""
    preset = cfg.get("preset")
    if preset is not None and "algebra" not in cfg:
        space = presets.build_space(preset)
        dec = space.decomposition
        plane_groups = space.plane_groups
        block_sizes = space.block_sizes
    else:
        algebra = lc.build_algebra(cfg["algebra"])
        sub = cfg.get("subalgebra", {})
        if "labels" in sub:
            h_vectors = presets.label_vectors(algebra, sub["labels"])
        else:
            h_vectors = [np.asarray(v, dtype=float)
                         for v in sub.get("vectors", [])]
        torus = None
        if "torus_labels" in sub:
            torus = presets.label_vectors(algebra, sub["torus_labels"])
        elif "torus" in sub:
            torus = [np.asarray(v, dtype=float) for v in sub["torus"]]
        dec = lc.build_decomposition(algebra, h_vectors, torus_vectors=torus)
        plane_groups = ()
        block_sizes = ()
        if sub.get("align_to_root_planes") and dec.torus is not None:
            dec, sizes, groups = presets.aligned_decomposition(dec)
            block_sizes = tuple(sizes)
            plane_groups = tuple(tuple(g) for g in groups)

    metric = dict(cfg.get("metric", {"variant": "riemannian"}))
    if metric.get("variant") == "block" and "block_sizes" not in metric:
        if not block_sizes:
            raise ConfigError("block metric needs block_sizes (or a preset)")
        metric["block_sizes"] = list(block_sizes)
    norm = mk.make_norm(metric, dec.dim_m)

    num = cfg.get("numerics", {})
    settings = cv.NumericsSettings(
        pivot_tol=num.get("pivot_tol", 1e-10),
        h_n=num.get("h_n", cv.NumericsSettings().h_n),
        tau_adm=num.get("tau_adm", 1e-8),
        tau_comm=num.get("tau_comm", 1e-8),
    )
    geom = cv.HomogeneousGeometry(dec, norm, settings=settings)
    return geom, {"plane_groups": plane_groups, "block_sizes": block_sizes,
                  "metric": metric}


# ---------------------------------------------------------------------------
# Report plumbing
# ---------------------------------------------------------------------------

def make_report(command, config_echo, results, t0):
    return {
        "command": command,
        "config": config_echo,
        "results": results,
        "version": __version__,
        "wall_time_s": time.perf_counter() - t0,
    }


def emit(report, out_path):
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_describe(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    geom, extra = build_geometry(cfg)
    dec = geom.decomposition
    planes = []
    if dec.torus is not None:
        try:
            for p in lc.root_planes(dec):
                planes.append({"root": [float(x) for x in p.root],
                               "membership": p.membership})
        except HomflagError:
            planes = []
    results = {
        "dimensions": {"g": dec.algebra.dimension, "h": dec.dim_h,
                       "m": dec.dim_m},
        "algebra_labels": list(dec.algebra.labels),
        "m_basis": [[float(x) for x in row] for row in dec.m_basis],
        "block_sizes": list(extra["block_sizes"]),
        "root_planes": planes,
        "metric": _jsonable(extra["metric"]),
        "invariance_residual": geom.invariance_residual,
    }
    emit(make_report("describe", cfg, results, t0), args.out)
    return 0


def norm_invariant_suite(norm, dec, samples=64, seed=0):
    """Residuals of the norm-level invariants, for `check` and the tests."""
    rng = np.random.default_rng(seed)
    d = norm.dimension
    hom = g_hom = euler = cartan_sym = fd_rel = 0.0
    for _ in range(samples):
        y = rng.standard_normal(d)
        F = norm.evaluate(y)
        for lam in (0.5, 2.0, 7.3):
            hom = max(hom, abs(norm.evaluate(lam * y) - lam * F) / (lam * F))
        g = norm._g_raw(y)
        g2 = norm._g_raw(2.0 * y)
        g_hom = max(g_hom, float(np.max(np.abs(g2 - g))
                                 / max(1.0, float(np.max(np.abs(g))))))
        euler = max(euler, abs(float(y @ g @ y) - F * F))
        u, v, w = rng.standard_normal((3, d))
        c = norm.cartan_tensor(y, u, v, w)
        for a, b, cc in ((v, u, w), (w, v, u), (u, w, v)):
            cartan_sym = max(cartan_sym, abs(norm.cartan_tensor(y, a, b, cc) - c))
        euler = max(euler, abs(norm.cartan_tensor(y, y, u, v)))
    for _ in range(max(8, samples // 8)):
        y = rng.standard_normal(d)
        g = norm._g_raw(y)
        gfd = mk.fd_fundamental_tensor(norm, y)
        fd_rel = max(fd_rel, float(np.linalg.norm(g - gfd)
                                   / np.linalg.norm(g)))
    convexity = mk.check_strong_convexity(norm, samples=max(64, samples),
                                          seed=seed)
    invariance = mk.check_ad_invariance(norm, dec, samples=samples, seed=seed)
    return {
        "homogeneity_rel": hom,
        "g_zero_homogeneity": g_hom,
        "euler_residual": euler,
        "cartan_symmetry_residual": cartan_sym,
        "fd_hessian_rel": fd_rel,
        "convexity_min_eigenvalue": convexity.min_eigenvalue,
        "invariance_residual": invariance,
        "passes": {
            "homogeneity": hom < 1e-12,
            "g_zero_homogeneity": g_hom < 1e-12,
            "euler": euler < 1e-10,
            "cartan_symmetry": cartan_sym < 1e-12,
            "fd_hessian": fd_rel < 1e-6,
            "convexity": convexity.min_eigenvalue > 0,
            "invariance": invariance < 1e-6,
        },
    }


def cmd_check(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    geom, _ = build_geometry(cfg)
    results = norm_invariant_suite(geom.norm, geom.decomposition,
                                   samples=args.samples, seed=args.seed)
    results["all_pass"] = all(results["passes"].values())
    emit(make_report("check", cfg, results, t0), args.out)
    return 0


def cmd_condition_a(args):
    t0 = time.perf_counter()
    rs = rsys.build_root_system(args.type, args.rank)
    subs = rsys.equal_rank_subsystems(rs, max_corank=args.rank)
    hits = [s for s in subs if s.label == args.sub]
    if not hits:
        available = sorted({s.label for s in subs})
        raise ConfigError(
            f"no subsystem labeled {args.sub!r} in {rs.label}; "
            f"available: {available}")
    entries = []
    for sub in hits:
        rep = rsys.check_condition_a(sub)
        entries.append({
            "parent": rs.label,
            "subsystem": sub.label,
            "corank": sub.corank,
            "dim_m": sub.dim_m,
            "roots_h": sorted([list(map(int, r)) for r in sub.roots_h]),
            "verdict": rep.verdict,
            "vacuous": rep.vacuous,
            "checked_pairs": rep.checked_pairs,
            "witness": ([list(map(int, rep.witness[0])),
                         list(map(int, rep.witness[1]))]
                        if rep.witness else None),
        })
    results = {"entries": entries}
    config_echo = {"type": args.type, "rank": args.rank, "sub": args.sub}
    emit(make_report("condition-a", config_echo, results, t0), args.out)
    return 0


def cmd_classify(args):
    t0 = time.perf_counter()
    rows = rsys.classify(args.max_rank)
    positives = rsys.positive_pairs(rows)
    golden = rsys.wallach_pairs(args.max_rank)
    table = [{
        "parent": r.parent_label,
        "rank": r.rank,
        "subsystem": r.subsystem.label,
        "corank": r.subsystem.corank,
        "dim_m": r.subsystem.dim_m,
        "verdict": r.report.verdict,
        "vacuous": r.report.vacuous,
        "checked_pairs": r.report.checked_pairs,
        "witness": ([list(map(int, r.report.witness[0])),
                     list(map(int, r.report.witness[1]))]
                    if r.report.witness else None),
    } for r in rows]
    results = {
        "table": table,
        "positive_pairs": sorted(list(p) for p in positives),
        "golden": {
            "expected": sorted(list(p) for p in golden),
            "matches": positives == golden,
            "extras": sorted(list(p) for p in positives - golden),
            "omissions": sorted(list(p) for p in golden - positives),
        },
    }
    emit(make_report("classify", {"max_rank": args.max_rank}, results, t0),
         args.out)
    return 0


def _parse_vector(text, dim):
    vals = [float(x) for x in text.split(",") if x.strip() != ""]
    if len(vals) != dim:
        raise ConfigError(f"expected {dim} comma-separated coordinates, "
                          f"got {len(vals)}")
    return np.array(vals)


def cmd_curvature(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    geom, _ = build_geometry(cfg)
    u = _parse_vector(args.u, geom.dim)
    v = _parse_vector(args.v, geom.dim)
    u_unit = u / geom.norm.evaluate(u)
    adm = cv.admissibility_residual(geom, u_unit)
    comm = cv.commuting_residual(geom, u_unit, v)
    eta = float(np.linalg.norm(cv.spray_eta(geom, u_unit)))
    can_commute = (adm < geom.settings.tau_adm
                   and comm < geom.settings.tau_comm)
    method = args.method
    if method == "auto":
        method = "commuting" if can_commute else "general"
    if method == "commuting":
        value = cv.flag_curvature_commuting(geom, u_unit, v)
    else:
        value = cv.flag_curvature(geom, geom.make_flag(u, v))
    results = {
        "flag_curvature": value,
        "method": method,
        "diagnostics": {
            "eta_norm": eta,
            "admissibility_residual": adm,
            "commuting_residual": comm,
        },
    }
    echo = dict(cfg)
    echo["u"] = u.tolist()
    echo["v"] = v.tolist()
    emit(make_report("curvature", echo, results, t0), args.out)
    return 0


def cmd_scan(args):
    t0 = time.perf_counter()
    cfg = load_config(args.config)
    geom, _ = build_geometry(cfg)
    scan_cfg = sc.ScanConfig(
        samples=args.samples, seed=args.seed, refine_iters=args.refine,
        margin=args.margin, assert_positive=args.assert_positive)
    report = sc.scan_positivity(geom, scan_cfg)
    if args.csv:
        sc.write_samples_csv(args.csv, report)
    results = report.to_dict()
    emit(make_report("scan", cfg, results, t0), args.out)
    if args.assert_positive and report.verdict != "positive":
        raise AssertPositiveFailed(report.verdict, report.min_curvature)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def build_parser():
    parser = argparse.ArgumentParser(
        prog="homflag",
        description="Flag curvature of homogeneous Finsler metrics: "
                    "curvature operators, Condition (A), positivity scans.")
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("describe", help="space and metric summary")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_describe)

    p = subs.add_parser("check", help="norm invariant suite")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = subs.add_parser("condition-a", help="Condition (A) for one subsystem")
    p.add_argument("--type", required=True,
                   help="root system family: A, B, C, D, G2, F4")
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--sub", required=True,
                   help='subsystem label, e.g. "c2+a1" or "a1+R"')
    p.add_argument("--out")
    p.set_defaults(func=cmd_condition_a)

    p = subs.add_parser("classify", help="Condition (A) table vs Wallach list")
    p.add_argument("--max-rank", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = subs.add_parser("curvature", help="flag curvature of one flag")
    p.add_argument("--config", required=True)
    p.add_argument("--u", required=True, help="pole, comma-separated m-coords")
    p.add_argument("--v", required=True, help="transverse, comma-separated")
    p.add_argument("--method", choices=["auto", "commuting", "general"],
                   default="auto")
    p.add_argument("--out")
    p.set_defaults(func=cmd_curvature)

    p = subs.add_parser("scan", help="positivity scan")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--refine", type=int, default=100)
    p.add_argument("--margin", type=float, default=1e-3)
    p.add_argument("--assert-positive", action="store_true")
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_scan)
    return parser


def run(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except AssertPositiveFailed as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except _USAGE_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except HomflagError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
