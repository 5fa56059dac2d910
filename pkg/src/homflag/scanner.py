"""Positivity scanning of flag curvature over the compact flag set.

The scan samples flags quasi-randomly on the indicatrix, always adds the
deterministic root-plane seed flags (zero-curvature flags on Condition-(A)
violating spaces live exactly there), refines the worst candidates by
projected coordinate descent, and aggregates a verdict:

    positive      min K > margin after refinement
    not-positive  a certified flag with K < -margin, or |K| at zero level
    inconclusive  anything else

"positive" is reported, never proved: it means the minimum over the search
exceeded the margin.  A not-positive verdict always carries a witness flag
re-checkable with flag_curvature.

Evaluation order never affects the result; the HOMFLAG_THREADS environment
variable (0 = auto) only parallelizes the embarrassingly parallel sample
loop.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from . import lie_core as lc
from .curvature import Flag, flag_curvature
from .errors import DegenerateFlag, DimensionMismatch, NotMaximalTorus

ZERO_LEVEL = 1e-8  # |K| at or below this certifies a flat flag
REFINE_CANDIDATES = 32


@dataclass(frozen=True)
class ScanConfig:
    samples: int = 2000
    seed: int = 0
    refine_iters: int = 100
    descent_step: float = 0.1
    shrink: float = 0.5
    margin: float = 1e-3
    assert_positive: bool = False

    def __post_init__(self):
        if self.samples < 1:
            raise DimensionMismatch("samples must be >= 1")
        if self.refine_iters < 0:
            raise DimensionMismatch("refine_iters must be >= 0")
        if self.margin < 0:
            raise DimensionMismatch("margin must be >= 0")


@dataclass
class RefineResult:
    flag: Flag
    value: float
    iterations: int
    stalled: bool
    history: list = field(default_factory=list)


@dataclass
class ScanReport:
    verdict: str
    min_curvature: float
    argmin_flag: Flag
    histogram_edges: list
    histogram_counts: list
    n_below_margin: int
    samples_evaluated: int
    seeded_flags: int
    refined: int
    stalled: int
    sample_values: np.ndarray
    sample_flags: list
    wall_time_s: float
    config: ScanConfig

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "min_curvature": self.min_curvature,
            "argmin_flag": {"u": self.argmin_flag.u.tolist(),
                            "v": self.argmin_flag.v.tolist()},
            "histogram": {"edges": self.histogram_edges,
                          "counts": self.histogram_counts},
            "n_below_margin": self.n_below_margin,
            "samples_evaluated": self.samples_evaluated,
            "seeded_flags": self.seeded_flags,
            "refined": self.refined,
            "stalled": self.stalled,
            "wall_time_s": self.wall_time_s,
            "config": {
                "samples": self.config.samples,
                "seed": self.config.seed,
                "refine_iters": self.config.refine_iters,
                "descent_step": self.config.descent_step,
                "shrink": self.config.shrink,
                "margin": self.config.margin,
                "assert_positive": self.config.assert_positive,
            },
        }


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _direction_stream(dim, count, seed):
    """Low-discrepancy directions on the Euclidean sphere."""
    sampler = qmc.Sobol(d=2 * dim, scramble=True, seed=seed)
    m = max(1, int(np.ceil(np.log2(max(count, 2)))))
    pts = sampler.random_base2(m=m)
    while pts.shape[0] < count:
        pts = np.vstack([pts, sampler.random_base2(m=m)])
    gauss = ndtri(np.clip(pts[:count], 1e-12, 1 - 1e-12))
    return gauss[:, :dim], gauss[:, dim:]


def sample_flags(geom, count, seed):
    """count quasi-random flags: poles rescaled onto the indicatrix,
    transverse vectors orthonormalized in the pole's inner product.
    Deterministic for a fixed seed."""
    if count < 1:
        raise DimensionMismatch("count must be >= 1")
    u_dirs, v_dirs = _direction_stream(geom.dim, count, seed)
    flags = []
    extra = 0
    for i in range(count):
        u_raw, v_raw = u_dirs[i], v_dirs[i]
        while True:
            try:
                flags.append(geom.make_flag(u_raw, v_raw))
                break
            except DegenerateFlag:
                # vanishingly rare: resample the transverse direction
                extra += 1
                rng = np.random.default_rng(seed + 7919 + extra)
                v_raw = rng.standard_normal(geom.dim)
    return flags


def root_plane_flags(geom, seed=0):
    """Deterministic seed flags from all pairs of root-plane basis vectors.

    Returns [] when the decomposition carries no maximal torus.
    """
    dec = geom.decomposition
    if dec.torus is None:
        return []
    try:
        planes = lc.root_planes(dec, seed=seed)
    except NotMaximalTorus:
        return []
    vectors = []
    for plane in planes:
        if plane.membership != "m":
            continue
        for vec in plane.basis:
            vectors.append(dec.m_coords(vec))
    flags = []
    for i in range(len(vectors)):
        for j in range(len(vectors)):
            if i == j:
                continue
            try:
                flags.append(geom.make_flag(vectors[i], vectors[j]))
            except DegenerateFlag:
                continue
    return flags


def _thread_count():
    raw = os.environ.get("HOMFLAG_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    if n == 0:
        n = min(8, os.cpu_count() or 1)
    return max(1, n)


def _evaluate_all(geom, flags):
    def one(flag):
        return flag_curvature(geom, flag)

    n = _thread_count()
    if n == 1 or len(flags) < 64:
        return np.array([one(f) for f in flags])
    with ThreadPoolExecutor(max_workers=n) as pool:
        return np.array(list(pool.map(one, flags, chunksize=32)))


# ---------------------------------------------------------------------------
# Refinement
# ---------------------------------------------------------------------------

def refine_minimum(geom, start, iters, step=0.1, shrink=0.5):
    """Projected coordinate descent on the raw (u, v) pair.

    Each step renormalizes through make_flag, uses a central-difference
    gradient of K, and only accepts decreasing moves, so the recorded value
    sequence is monotone non-increasing.  Step underflow before the
    iteration budget returns the best-so-far flagged as stalled.
    """
    geom.check_flag(start)
    d = geom.dim
    x = np.concatenate([start.u, start.v])

    def objective(vec):
        try:
            fl = geom.make_flag(vec[:d], vec[d:])
        except DegenerateFlag:
            return None, np.inf
        return fl, flag_curvature(geom, fl)

    flag, value = objective(x)
    history = [value]
    if iters == 0:
        return RefineResult(flag=start, value=value, iterations=0,
                            stalled=False, history=history)
    fd = 1e-6
    alpha = step
    stalled = False
    done = 0
    for it in range(iters):
        grad = np.empty(2 * d)
        for k in range(2 * d):
            e = np.zeros(2 * d)
            e[k] = fd
            _, up = objective(x + e)
            _, dn = objective(x - e)
            if not np.isfinite(up) or not np.isfinite(dn):
                up = dn = value
            grad[k] = (up - dn) / (2 * fd)
        gn = float(np.linalg.norm(grad))
        if gn < 1e-14:
            done = it
            break
        moved = False
        while alpha >= 1e-12:
            cand = x - alpha * grad / gn
            cand_flag, cand_val = objective(cand)
            if cand_val < value:
                x, flag, value = cand, cand_flag, cand_val
                history.append(value)
                alpha = min(alpha * 1.5, step * 4.0)
                moved = True
                break
            alpha *= shrink
        done = it + 1
        if not moved:
            stalled = True
            break
    return RefineResult(flag=flag, value=value, iterations=done,
                        stalled=stalled, history=history)


# ---------------------------------------------------------------------------
# Scan
# ---------------------------------------------------------------------------

def scan_positivity(geom, cfg):
    """Sample, seed, refine, and report a positivity verdict."""
    t0 = time.perf_counter()
    flags = sample_flags(geom, cfg.samples, cfg.seed)
    seeds = root_plane_flags(geom)
    all_flags = flags + seeds
    values = _evaluate_all(geom, all_flags)

    order = np.argsort(values)
    n_refine = min(REFINE_CANDIDATES, cfg.samples)
    picked = [int(i) for i in order[:n_refine]]

    def refine_one(idx):
        return refine_minimum(geom, all_flags[idx], cfg.refine_iters,
                              step=cfg.descent_step, shrink=cfg.shrink)

    n = _thread_count()
    if n == 1 or len(picked) < 4:
        refined = [refine_one(i) for i in picked]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            refined = list(pool.map(refine_one, picked))

    best_idx = int(order[0])
    min_val = float(values[best_idx])
    argmin = all_flags[best_idx]
    for res in refined:
        if res.value < min_val:
            min_val = res.value
            argmin = res.flag

    if min_val > cfg.margin:
        verdict = "positive"
    elif abs(min_val) <= ZERO_LEVEL or min_val < -cfg.margin:
        verdict = "not-positive"
    else:
        verdict = "inconclusive"

    center = float(np.mean(values))
    if float(np.ptp(values)) < 1e-9 * max(1.0, abs(center)):
        counts, edges = np.histogram(values, bins=1,
                                     range=(center - 0.5, center + 0.5))
    else:
        counts, edges = np.histogram(values, bins=32)
    return ScanReport(
        verdict=verdict,
        min_curvature=min_val,
        argmin_flag=argmin,
        histogram_edges=[float(e) for e in edges],
        histogram_counts=[int(c) for c in counts],
        n_below_margin=int(np.sum(values < cfg.margin)),
        samples_evaluated=len(all_flags),
        seeded_flags=len(seeds),
        refined=len(refined),
        stalled=sum(1 for r in refined if r.stalled),
        sample_values=values,
        sample_flags=all_flags,
        wall_time_s=time.perf_counter() - t0,
        config=cfg,
    )


def grid_search(factory, grid, cfg):
    """Scan a list of metric parameter points; the documented utility for
    locating positively curved parameters (e.g. block coefficients t or the
    perturbation size eps).  Returns [(params, ScanReport)] in grid order.
    """
    out = []
    for params in grid:
        out.append((params, scan_positivity(factory(params), cfg)))
    return out


def write_samples_csv(path, report):
    """Raw samples as CSV: sample-index, u..., v..., K."""
    d = report.sample_flags[0].u.shape[0] if report.sample_flags else 0
    header = (["sample"] + [f"u{i + 1}" for i in range(d)]
              + [f"v{i + 1}" for i in range(d)] + ["K"])
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for idx, (flag, val) in enumerate(
                zip(report.sample_flags, report.sample_values)):
            row = ([str(idx)] + [f"{x:.17g}" for x in flag.u]
                   + [f"{x:.17g}" for x in flag.v] + [f"{val:.17g}"])
            fh.write(",".join(row) + "\n")
