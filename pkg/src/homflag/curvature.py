"""Algebraic curvature operators of a homogeneous Finsler geometry.

All vectors here live in m-coordinates (the orthonormal, block-aligned
m-basis of the decomposition).  With g(u) the fundamental tensor of the
invariant norm and [.,.]_m the projected bracket, the operators are:

* spray vector field        <eta(u), w>_u = <u, [w, u]_m>_u
* connection operator       2 <N(u,w1), w2>_u = <[w2,w1]_m, u>_u
                              + <[w2,u]_m, w1>_u + <[w1,u]_m, w2>_u
                              - 2 C_u(w1, w2, eta(u))
* symmetric product         <U(u,v), w>_u = ( <[w,u]_m, v>_u
                              + <[w,v]_m, u>_u ) / 2
* curvature quadratic form  <R_u(w), w>_u = <[[w,u]_h, w], u>_u
                              + <Rt(u) w, w>_u,
  Rt(u)w = D_{eta(u)} N(u,w) - N(u, N(u,w)) + N(u, [u,w]_m)
           - [u, N(u,w)]_m,
  where D_{eta(u)} N is the derivative of the operator field N(., w) along
  eta(u) (exactly zero when eta(u) = 0).

Flag curvature of a normalized flag (pole u, transverse v) is
K = <R_u v, v>_u; for an admissible pole (<[u,m]_m, u>_u = 0) and a
commuting transverse ([u,v] = 0 in g) the quadratic-form route collapses to
K = <U(u,v), U(u,v)>_u / (<u,u>_u <v,v>_u - <u,v>_u^2), which involves no
numerical differentiation and is preferred when its preconditions hold.

Sign convention is pinned by the S^2 oracle: the normal metric on
su(2)/u(1) in the cyclic basis with identity inner product has K = +1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, expm

from .errors import (
    DegenerateFlag,
    DimensionMismatch,
    NotAdInvariant,
    NotAdmissible,
    NotCommuting,
    SingularGram,
    ZeroVector,
)
from .minkowski import check_ad_invariance

_EPS3 = float(np.finfo(float).eps) ** (1.0 / 3.0)


@dataclass(frozen=True)
class NumericsSettings:
    """Numerical policy knobs; all strictly positive."""

    pivot_tol: float = 1e-10
    h_n: float = _EPS3
    tau_adm: float = 1e-8
    tau_comm: float = 1e-8

    def __post_init__(self):
        for name in ("pivot_tol", "h_n", "tau_adm", "tau_comm"):
            if getattr(self, name) <= 0:
                raise DimensionMismatch(f"{name} must be strictly positive")


@dataclass(frozen=True)
class Flag:
    """Normalized flag at the origin: F(u) = 1, <u,v>_u = 0, <v,v>_u = 1."""

    u: np.ndarray
    v: np.ndarray


class _Anchor:
    """Per-pole cache: Gram data and the connection operator at u."""

    __slots__ = ("u", "F", "G", "chol", "p", "Bu", "eta", "eta_norm",
                 "adm", "_geom", "_N")

    def __init__(self, geom, u):
        self._geom = geom
        self.u = u
        self.F = geom.norm.evaluate(u)
        G = geom.norm._g_raw(u)
        try:
            self.chol = cho_factor(G, lower=True)
        except np.linalg.LinAlgError:
            raise SingularGram(
                "fundamental tensor not positive definite at the pole"
            ) from None
        self.G = G
        self.p = G @ u
        # Bu[a, :] = [E_a, u]_m in m-coordinates
        self.Bu = np.einsum("abk,b->ak", geom.bracket_m_tensor, u)
        rhs = self.Bu @ self.p
        self.adm = float(np.max(np.abs(rhs))) if rhs.size else 0.0
        self.eta = self._solve(rhs)
        self.eta_norm = float(np.linalg.norm(self.eta))
        self._N = None

    def _solve(self, rhs):
        x = cho_solve(self.chol, rhs)
        res = self.G @ x - rhs
        scale = 1.0 + float(np.max(np.abs(rhs))) if rhs.size else 1.0
        if float(np.max(np.abs(res))) > 1e-8 * scale:
            raise SingularGram("Gram solve residual too large")
        return x

    @property
    def N(self):
        """Matrix of w -> N(u, w)."""
        if self._N is None:
            geom = self._geom
            bm = geom.bracket_m_tensor
            P1 = np.einsum("abk,k->ab", bm, self.p)
            BuG = self.Bu @ self.G
            rhs = P1 + BuG + BuG.T
            if self.eta_norm > 1e-12:
                rhs = rhs - 2.0 * geom.norm.cartan_with(self.u, self.eta)
            self._N = self._solve(0.5 * rhs)
        return self._N


class HomogeneousGeometry:
    """A reductive decomposition equipped with an invariant Minkowski norm.

    Construction verifies that the norm dimension matches dim m and that the
    Ad(H)-invariance residual is below ``max_invariance_residual`` (the
    geometry refuses to exist otherwise).  Immutable afterwards; every
    operation is pure, and the internal per-pole cache is a transparent
    idempotent fill.
    """

    def __init__(self, decomposition, norm, settings=None,
                 invariance_samples=48, invariance_seed=0,
                 max_invariance_residual=1e-6):
        if norm.dimension != decomposition.dim_m:
            raise DimensionMismatch(
                f"norm dimension {norm.dimension} != dim m "
                f"{decomposition.dim_m}")
        self.decomposition = decomposition
        self.norm = norm
        self.settings = settings or NumericsSettings()
        self.invariance_residual = check_ad_invariance(
            norm, decomposition, samples=invariance_samples,
            seed=invariance_seed)
        if self.invariance_residual >= max_invariance_residual:
            raise NotAdInvariant(self.invariance_residual,
                                 max_invariance_residual)
        self._tensors = self._precompute()
        self._anchors = {}

    @property
    def dim(self):
        return self.decomposition.dim_m

    def _precompute(self):
        dec = self.decomposition
        a = dec.algebra
        d = dec.dim_m
        E = dec.m_basis
        bg = np.empty((d, d, a.dimension))
        for i in range(d):
            for j in range(d):
                bg[i, j] = a.bracket(E[i], E[j])
        coords = lambda x: E @ a.inner @ x
        bm = np.einsum("abi,ki->abk", bg, E @ a.inner)
        # h-part of [E_a, E_b] in g-coordinates
        bh = np.einsum("ij,abj->abi", dec.pr_h, bg)
        # T4[a,b,c,e] = m-coords of [ [E_a,E_b]_h, E_c ]
        t4 = np.empty((d, d, d, d))
        for a_i in range(d):
            for b_i in range(d):
                hpart = bh[a_i, b_i]
                for c_i in range(d):
                    t4[a_i, b_i, c_i] = coords(a.bracket(hpart, E[c_i]))
        for arr in (bg, bm, t4):
            arr.flags.writeable = False
        return {"bg": bg, "bm": bm, "t4": t4}

    @property
    def bracket_m_tensor(self):
        return self._tensors["bm"]

    @property
    def bracket_g_tensor(self):
        return self._tensors["bg"]

    @property
    def h_bracket_tensor(self):
        return self._tensors["t4"]

    # -- anchor cache -------------------------------------------------------

    def _anchor(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim,):
            raise DimensionMismatch(f"expected m-vector of length {self.dim}")
        if np.linalg.norm(u) == 0.0:
            raise ZeroVector("curvature operators are undefined at u = 0")
        key = u.tobytes()
        hit = self._anchors.get(key)
        if hit is None:
            hit = _Anchor(self, u)
            if len(self._anchors) > 512:
                self._anchors.clear()
            self._anchors[key] = hit
        return hit

    # -- flags ---------------------------------------------------------------

    def make_flag(self, u_raw, v_raw):
        """Normalize a raw pair into a Flag (F(u)=1, g(u)-orthonormal v)."""
        u_raw = np.asarray(u_raw, dtype=float)
        v_raw = np.asarray(v_raw, dtype=float)
        F = self.norm.evaluate(u_raw)
        if F < 1e-12:
            raise DegenerateFlag("pole has zero norm")
        u = u_raw / F
        anchor = self._anchor(u)
        G = anchor.G
        v = v_raw - (u @ G @ v_raw) * u  # <u,u>_u = F(u)^2 = 1
        vv = float(v @ G @ v)
        if vv < 1e-12:
            raise DegenerateFlag("transverse vector is parallel to the pole")
        return Flag(u=u, v=v / np.sqrt(vv))

    def check_flag(self, flag, tol=1e-10):
        anchor = self._anchor(flag.u)
        errs = (abs(anchor.F - 1.0),
                abs(float(flag.u @ anchor.G @ flag.v)),
                abs(float(flag.v @ anchor.G @ flag.v) - 1.0))
        if max(errs) > tol:
            raise DegenerateFlag(
                f"flag normalization residuals {errs} exceed {tol:.1e}")
        return True

    def transport(self, w_g, s, x):
        """Ad(exp(s w))-transport of an m-vector, w in h (g-coordinates)."""
        A = expm(s * self.decomposition.ad_m(w_g))
        return A @ np.asarray(x, dtype=float)


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

def spray_eta(geom, u):
    """Spray vector field: the unique solution of g(u) eta = rhs with
    rhs_j = <u, [E_j, u]_m>_u; quadratically homogeneous in u."""
    return geom._anchor(u).eta.copy()


def admissibility_residual(geom, u):
    """max_j |<[E_j, u]_m, u>_u|; zero iff the pole is admissible."""
    return geom._anchor(u).adm


def connection_n(geom, u, w):
    """Connection operator N(u, w); linear in w."""
    w = np.asarray(w, dtype=float)
    if w.shape != (geom.dim,):
        raise DimensionMismatch(f"expected m-vector of length {geom.dim}")
    return geom._anchor(u).N @ w


def u_map(geom, u, v):
    """Symmetric bilinear U(u, v) anchored at u."""
    v = np.asarray(v, dtype=float)
    if v.shape != (geom.dim,):
        raise DimensionMismatch(f"expected m-vector of length {geom.dim}")
    anchor = geom._anchor(u)
    Bv = np.einsum("abk,b->ak", geom.bracket_m_tensor, v)
    rhs = 0.5 * (anchor.Bu @ (anchor.G @ v) + Bv @ anchor.p)
    return anchor._solve(rhs)


def _rtilde_apply(geom, anchor, w):
    """Rt(u) w = D_eta N(u,w) - N(u,N(u,w)) + N(u,[u,w]_m) - [u,N(u,w)]_m."""
    N = anchor.N
    AdU = -anchor.Bu.T  # columns: [u, E_b]_m
    Nw = N @ w
    out = -N @ Nw + N @ (AdU @ w) - AdU @ Nw
    if anchor.eta_norm > 1e-12:
        direction = anchor.eta / anchor.eta_norm
        step = geom.settings.h_n * max(anchor.F, 1e-12)
        plus = geom._anchor(anchor.u + step * direction)
        minus = geom._anchor(anchor.u - step * direction)
        dN = (plus.N - minus.N) / (2.0 * step)
        out = out + anchor.eta_norm * (dN @ w)
    return out


def riemann_quadratic(geom, u, w):
    """<R_u(w), w>_u via the invariant-frame curvature formula."""
    w = np.asarray(w, dtype=float)
    if w.shape != (geom.dim,):
        raise DimensionMismatch(f"expected m-vector of length {geom.dim}")
    anchor = geom._anchor(u)
    hterm_vec = np.einsum("abce,a,b,c->e", geom.h_bracket_tensor,
                          w, anchor.u, w)
    hterm = float(hterm_vec @ anchor.p)
    rt = _rtilde_apply(geom, anchor, w)
    return hterm + float(w @ anchor.G @ rt)


def flag_curvature(geom, flag):
    """Flag curvature K(o, u, u ^ v) of a normalized flag."""
    anchor = geom._anchor(flag.u)
    num = riemann_quadratic(geom, flag.u, flag.v)
    uu = float(flag.u @ anchor.G @ flag.u)
    vv = float(flag.v @ anchor.G @ flag.v)
    uv = float(flag.u @ anchor.G @ flag.v)
    denom = uu * vv - uv * uv
    if denom < 1e-12:
        raise DegenerateFlag("flag plane is degenerate")
    return num / denom


def commuting_residual(geom, u, v):
    """Norm of the full bracket [u, v] in g, w.r.t. the ambient product."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    br = np.einsum("abi,a,b->i", geom.bracket_g_tensor, u, v)
    a = geom.decomposition.algebra
    return float(np.sqrt(max(br @ a.inner @ br, 0.0)))


def flag_curvature_commuting(geom, u, v):
    """Flag curvature by the admissible-commuting-pair formula.

    Preconditions: admissibility residual below tau_adm, |[u,v]| below
    tau_comm, u and v spanning a nondegenerate plane.  No numerical
    differentiation is involved.
    """
    anchor = geom._anchor(u)
    if anchor.adm >= geom.settings.tau_adm:
        raise NotAdmissible(anchor.adm, geom.settings.tau_adm)
    comm = commuting_residual(geom, u, v)
    if comm >= geom.settings.tau_comm:
        raise NotCommuting(comm, geom.settings.tau_comm)
    v = np.asarray(v, dtype=float)
    U = u_map(geom, u, v)
    uu = float(u @ anchor.G @ u)
    vv = float(v @ anchor.G @ v)
    uv = float(u @ anchor.G @ v)
    denom = uu * vv - uv * uv
    if denom < 1e-12:
        raise DegenerateFlag("commuting pair is linearly dependent")
    return float(U @ anchor.G @ U) / denom


def normal_homogeneous_curvature(geom, u, v):
    """Classical sectional-curvature numerator of the normal metric:
    |[u,v]_h|_0^2 + |[u,v]_m|_0^2 / 4, divided by the 0-metric area.

    Valid only when the geometry's norm is the restriction of the
    bi-invariant product (identity matrix in the orthonormal m-basis);
    used as an independent oracle for the general curvature route.
    """
    dec = geom.decomposition
    a = dec.algebra
    ug = dec.m_lift(np.asarray(u, dtype=float))
    vg = dec.m_lift(np.asarray(v, dtype=float))
    br = a.bracket(ug, vg)
    brh = dec.project_h(br)
    brm = dec.project_m(br)
    num = a.pairing(brh, brh) + 0.25 * a.pairing(brm, brm)
    uu, vv, uv = a.pairing(ug, ug), a.pairing(vg, vg), a.pairing(ug, vg)
    return num / (uu * vv - uv * uv)
