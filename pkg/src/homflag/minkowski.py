"""Minkowski norm families on m with analytic derivative tensors.

Three families are shipped:

* Riemannian(Q): F(y) = sqrt(y' Q y).
* Randers(Q, b): F(y) = sqrt(y' Q y) + b.y with |b|_Q < 1.
* BlockPerturbed(blocks, t, eps):
      F(y)^2 = sum_i t_i s_i(y) + eps * sqrt(sum_i s_i(y)^2),
  where s_i(y) = y' Q_i y is the block quadratic form extended by zero.
  At eps = 0 this is the block-diagonal Riemannian metric sum t_i s_i; for
  small eps > 0 it is a strongly convex non-Riemannian perturbation.  The
  scalarization is smooth away from y = 0 because sum s_i^2 vanishes only
  there.

The fundamental tensor is g(y) = 1/2 Hess F^2(y); the induced inner product
is <u,v>_y = u' g(y) v; the Cartan tensor is the symmetric third derivative
C_y(u,v,w) = 1/4 d^3/dr ds dt F^2(y + ru + sv + tw)|_0.  All three are
closed-form per family; the finite-difference versions below exist only as
test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.stats import qmc

from .errors import (
    DimensionMismatch,
    NotStronglyConvex,
    StepTooLarge,
    ZeroVector,
)

_EPS3 = float(np.finfo(float).eps) ** (1.0 / 3.0)


def _check_vec(y, dim):
    y = np.asarray(y, dtype=float)
    if y.shape != (dim,):
        raise DimensionMismatch(f"expected vector of length {dim}, got {y.shape}")
    return y


def _check_nonzero(y, dim):
    y = _check_vec(y, dim)
    if np.linalg.norm(y) == 0.0:
        raise ZeroVector("norm derivatives are undefined at y = 0")
    return y


# ---------------------------------------------------------------------------
# Block structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockStructure:
    """Partition of the coordinate range into blocks with SPD forms Q_i.

    ``ranges`` is an ordered list of (start, stop) index pairs covering
    0..dim disjointly; ``forms`` holds one SPD matrix per block (defaults to
    identity blocks, i.e. the restriction of the ambient orthonormal inner
    product).
    """

    ranges: tuple
    dimension: int
    forms: tuple = None

    def __post_init__(self):
        covered = []
        for start, stop in self.ranges:
            if not (0 <= start < stop <= self.dimension):
                raise DimensionMismatch(f"bad block range ({start}, {stop})")
            covered.extend(range(start, stop))
        if sorted(covered) != list(range(self.dimension)):
            raise DimensionMismatch("blocks must partition the coordinates")
        if self.forms is not None:
            for (start, stop), q in zip(self.ranges, self.forms):
                q = np.asarray(q)
                if q.shape != (stop - start, stop - start):
                    raise DimensionMismatch("block form shape mismatch")
                if np.linalg.eigvalsh(0.5 * (q + q.T))[0] <= 0:
                    raise NotStronglyConvex("block form not positive definite")

    @classmethod
    def from_sizes(cls, sizes, forms=None):
        ranges, off = [], 0
        for s in sizes:
            ranges.append((off, off + int(s)))
            off += int(s)
        return cls(ranges=tuple(ranges), dimension=off,
                   forms=tuple(forms) if forms is not None else None)

    def embedded_forms(self):
        """Each Q_i as a full dim x dim matrix (zero off the block)."""
        out = []
        for idx, (start, stop) in enumerate(self.ranges):
            Q = np.zeros((self.dimension, self.dimension))
            if self.forms is None:
                Q[start:stop, start:stop] = np.eye(stop - start)
            else:
                Q[start:stop, start:stop] = self.forms[idx]
            out.append(Q)
        return np.array(out)


# ---------------------------------------------------------------------------
# Norm families
# ---------------------------------------------------------------------------

class NormFamily:
    """Common interface: evaluate, fundamental_tensor, cartan_tensor."""

    dimension: int
    is_riemannian = False

    def evaluate(self, y):
        raise NotImplementedError

    def _g_raw(self, y):
        """Fundamental tensor without the positive-definiteness probe."""
        raise NotImplementedError

    def _cartan_full(self, y):
        """Dense Cartan tensor C[i,j,k] at y."""
        raise NotImplementedError

    # -- shared surface ----------------------------------------------------

    def fundamental_tensor(self, y):
        """g(y) = 1/2 Hess F^2(y); raises NotStronglyConvex if indefinite."""
        y = _check_nonzero(y, self.dimension)
        g = self._g_raw(y)
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise NotStronglyConvex(
                "fundamental tensor not positive definite at the given y"
            ) from None
        return g

    def inner_product_at(self, y, u, v):
        """<u, v>_y = u' g(y) v."""
        u = _check_vec(u, self.dimension)
        v = _check_vec(v, self.dimension)
        return float(u @ self._g_raw(_check_nonzero(y, self.dimension)) @ v)

    def cartan_tensor(self, y, u, v, w):
        y = _check_nonzero(y, self.dimension)
        u = _check_vec(u, self.dimension)
        v = _check_vec(v, self.dimension)
        w = _check_vec(w, self.dimension)
        C = self._cartan_full(y)
        return float(np.einsum("ijk,i,j,k->", C, u, v, w))

    def cartan_with(self, y, w):
        """Matrix C_y(. , . , w), used by the connection operator."""
        C = self._cartan_full(np.asarray(y, dtype=float))
        return np.einsum("ijk,k->ij", C, np.asarray(w, dtype=float))


@dataclass(frozen=True)
class Riemannian(NormFamily):
    """F(y) = sqrt(y' Q y)."""

    Q: np.ndarray
    is_riemannian = True

    def __post_init__(self):
        Q = 0.5 * (np.asarray(self.Q, dtype=float)
                   + np.asarray(self.Q, dtype=float).T)
        if np.linalg.eigvalsh(Q)[0] <= 0:
            raise NotStronglyConvex("Q must be positive definite")
        Q.flags.writeable = False
        object.__setattr__(self, "Q", Q)

    @property
    def dimension(self):
        return self.Q.shape[0]

    def evaluate(self, y):
        y = _check_vec(y, self.dimension)
        return float(np.sqrt(max(y @ self.Q @ y, 0.0)))

    def _g_raw(self, y):
        return self.Q

    def _cartan_full(self, y):
        d = self.dimension
        return np.zeros((d, d, d))


@dataclass(frozen=True)
class Randers(NormFamily):
    """F(y) = alpha(y) + b.y with alpha(y) = sqrt(y' Q y), |b|_Q < 1."""

    Q: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        Q = 0.5 * (np.asarray(self.Q, dtype=float)
                   + np.asarray(self.Q, dtype=float).T)
        b = np.asarray(self.b, dtype=float)
        if b.shape != (Q.shape[0],):
            raise DimensionMismatch("b must match Q")
        if np.linalg.eigvalsh(Q)[0] <= 0:
            raise NotStronglyConvex("Q must be positive definite")
        if b @ np.linalg.solve(Q, b) >= 1.0:
            raise NotStronglyConvex("Randers norm needs |b|_Q < 1")
        Q.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "b", b)

    @property
    def dimension(self):
        return self.Q.shape[0]

    def evaluate(self, y):
        y = _check_vec(y, self.dimension)
        return float(np.sqrt(max(y @ self.Q @ y, 0.0)) + self.b @ y)

    def _alpha_ell(self, y):
        alpha = float(np.sqrt(y @ self.Q @ y))
        return alpha, (self.Q @ y) / alpha

    def _g_raw(self, y):
        alpha, ell = self._alpha_ell(y)
        beta = float(self.b @ y)
        h = self.Q - np.outer(ell, ell)
        lb = ell + self.b
        return (1.0 + beta / alpha) * h + np.outer(lb, lb)

    def _cartan_full(self, y):
        # C_ijk = (m_i h_jk + m_j h_ik + m_k h_ij) / (2 alpha),
        # m = b - (beta/alpha) ell, h = Q - ell ell'.
        alpha, ell = self._alpha_ell(y)
        beta = float(self.b @ y)
        h = self.Q - np.outer(ell, ell)
        m = self.b - (beta / alpha) * ell
        C = (np.einsum("i,jk->ijk", m, h)
             + np.einsum("j,ik->ijk", m, h)
             + np.einsum("k,ij->ijk", m, h))
        return C / (2.0 * alpha)


@dataclass(frozen=True)
class BlockPerturbed(NormFamily):
    """F(y)^2 = sum_i t_i s_i + eps sqrt(sum_i s_i^2), s_i = y' Q_i y."""

    blocks: BlockStructure
    t: tuple
    eps: float = 0.0

    def __post_init__(self):
        t = tuple(float(x) for x in self.t)
        if len(t) != len(self.blocks.ranges):
            raise DimensionMismatch("one coefficient t_i per block")
        if any(x <= 0 for x in t):
            raise NotStronglyConvex("block coefficients t_i must be positive")
        if self.eps < 0:
            raise NotStronglyConvex("eps must be >= 0")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "_Q", self.blocks.embedded_forms())

    @property
    def dimension(self):
        return self.blocks.dimension

    def _s(self, y):
        return np.einsum("kij,i,j->k", self._Q, y, y)

    def evaluate(self, y):
        y = _check_vec(y, self.dimension)
        s = self._s(y)
        val = float(np.dot(self.t, s) + self.eps * np.sqrt(np.sum(s * s)))
        return float(np.sqrt(max(val, 0.0)))

    def _l_derivs(self, y, order):
        """Partials of L(s) = sum t_i s_i + eps P, P = sqrt(sum s_i^2)."""
        s = self._s(y)
        P = float(np.sqrt(np.sum(s * s)))
        if P == 0.0:
            raise ZeroVector("scalarization derivatives undefined at y = 0")
        t = np.asarray(self.t)
        L1 = t + self.eps * s / P
        if order == 1:
            return s, L1, None, None
        k = len(s)
        L2 = self.eps * (np.eye(k) / P - np.outer(s, s) / P ** 3)
        if order == 2:
            return s, L1, L2, None
        eye = np.eye(k)
        L3 = self.eps * (
            -(np.einsum("ij,k->ijk", eye, s)
              + np.einsum("ik,j->ijk", eye, s)
              + np.einsum("jk,i->ijk", eye, s)) / P ** 3
            + 3.0 * np.einsum("i,j,k->ijk", s, s, s) / P ** 5
        )
        return s, L1, L2, L3

    def _g_raw(self, y):
        _, L1, L2, _ = self._l_derivs(y, 2)
        Qy = np.einsum("kij,j->ki", self._Q, y)
        g = np.einsum("k,kij->ij", L1, self._Q)
        g += 2.0 * np.einsum("kl,ki,lj->ij", L2, Qy, Qy)
        return g

    def _cartan_full(self, y):
        _, _, L2, L3 = self._l_derivs(y, 3)
        Qy = np.einsum("kij,j->ki", self._Q, y)
        C = np.einsum("kl,kij,lm->ijm", L2, self._Q, Qy)
        C = C + np.einsum("ijm->imj", C) + np.einsum("ijm->mij", C)
        C += 2.0 * np.einsum("klm,ki,lj,mn->ijn", L3, Qy, Qy, Qy)
        return C

    def cartan_with(self, y, w):
        # contracted form of _cartan_full . w, avoiding the dense d^3 tensor
        y = np.asarray(y, dtype=float)
        w = np.asarray(w, dtype=float)
        _, _, L2, L3 = self._l_derivs(y, 3)
        A = np.einsum("kij,j->ki", self._Q, y)   # A_k = Q_k y
        Bw = np.einsum("kij,j->ki", self._Q, w)  # B_k = Q_k w
        c = A @ w                                # c_k = <Q_k y, w>
        M1 = np.einsum("k,kij->ij", L2 @ c, self._Q)
        M2 = np.einsum("kl,ki,lj->ij", L2, Bw, A)
        W3 = 2.0 * np.einsum("klm,m->kl", L3, c)
        M3 = np.einsum("kl,ki,lj->ij", W3, A, A)
        return M1 + M2 + M2.T + M3


def make_norm(params, dimension):
    """NormFamily from its JSON parameter form."""
    variant = params.get("variant", "riemannian")
    if variant == "riemannian":
        Q = params.get("Q")
        Q = np.eye(dimension) if Q is None else np.asarray(Q, dtype=float)
        return Riemannian(Q=Q)
    if variant == "randers":
        Q = params.get("Q")
        Q = np.eye(dimension) if Q is None else np.asarray(Q, dtype=float)
        return Randers(Q=Q, b=np.asarray(params["b"], dtype=float))
    if variant == "block":
        sizes = params.get("block_sizes")
        blocks = BlockStructure.from_sizes(sizes, params.get("forms"))
        if blocks.dimension != dimension:
            raise DimensionMismatch("block sizes do not sum to the dimension")
        return BlockPerturbed(blocks=blocks, t=params.get("t", [1.0] * len(sizes)),
                              eps=params.get("epsilon", 0.0))
    raise DimensionMismatch(f"unknown norm variant {variant!r}")


# ---------------------------------------------------------------------------
# Finite-difference oracles (test-side)
# ---------------------------------------------------------------------------

def fd_fundamental_tensor(norm, y, h=None):
    """Central second differences of F^2/2; test oracle only.

    The default step is eps^(1/4), the optimal scaling for second
    differences (eps^(1/3) would leave ~5e-6 of roundoff in the Hessian).
    """
    y = _check_nonzero(y, norm.dimension)
    F = norm.evaluate(y)
    if h is None:
        h = float(np.finfo(float).eps) ** 0.25 * max(1.0, float(np.linalg.norm(y)))
    if not 0.0 < h < F / 10.0:
        raise StepTooLarge(f"need 0 < h < F(y)/10 = {F / 10.0:.3e}, got {h:.3e}")
    d = norm.dimension
    f2 = lambda z: norm.evaluate(z) ** 2
    g = np.empty((d, d))
    eye = np.eye(d)
    for i in range(d):
        for j in range(i, d):
            val = (f2(y + h * eye[i] + h * eye[j])
                   - f2(y + h * eye[i] - h * eye[j])
                   - f2(y - h * eye[i] + h * eye[j])
                   + f2(y - h * eye[i] - h * eye[j])) / (4.0 * h * h)
            g[i, j] = g[j, i] = 0.5 * val
    return g


def fd_cartan_tensor(norm, y, u, v, w, h=None):
    """Third-order central differences of F^2/4; test oracle only.

    One Richardson step (h, h/2) removes the leading O(h^2) truncation term.
    """
    y = _check_nonzero(y, norm.dimension)
    if h is None:
        scale = max(float(np.linalg.norm(x)) for x in (u, v, w))
        h = 0.02 * float(np.linalg.norm(y)) / max(scale, 1e-12)
    f2 = lambda z: norm.evaluate(z) ** 2

    def stencil(step):
        total = 0.0
        for su in (1, -1):
            for sv in (1, -1):
                for sw in (1, -1):
                    total += su * sv * sw * f2(
                        y + step * (su * np.asarray(u) + sv * np.asarray(v)
                                    + sw * np.asarray(w)))
        return total / (4.0 * (2.0 * step) ** 3)

    coarse, fine = stencil(h), stencil(h / 2.0)
    return (4.0 * fine - coarse) / 3.0


# ---------------------------------------------------------------------------
# Convexity and invariance checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexityReport:
    min_eigenvalue: float
    samples: int
    worst_direction: np.ndarray


def _sphere_samples(dim, count, seed):
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    m = max(1, int(np.ceil(np.log2(max(count, 2)))))
    pts = sampler.random_base2(m=m)[:count]
    from scipy.special import ndtri

    gauss = ndtri(np.clip(pts, 1e-12, 1 - 1e-12))
    norms = np.linalg.norm(gauss, axis=1)
    norms[norms == 0] = 1.0
    return gauss / norms[:, None]


def check_strong_convexity(norm, samples=512, seed=0, descent_iters=60):
    """Minimum eigenvalue of g over the unit sphere, sampled then refined.

    Quasi-random directions plus coordinate axes seed a local descent from
    the worst sample.  A non-positive minimum is reported, never raised.
    """
    if samples < 1:
        raise DimensionMismatch("samples must be >= 1")
    d = norm.dimension
    dirs = np.vstack([_sphere_samples(d, samples, seed), np.eye(d)])

    def min_eig(v):
        return float(np.linalg.eigvalsh(norm._g_raw(v))[0])

    vals = np.array([min_eig(v) for v in dirs])
    worst = dirs[int(np.argmin(vals))]
    best_val = float(np.min(vals))

    step = 0.1
    fd = 1e-5
    cur, cur_val = worst.copy(), best_val
    for _ in range(descent_iters):
        grad = np.zeros(d)
        for i in range(d):
            e = np.zeros(d)
            e[i] = fd
            vp = cur + e
            vm = cur - e
            grad[i] = (min_eig(vp / np.linalg.norm(vp))
                       - min_eig(vm / np.linalg.norm(vm))) / (2 * fd)
        gn = np.linalg.norm(grad)
        if gn < 1e-14:
            break
        cand = cur - step * grad / gn
        cand /= np.linalg.norm(cand)
        cand_val = min_eig(cand)
        if cand_val < cur_val:
            cur, cur_val = cand, cand_val
            step = min(step * 1.3, 0.5)
        else:
            step *= 0.5
            if step < 1e-12:
                break
    worst_dir = cur.copy()
    worst_dir.flags.writeable = False
    return ConvexityReport(min_eigenvalue=cur_val,
                           samples=int(dirs.shape[0]),
                           worst_direction=worst_dir)


def check_ad_invariance(norm, dec, samples=64, seed=0):
    """Largest Ad(H)-invariance residual of the norm on m.

    Two criteria are combined: the differential identity
        <[w,u]_m, v>_u + <u, [w,v]_m>_u + 2 C_u(u, v, [w,u]_m) = 0
    for w in h over random (u, v), and the finite criterion
        F(Ad(exp(s w)) y) = F(y)
    along one-parameter subgroups.  Returns the larger residual.
    """
    if norm.dimension != dec.dim_m:
        raise DimensionMismatch("norm dimension must equal dim m")
    rng = np.random.default_rng(seed)
    d = dec.dim_m

    ad_ws = [dec.ad_m(w) for w in dec.h_basis]
    worst = 0.0
    for _ in range(samples):
        u = rng.standard_normal(d)
        u /= np.linalg.norm(u)
        v = rng.standard_normal(d)
        g = norm._g_raw(u)
        for ad in ad_ws:
            wu = ad @ u
            wv = ad @ v
            r = (wu @ g @ v + u @ g @ wv
                 + 2.0 * norm.cartan_tensor(u, u, v, wu))
            worst = max(worst, abs(r))

    for ad in ad_ws:
        for s in (0.37, 0.83, 1.41):
            A = expm(s * ad)
            for _ in range(max(4, samples // 8)):
                y = rng.standard_normal(d)
                worst = max(worst, abs(norm.evaluate(A @ y) - norm.evaluate(y)))
    return worst
