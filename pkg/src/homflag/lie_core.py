"""Compact Lie algebras, reductive decompositions and root planes.

An algebra is stored representation-free: a dense antisymmetric structure
constant table c[i,j,k] over a real basis ([e_i, e_j] = c[i,j,k] e_k) plus a
bi-invariant inner product matrix B.  The classical families su(n) and sp(n)
are built once from their defining matrix representations and then forgotten;
everything downstream is table contractions.

Conventions
-----------
* su(n): skew-Hermitian traceless n x n complex matrices,
  <X, Y> = -Re tr(XY).
* sp(n): quaternion n x n matrices q = A + Bj expanded to complex 2n x 2n
  via q -> [[A, B], [-conj(B), conj(A)]] (A in u(n), B symmetric), same
  trace form on the 2n x 2n image.
* Orthonormalization is modified Gram-Schmidt with one re-orthogonalization
  pass.

Curvature magnitudes downstream scale inversely with the inner product, so
these normalizations are part of the documented unit system.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    JacobiViolation,
    NonInvariantInnerProduct,
    NonPositiveInnerProduct,
    NotASubalgebra,
    NotMaximalTorus,
    ReductivityViolation,
)

JACOBI_TOL = 1e-10
INVARIANCE_TOL = 1e-10
REDUCTIVITY_TOL = 1e-10
ROOT_PLANE_TOL = 1e-8

_EXHAUSTIVE_DIM = 30
_SAMPLED_TRIPLES = 10_000


# ---------------------------------------------------------------------------
# Algebra construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LieAlgebra:
    """A compact Lie algebra over a fixed real basis.

    Attributes:
        dimension: number of basis elements.
        labels: one human-readable label per basis element.
        structure: c[i,j,k] with [e_i, e_j] = sum_k c[i,j,k] e_k.
        inner: bi-invariant inner product matrix, symmetric positive definite.
    """

    dimension: int
    labels: tuple
    structure: np.ndarray
    inner: np.ndarray

    def bracket(self, x, y):
        """Lie bracket of coordinate vectors; bilinear table contraction."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != (self.dimension,) or y.shape != (self.dimension,):
            raise DimensionMismatch(
                f"expected vectors of length {self.dimension}, "
                f"got {x.shape} and {y.shape}"
            )
        return np.einsum("ijk,i,j->k", self.structure, x, y)

    def pairing(self, x, y):
        """Bi-invariant inner product <x, y>_0."""
        return float(np.asarray(x) @ self.inner @ np.asarray(y))

    def norm(self, x):
        return float(np.sqrt(max(self.pairing(x, x), 0.0)))

    def ad(self, x):
        """Matrix of ad(x): y -> [x, y] on the full algebra."""
        x = np.asarray(x, dtype=float)
        return np.einsum("ijk,i->kj", self.structure, x)


def _triples(dim, rng=None):
    if dim <= _EXHAUSTIVE_DIM:
        for i in range(dim):
            for j in range(i + 1, dim):
                for k in range(j + 1, dim):
                    yield (i, j, k)
    else:
        rng = rng or np.random.default_rng(0)
        for _ in range(_SAMPLED_TRIPLES):
            yield tuple(rng.integers(0, dim, size=3))


def _verify_tables(c, B):
    dim = c.shape[0]
    asym = np.max(np.abs(c + np.swapaxes(c, 0, 1)))
    if asym > JACOBI_TOL:
        raise JacobiViolation((0, 0, 0), asym)

    eig = np.linalg.eigvalsh(B)
    if eig[0] <= 0:
        raise NonPositiveInnerProduct(float(eig[0]))

    # Jacobi residual per triple: [[ei,ej],ek] + [[ej,ek],ei] + [[ek,ei],ej].
    cc = np.einsum("ijm,mkl->ijkl", c, c)
    jac = cc + np.einsum("jkil->ijkl", cc) + np.einsum("kijl->ijkl", cc)
    for t in _triples(dim):
        r = float(np.max(np.abs(jac[t[0], t[1], t[2]])))
        if r > JACOBI_TOL:
            raise JacobiViolation(t, r)
    if dim <= _EXHAUSTIVE_DIM and float(np.max(np.abs(jac))) > JACOBI_TOL:
        idx = np.unravel_index(np.argmax(np.abs(jac)), jac.shape)
        raise JacobiViolation(idx[:3], float(np.max(np.abs(jac))))

    # Ad-invariance per triple: <[ei,ej],ek> + <ej,[ei,ek]>.
    inv = np.einsum("ijm,mk->ijk", c, B) + np.einsum("ikm,jm->ijk", c, B)
    for t in _triples(dim):
        r = float(np.abs(inv[t[0], t[1], t[2]]))
        if r > INVARIANCE_TOL:
            raise NonInvariantInnerProduct(t, r)
    if dim <= _EXHAUSTIVE_DIM and float(np.max(np.abs(inv))) > INVARIANCE_TOL:
        idx = np.unravel_index(np.argmax(np.abs(inv)), inv.shape)
        raise NonInvariantInnerProduct(tuple(idx), float(np.max(np.abs(inv))))


def _from_matrix_basis(mats, labels):
    """Structure constants and -Re tr(XY) inner product from a matrix basis."""
    dim = len(mats)
    B = np.empty((dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            B[i, j] = B[j, i] = -np.trace(mats[i] @ mats[j]).real
    c = np.zeros((dim, dim, dim))
    Binv = np.linalg.inv(B)
    for i in range(dim):
        for j in range(i + 1, dim):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            rhs = np.array([-np.trace(comm @ m).real for m in mats])
            coeff = Binv @ rhs
            c[i, j] = coeff
            c[j, i] = -coeff
    return c, B, tuple(labels)


def _su_basis(n):
    mats, labels = [], []
    for i in range(n):
        for j in range(i + 1, n):
            A = np.zeros((n, n), dtype=complex)
            A[i, j], A[j, i] = 1.0, -1.0
            mats.append(A)
            labels.append(f"A{i + 1}{j + 1}")
            S = np.zeros((n, n), dtype=complex)
            S[i, j] = S[j, i] = 1j
            mats.append(S)
            labels.append(f"S{i + 1}{j + 1}")
    for k in range(n - 1):
        D = np.zeros((n, n), dtype=complex)
        D[k, k], D[k + 1, k + 1] = 1j, -1j
        mats.append(D)
        labels.append(f"D{k + 1}")
    return mats, labels


def _quat_embed(A, Bm):
    """Complex 2n x 2n image of the quaternion matrix A + B j."""
    n = A.shape[0]
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, :n] = A
    out[:n, n:] = Bm
    out[n:, :n] = -np.conj(Bm)
    out[n:, n:] = np.conj(A)
    return out


def _sp_basis(n):
    mats, labels = [], []
    Z = np.zeros((n, n), dtype=complex)
    # u(n) block: A skew-Hermitian, B = 0.
    for i in range(n):
        for j in range(i + 1, n):
            A = np.zeros((n, n), dtype=complex)
            A[i, j], A[j, i] = 1.0, -1.0
            mats.append(_quat_embed(A, Z))
            labels.append(f"A{i + 1}{j + 1}")
            A = np.zeros((n, n), dtype=complex)
            A[i, j] = A[j, i] = 1j
            mats.append(_quat_embed(A, Z))
            labels.append(f"S{i + 1}{j + 1}")
    for k in range(n):
        A = np.zeros((n, n), dtype=complex)
        A[k, k] = 1j
        mats.append(_quat_embed(A, Z))
        labels.append(f"I{k + 1}")
    # j/k block: A = 0, B complex symmetric.
    for i in range(n):
        for j in range(i, n):
            Bm = np.zeros((n, n), dtype=complex)
            Bm[i, j] = Bm[j, i] = 1.0
            mats.append(_quat_embed(Z, Bm))
            labels.append(f"J{i + 1}{j + 1}")
            Bm = np.zeros((n, n), dtype=complex)
            Bm[i, j] = Bm[j, i] = 1j
            mats.append(_quat_embed(Z, Bm))
            labels.append(f"K{i + 1}{j + 1}")
    return mats, labels


def su(n):
    """su(n) over the defining representation, <X,Y> = -Re tr(XY)."""
    if n < 2:
        raise DimensionMismatch("su(n) requires n >= 2")
    c, B, labels = _from_matrix_basis(*_su_basis(n))
    return build_algebra_from_tables(c, B, labels)


def sp(n):
    """sp(n) as quaternion matrices in the complex 2n x 2n embedding."""
    if n < 1:
        raise DimensionMismatch("sp(n) requires n >= 1")
    c, B, labels = _from_matrix_basis(*_sp_basis(n))
    return build_algebra_from_tables(c, B, labels)


def direct_sum(*algebras, tags=None):
    """Direct sum of Lie algebras; cross-factor brackets vanish."""
    if not algebras:
        raise DimensionMismatch("direct_sum of nothing")
    dim = sum(a.dimension for a in algebras)
    c = np.zeros((dim, dim, dim))
    B = np.zeros((dim, dim))
    labels = []
    off = 0
    for idx, a in enumerate(algebras):
        d = a.dimension
        c[off:off + d, off:off + d, off:off + d] = a.structure
        B[off:off + d, off:off + d] = a.inner
        tag = tags[idx] if tags else str(idx + 1)
        labels.extend(f"{lab}({tag})" for lab in a.labels)
        off += d
    return build_algebra_from_tables(c, B, tuple(labels))


def build_algebra_from_tables(structure, inner, labels=None):
    """Custom algebra from explicit tables; verifies Jacobi and invariance."""
    c = np.asarray(structure, dtype=float)
    B = np.asarray(inner, dtype=float)
    if c.ndim != 3 or len(set(c.shape)) != 1:
        raise DimensionMismatch(f"structure table must be cubic, got {c.shape}")
    dim = c.shape[0]
    if B.shape != (dim, dim):
        raise DimensionMismatch(
            f"inner product shape {B.shape} does not match dimension {dim}"
        )
    _verify_tables(c, B)
    if labels is None:
        labels = tuple(f"e{i + 1}" for i in range(dim))
    c = c.copy()
    B = 0.5 * (B + B.T)
    c.flags.writeable = False
    B.flags.writeable = False
    return LieAlgebra(dimension=dim, labels=tuple(labels), structure=c, inner=B)


def build_algebra(spec):
    """Build an algebra from a spec mapping.

    Accepted kinds:
        {"kind": "su", "n": 3}
        {"kind": "sp", "n": 2}
        {"kind": "direct-sum", "factors": [spec, ...]}
        {"kind": "custom", "structure_constants": c, "inner_product": B,
         "labels": [...]}        # labels optional
    """
    kind = spec.get("kind")
    if kind == "su":
        return su(int(spec["n"]))
    if kind == "sp":
        return sp(int(spec["n"]))
    if kind == "direct-sum":
        return direct_sum(*[build_algebra(s) for s in spec["factors"]])
    if kind == "custom":
        return build_algebra_from_tables(
            spec["structure_constants"],
            spec["inner_product"],
            spec.get("labels"),
        )
    raise DimensionMismatch(f"unknown algebra kind {kind!r}")


# ---------------------------------------------------------------------------
# Reductive decompositions
# ---------------------------------------------------------------------------

def _orthonormalize(vectors, B, tol=1e-12):
    """Modified Gram-Schmidt w.r.t. B, one re-orthogonalization pass."""
    basis = []
    for v in vectors:
        w = np.asarray(v, dtype=float).copy()
        for _ in range(2):
            for b in basis:
                w = w - (b @ B @ w) * b
        nrm = np.sqrt(w @ B @ w)
        if nrm > tol:
            basis.append(w / nrm)
    return np.array(basis) if basis else np.zeros((0, B.shape[0]))


@dataclass(frozen=True)
class ReductiveDecomposition:
    """Orthogonal splitting g = h + m with [h, m] contained in m.

    Bases are rows, orthonormal w.r.t. the bi-invariant inner product; all
    vectors are in g-coordinates.  ``torus`` is an orthonormal basis of a
    Cartan subalgebra contained in h (required for root planes, else None).
    """

    algebra: LieAlgebra
    h_basis: np.ndarray
    m_basis: np.ndarray
    torus: np.ndarray | None = None

    @property
    def dim_h(self):
        return self.h_basis.shape[0]

    @property
    def dim_m(self):
        return self.m_basis.shape[0]

    @cached_property
    def pr_h(self):
        B = self.algebra.inner
        return self.h_basis.T @ self.h_basis @ B

    @cached_property
    def pr_m(self):
        B = self.algebra.inner
        return self.m_basis.T @ self.m_basis @ B

    def project_h(self, x):
        return self.pr_h @ np.asarray(x, dtype=float)

    def project_m(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.algebra.dimension,):
            raise DimensionMismatch(
                f"expected g-vector of length {self.algebra.dimension}"
            )
        return self.pr_m @ x

    def bracket_m(self, x, y):
        """pr_m([x, y]) for x, y in g-coordinates."""
        return self.project_m(self.algebra.bracket(x, y))

    def m_coords(self, x):
        """Coordinates of pr_m(x) in the orthonormal m-basis."""
        return self.m_basis @ self.algebra.inner @ np.asarray(x, dtype=float)

    def m_lift(self, coords):
        """g-coordinates of an m-coordinate vector."""
        coords = np.asarray(coords, dtype=float)
        if coords.shape != (self.dim_m,):
            raise DimensionMismatch(f"expected m-vector of length {self.dim_m}")
        return coords @ self.m_basis

    def ad_m(self, w):
        """Matrix of ad(w)|_m in m-coordinates, for w in g-coordinates."""
        a = self.algebra
        cols = [self.m_coords(a.bracket(w, self.m_basis[j]))
                for j in range(self.dim_m)]
        return np.array(cols).T


def build_decomposition(algebra, h_vectors, torus_vectors=None):
    """Split g = h + m with m the orthogonal complement of h.

    Args:
        algebra: the ambient LieAlgebra.
        h_vectors: spanning set of h in g-coordinates.
        torus_vectors: optional spanning set of a Cartan subalgebra inside h;
            when omitted and root planes are needed, compute one with
            find_torus().

    Raises:
        NotASubalgebra: h is not closed under the bracket.
        ReductivityViolation: [h, m] leaks out of m.
    """
    B = algebra.inner
    h = _orthonormalize(h_vectors, B)
    if h.shape[0] == 0 and len(list(h_vectors)) > 0:
        raise NotASubalgebra(0.0)

    # Closure under bracket: residual of the complement-projection of [h,h].
    pr_h = h.T @ h @ B
    worst = 0.0
    for i in range(h.shape[0]):
        for j in range(i + 1, h.shape[0]):
            br = algebra.bracket(h[i], h[j])
            res = br - pr_h @ br
            worst = max(worst, float(np.sqrt(res @ B @ res)))
    if worst > REDUCTIVITY_TOL:
        raise NotASubalgebra(worst)

    # m = orthogonal complement: complete h to a full orthonormal basis.
    eye = np.eye(algebra.dimension)
    full = _orthonormalize(list(h) + list(eye), B)
    m = full[h.shape[0]:]
    if h.shape[0] + m.shape[0] != algebra.dimension:
        raise ReductivityViolation(float("nan"))

    worst = 0.0
    for i in range(h.shape[0]):
        for j in range(m.shape[0]):
            br = algebra.bracket(h[i], m[j])
            res = pr_h @ br
            worst = max(worst, float(np.sqrt(res @ B @ res)))
    if worst > REDUCTIVITY_TOL:
        raise ReductivityViolation(worst)

    torus = None
    if torus_vectors is not None:
        torus = _orthonormalize(torus_vectors, B)
        # The torus must lie in h and be abelian.
        for t in torus:
            res = t - pr_h @ t
            if np.sqrt(res @ B @ res) > 1e-8:
                raise NotMaximalTorus("torus basis not contained in h")
        for i in range(torus.shape[0]):
            for j in range(i + 1, torus.shape[0]):
                br = algebra.bracket(torus[i], torus[j])
                if algebra.norm(br) > 1e-8:
                    raise NotMaximalTorus("torus basis not abelian")
        torus = np.ascontiguousarray(torus)
        torus.flags.writeable = False

    h = np.ascontiguousarray(h)
    m = np.ascontiguousarray(m)
    h.flags.writeable = False
    m.flags.writeable = False
    return ReductiveDecomposition(algebra=algebra, h_basis=h, m_basis=m,
                                  torus=torus)


def find_torus(algebra, h_basis, seed=0):
    """Cartan subalgebra of h: centralizer in h of a generic element.

    For a compact algebra the centralizer of a generic element of h is a
    maximal abelian subalgebra of h.  Returns vectors in g-coordinates.
    """
    h_basis = np.asarray(h_basis, dtype=float)
    if h_basis.shape[0] == 0:
        return h_basis
    rng = np.random.default_rng(seed)
    B = algebra.inner
    for _ in range(8):
        x = rng.standard_normal(h_basis.shape[0]) @ h_basis
        # rows: [x, h_i] expressed against the h-basis
        rows = np.array([h_basis @ B @ algebra.bracket(x, hi) for hi in h_basis])
        _, s, vt = np.linalg.svd(rows)
        rank = int(np.sum(s > 1e-9 * max(1.0, s[0] if len(s) else 1.0)))
        kernel = vt[rank:]
        cand = kernel @ h_basis
        ok = all(
            algebra.norm(algebra.bracket(cand[i], cand[j])) < 1e-9
            for i in range(cand.shape[0])
            for j in range(i + 1, cand.shape[0])
        )
        if ok:
            return cand
    raise NotMaximalTorus("could not find an abelian centralizer in h")


# ---------------------------------------------------------------------------
# Root planes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootPlane:
    """A 2-dimensional ad(t)-irreducible subspace with its root.

    ``root`` holds the values alpha(T_i) per torus basis element; the sign is
    canonicalized so the first coordinate above tolerance is positive.
    ``basis`` rows are orthonormal vectors in g-coordinates; ``membership``
    is "m" or "h".
    """

    root: np.ndarray
    basis: np.ndarray
    membership: str

    def root_key(self, tol=1e-6):
        return tuple(np.round(self.root / tol) * tol)


def _split_planes(dec, sub_basis, membership, rng):
    """Split an ad(t)-invariant subspace into 2-dim root planes."""
    algebra = dec.algebra
    B = algebra.inner
    torus = dec.torus
    n_sub = sub_basis.shape[0]
    if n_sub == 0:
        return []
    if n_sub % 2 != 0:
        raise NotMaximalTorus(
            f"{membership}-complement has odd dimension {n_sub}"
        )

    # ad of each torus element restricted to the subspace (skew matrices).
    ads = []
    for t in torus:
        M = np.array([
            sub_basis @ B @ algebra.bracket(t, sub_basis[j])
            for j in range(n_sub)
        ]).T
        leak = 0.0
        for j in range(n_sub):
            img = algebra.bracket(t, sub_basis[j])
            back = M[:, j] @ sub_basis
            leak = max(leak, algebra.norm(img - back))
        if leak > ROOT_PLANE_TOL:
            raise NonInvariantSubspaceError(membership, leak)
        ads.append(M)

    for _ in range(12):
        coeff = rng.integers(1, 97, size=len(ads)) / 97.0
        A = sum(c * M for c, M in zip(coeff, ads))
        evals, evecs = np.linalg.eigh(-(A @ A))
        # group eigenvalues
        groups = []
        start = 0
        for i in range(1, n_sub + 1):
            if i == n_sub or evals[i] - evals[start] > 1e-7 * max(1.0, evals[-1]):
                groups.append((start, i))
                start = i
        if all(g[1] - g[0] == 2 for g in groups) and np.all(evals > 1e-9):
            planes = []
            for lo, hi in groups:
                planes.append(evecs[:, lo:hi])
            return _refine_planes(dec, sub_basis, ads, planes, membership)
    raise NotMaximalTorus(
        "generic torus element does not split the space into 2-dim planes"
    )


class NonInvariantSubspaceError(Exception):
    """Internal marker rewrapped below; keeps _split_planes flat."""

    def __init__(self, membership, leak):
        self.membership = membership
        self.leak = leak


def _refine_planes(dec, sub_basis, ads, planes, membership):
    out = []
    for P in planes:
        # Orthonormal in-plane basis (columns), already orthonormal from eigh.
        p, q = P[:, 0], P[:, 1]
        root = np.zeros(len(ads))
        for idx, M in enumerate(ads):
            Mp, Mq = M @ p, M @ q
            theta = float(q @ Mp)
            # Residual of "rotation generator" structure.
            res = max(
                float(np.abs(p @ Mp)),
                float(np.abs(q @ Mq)),
                float(np.abs(p @ Mq + theta)),
                float(np.linalg.norm(Mp - theta * q + (p @ Mp) * p)),
                float(np.linalg.norm(Mq + theta * p - (q @ Mq) * q)),
            )
            if res > ROOT_PLANE_TOL:
                raise NotMaximalTorus(
                    f"plane not ad(t)-irreducible: residual {res:.3e}"
                )
            root[idx] = theta
        # Canonical sign: first coordinate with |.| > tol positive.
        for r in root:
            if abs(r) > 1e-9:
                if r < 0:
                    root = -root
                    p, q = q, p
                break
        vecs = np.array([p @ sub_basis, q @ sub_basis])
        vecs.flags.writeable = False
        root.flags.writeable = False
        out.append(RootPlane(root=root, basis=vecs, membership=membership))
    out.sort(key=lambda pl: tuple(np.round(pl.root, 9)))
    return out


def root_planes(dec, seed=0):
    """Decompose m (and the complement of t in h) into root planes.

    Requires dec.torus to be a Cartan subalgebra of g contained in h; when
    the torus is not maximal some invariant block has dimension != 2 and
    NotMaximalTorus is raised.
    """
    if dec.torus is None:
        raise NotMaximalTorus("decomposition carries no torus")
    rng = np.random.default_rng(seed)
    algebra = dec.algebra
    B = algebra.inner

    # Complement of t inside h.
    h_rest = []
    pr_t = dec.torus.T @ dec.torus @ B
    for v in dec.h_basis:
        w = v - pr_t @ v
        h_rest.append(w)
    h_rest = _orthonormalize(h_rest, B)

    try:
        planes = _split_planes(dec, dec.m_basis, "m", rng)
        planes += _split_planes(dec, h_rest, "h", rng)
    except NonInvariantSubspaceError as exc:
        from .errors import NonInvariantSubspace

        raise NonInvariantSubspace(
            f"ad(t) does not preserve the {exc.membership}-space: "
            f"leak {exc.leak:.3e}"
        ) from None
    return planes
