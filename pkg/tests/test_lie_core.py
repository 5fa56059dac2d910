import itertools

import numpy as np
import pytest

from homflag import lie_core as lc
from homflag.errors import (
    DimensionMismatch,
    JacobiViolation,
    NonInvariantInnerProduct,
    NonPositiveInnerProduct,
    NotASubalgebra,
    NotMaximalTorus,
)
from conftest import label_vectors


def jacobi_residual(a, x, y, z):
    return np.max(np.abs(
        a.bracket(a.bracket(x, y), z)
        + a.bracket(a.bracket(y, z), x)
        + a.bracket(a.bracket(z, x), y)
    ))


def invariance_residual(a, x, y, z):
    return abs(a.pairing(a.bracket(x, y), z) + a.pairing(y, a.bracket(x, z)))


# ---------------------------------------------------------------------------
# build_algebra / bracket
# ---------------------------------------------------------------------------

class TestBuildAlgebra:
    def test_cyclic_su2_exact(self, su2_cyclic):
        a = su2_cyclic
        assert a.dimension == 3
        e = np.eye(3)
        assert np.allclose(a.bracket(e[0], e[1]), e[2])
        for t in itertools.product(range(3), repeat=3):
            assert jacobi_residual(a, e[t[0]], e[t[1]], e[t[2]]) == 0.0

    def test_su2_defining_rep_trace(self):
        a = lc.su(2)
        assert a.dimension == 3
        # Oracle: hand trace on 2x2 matrices for e = -(i/2) * sigma_1.
        sigma1 = np.array([[0, 1], [1, 0]], dtype=complex)
        e_mat = -0.5j * sigma1
        assert abs(-np.trace(e_mat @ e_mat).real - 0.5) < 1e-15
        # Same element in algebra coordinates: S12 = i(E12+E21) = i sigma_1,
        # so e = -S12/2 and <e,e> = B[S12,S12]/4.
        i = a.labels.index("S12")
        assert abs(0.25 * a.inner[i, i] - 0.5) < 1e-12

    def test_direct_sum_cross_brackets_vanish(self, su2xsu2):
        a = su2xsu2
        assert a.dimension == 6
        for i in range(3):
            for j in range(3, 6):
                x, y = np.zeros(6), np.zeros(6)
                x[i], y[j] = 1.0, 1.0
                assert np.allclose(a.bracket(x, y), 0.0)

    def test_jacobi_violation_detected(self):
        # [e1,e2]=e3, [e1,e3]=-e2, [e2,e3]=e1+e2: the extra e2 term breaks
        # Jacobi ([[e2,e3],e1] = -e3 is uncancelled).
        c = np.zeros((3, 3, 3))
        c[0, 1, 2], c[1, 0, 2] = 1.0, -1.0
        c[0, 2, 1], c[2, 0, 1] = -1.0, 1.0
        c[1, 2, 0], c[2, 1, 0] = 1.0, -1.0
        c[1, 2, 1], c[2, 1, 1] = 1.0, -1.0
        with pytest.raises(JacobiViolation) as exc:
            lc.build_algebra_from_tables(c, np.eye(3))
        assert exc.value.residual > 1e-10

    def test_non_invariant_inner_product_detected(self, su2_cyclic):
        B = np.diag([1.0, 1.0, 2.0])  # scales e3 only: kills invariance
        with pytest.raises(NonInvariantInnerProduct):
            lc.build_algebra_from_tables(su2_cyclic.structure, B)

    def test_non_positive_inner_product_detected(self, su2_cyclic):
        with pytest.raises(NonPositiveInnerProduct):
            lc.build_algebra_from_tables(su2_cyclic.structure, -np.eye(3))

    def test_build_algebra_spec_dispatch(self):
        a = lc.build_algebra({"kind": "su", "n": 2})
        assert a.dimension == 3
        b = lc.build_algebra(
            {"kind": "direct-sum",
             "factors": [{"kind": "su", "n": 2}, {"kind": "su", "n": 2}]})
        assert b.dimension == 6


class TestBracket:
    def test_antisymmetry_random(self, su3):
        rng = np.random.default_rng(1)
        for _ in range(20):
            x = rng.standard_normal(su3.dimension)
            assert np.allclose(su3.bracket(x, x), 0.0, atol=1e-12)

    def test_bilinearity(self, su2_cyclic):
        e = np.eye(3)
        got = su2_cyclic.bracket(e[0] + e[1], e[1])
        assert np.allclose(got, e[2])

    def test_dimension_mismatch(self, su3):
        with pytest.raises(DimensionMismatch):
            su3.bracket(np.ones(3), np.ones(su3.dimension))


@pytest.mark.parametrize("maker", [
    lambda: lc.su(2), lambda: lc.su(3), lambda: lc.sp(2), lambda: lc.sp(3),
    lambda: lc.direct_sum(lc.su(2), lc.su(2)),
])
def test_jacobi_and_invariance_randomized(maker):
    a = maker()
    rng = np.random.default_rng(7)
    for _ in range(50):
        x, y, z = rng.standard_normal((3, a.dimension))
        assert jacobi_residual(a, x, y, z) < 1e-10
        assert invariance_residual(a, x, y, z) < 1e-10


def test_classical_dimensions():
    assert lc.su(2).dimension == 3
    assert lc.su(3).dimension == 8
    assert lc.sp(2).dimension == 10
    assert lc.sp(3).dimension == 21


# ---------------------------------------------------------------------------
# build_decomposition / projections
# ---------------------------------------------------------------------------

class TestDecomposition:
    def test_sphere_split(self, sphere_dec):
        assert sphere_dec.dim_m == 2
        span = np.abs(sphere_dec.m_basis[:, 2])
        assert np.allclose(span, 0.0, atol=1e-12)

    def test_su2xsu2_torus(self, su2xsu2_dec):
        assert su2xsu2_dec.dim_m == 4

    def test_cp3_dimensions(self, cp3_dec):
        assert cp3_dec.dim_h == 4
        assert cp3_dec.dim_m == 6

    def test_not_a_subalgebra(self, su2_cyclic):
        with pytest.raises(NotASubalgebra):
            lc.build_decomposition(su2_cyclic, [[1, 0, 0], [0, 1, 0]])

    def test_reductivity_residual(self, cp3_dec):
        a = cp3_dec.algebra
        worst = 0.0
        for w in cp3_dec.h_basis:
            for x in cp3_dec.m_basis:
                res = cp3_dec.project_h(a.bracket(w, x))
                worst = max(worst, a.norm(res))
        assert worst < 1e-10

    def test_projections_complementary(self, cp3_dec):
        d = cp3_dec.algebra.dimension
        assert np.allclose(cp3_dec.pr_h + cp3_dec.pr_m, np.eye(d), atol=1e-10)
        assert np.allclose(cp3_dec.pr_h @ cp3_dec.pr_m, 0.0, atol=1e-10)

    def test_project_m_examples(self, sphere_dec):
        x = np.array([1.0, 0.0, 2.0])  # e1 + 2 e3
        assert np.allclose(sphere_dec.project_m(x), [1, 0, 0], atol=1e-12)
        assert np.allclose(sphere_dec.project_m([0, 0, 5.0]), 0.0, atol=1e-12)
        m_vec = sphere_dec.m_basis[0]
        assert np.allclose(sphere_dec.project_m(m_vec), m_vec, atol=1e-12)
        # idempotence
        assert np.allclose(
            sphere_dec.project_m(sphere_dec.project_m(x)),
            sphere_dec.project_m(x), atol=1e-12)


class TestBracketM:
    def test_sphere_bracket_lands_in_h(self, sphere_dec):
        assert np.allclose(
            sphere_dec.bracket_m([1, 0, 0], [0, 1, 0]), 0.0, atol=1e-12)

    def test_cross_factor_zero(self, su2xsu2_dec):
        x = np.zeros(6)
        y = np.zeros(6)
        x[0], y[3] = 1.0, 1.0
        assert np.allclose(su2xsu2_dec.bracket_m(x, y), 0.0, atol=1e-12)

    def test_against_compose_oracle(self, cp3_dec):
        # Oracle: compose the raw bracket with project_m independently.
        rng = np.random.default_rng(3)
        a = cp3_dec.algebra
        nonzero_seen = False
        for _ in range(20):
            cx = rng.standard_normal(cp3_dec.dim_m)
            cy = rng.standard_normal(cp3_dec.dim_m)
            x, y = cp3_dec.m_lift(cx), cp3_dec.m_lift(cy)
            direct = cp3_dec.project_m(a.bracket(x, y))
            assert np.allclose(cp3_dec.bracket_m(x, y), direct, atol=1e-10)
            if a.norm(direct) > 1e-6:
                nonzero_seen = True
        assert nonzero_seen


# ---------------------------------------------------------------------------
# root planes
# ---------------------------------------------------------------------------

def plane_invariants(dec, planes):
    a = dec.algebra
    B = a.inner
    m_planes = [p for p in planes if p.membership == "m"]
    dims = sum(p.basis.shape[0] for p in m_planes)
    assert dims == dec.dim_m
    # mutual orthogonality
    for p, q in itertools.combinations(m_planes, 2):
        gram = p.basis @ B @ q.basis.T
        assert np.max(np.abs(gram)) < 1e-10
    # skew rotation structure under every torus element
    for p in m_planes:
        for idx, t in enumerate(dec.torus):
            M = np.array([
                [a.pairing(p.basis[r], a.bracket(t, p.basis[c]))
                 for c in range(2)] for r in range(2)])
            assert abs(M[0, 0]) < 1e-8 and abs(M[1, 1]) < 1e-8
            assert abs(M[0, 1] + M[1, 0]) < 1e-8
            assert abs(abs(M[1, 0]) - abs(p.root[idx])) < 1e-8


class TestRootPlanes:
    def test_su3_flag_three_planes(self, su3_flag_dec):
        planes = lc.root_planes(su3_flag_dec)
        m_planes = [p for p in planes if p.membership == "m"]
        assert len(m_planes) == 3
        assert all(p.basis.shape[0] == 2 for p in m_planes)
        plane_invariants(su3_flag_dec, planes)

    def test_cp3_c2_pattern(self, cp3_dec):
        # C2 enumeration: m-roots {e1-e2}, {e1+e2}, {2e1} up to overall scale.
        planes = lc.root_planes(cp3_dec)
        m_planes = [p for p in planes if p.membership == "m"]
        h_planes = [p for p in planes if p.membership == "h"]
        assert len(m_planes) == 3
        assert len(h_planes) == 1  # the sp(1) root plane {2e2}
        roots = sorted(tuple(np.round(p.root, 6)) for p in m_planes)
        a = abs(roots[0][1])
        assert a > 0.1
        expect = sorted([
            (round(2 * a, 6), 0.0), (round(a, 6), round(-a, 6)),
            (round(a, 6), round(a, 6)),
        ])
        got = sorted((abs(r[0]), round(r[1], 6)) for r in roots)
        norm_expect = sorted((abs(r[0]), round(r[1], 6)) for r in expect)
        assert got == pytest.approx(norm_expect, abs=1e-5)
        plane_invariants(cp3_dec, planes)

    def test_su2xsu2_product_roots(self, su2xsu2_dec):
        planes = lc.root_planes(su2xsu2_dec)
        m_planes = [p for p in planes if p.membership == "m"]
        assert len(m_planes) == 2
        for p in m_planes:
            # each root is supported on exactly one torus factor
            assert np.sum(np.abs(p.root) > 1e-8) == 1
        plane_invariants(su2xsu2_dec, planes)

    def test_not_maximal_torus(self, su3):
        h = label_vectors(su3, ["D1"])
        dec = lc.build_decomposition(su3, h, torus_vectors=h)
        with pytest.raises(NotMaximalTorus):
            lc.root_planes(dec)

    def test_requires_torus(self, su3):
        dec = lc.build_decomposition(su3, label_vectors(su3, ["D1", "D2"]))
        with pytest.raises(NotMaximalTorus):
            lc.root_planes(dec)


def test_find_torus_su3(su3):
    h_basis = np.eye(su3.dimension)
    t = lc.find_torus(su3, h_basis)
    assert t.shape[0] == 2
    for i in range(t.shape[0]):
        for j in range(t.shape[0]):
            assert su3.norm(su3.bracket(t[i], t[j])) < 1e-9


def test_sp3_sp1_cubed_decomposition():
    a = lc.sp(3)
    h = label_vectors(a, ["I1", "J11", "K11", "I2", "J22", "K22",
                          "I3", "J33", "K33"])
    torus = label_vectors(a, ["I1", "I2", "I3"])
    dec = lc.build_decomposition(a, h, torus_vectors=torus)
    assert dec.dim_m == 12
    planes = lc.root_planes(dec)
    m_planes = [p for p in planes if p.membership == "m"]
    assert len(m_planes) == 6
