import itertools

import numpy as np
import pytest

from homflag import minkowski as mk
from homflag import presets
from homflag.errors import (
    DimensionMismatch,
    NotStronglyConvex,
    StepTooLarge,
    ZeroVector,
)


def two_block(eps, t=(1.0, 1.0), sizes=(2, 2)):
    return mk.BlockPerturbed(blocks=mk.BlockStructure.from_sizes(sizes),
                             t=t, eps=eps)


def sample_families():
    rng = np.random.default_rng(11)
    A = rng.standard_normal((3, 3))
    Q = A @ A.T + 3 * np.eye(3)
    return [
        mk.Riemannian(Q=np.eye(4)),
        mk.Riemannian(Q=Q),
        mk.Randers(Q=np.eye(3), b=np.array([0.4, -0.1, 0.2])),
        mk.Randers(Q=Q, b=np.array([0.15, 0.0, -0.1])),
        two_block(0.0),
        two_block(0.3),
        two_block(0.25, t=(1.0, 2.0, 0.7), sizes=(2, 1, 3)),
    ]


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

class TestEvaluate:
    def test_riemannian_identity(self):
        n = mk.Riemannian(Q=np.eye(2))
        assert n.evaluate([3.0, 4.0]) == pytest.approx(5.0, abs=1e-15)

    def test_block_eps_zero_is_euclidean(self):
        n = two_block(0.0)
        rng = np.random.default_rng(0)
        for _ in range(10):
            y = rng.standard_normal(4)
            assert n.evaluate(y) == pytest.approx(np.linalg.norm(y), rel=1e-14)

    def test_block_pure_block_input(self):
        n = two_block(0.5)
        # y entirely in block 1 with alpha_1(y) = 2: F = 2 sqrt(1.5)
        y = np.array([2.0, 0.0, 0.0, 0.0])
        assert n.evaluate(y) == pytest.approx(2.0 * np.sqrt(1.5), rel=1e-14)

    def test_zero_and_positivity(self):
        for n in sample_families():
            assert n.evaluate(np.zeros(n.dimension)) == 0.0
            rng = np.random.default_rng(5)
            for _ in range(20):
                y = rng.standard_normal(n.dimension)
                assert n.evaluate(y) > 0.0

    def test_positive_homogeneity(self):
        rng = np.random.default_rng(2)
        for n in sample_families():
            for lam in (0.5, 2.0, 7.3):
                y = rng.standard_normal(n.dimension)
                assert n.evaluate(lam * y) == pytest.approx(
                    lam * n.evaluate(y), rel=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mk.Riemannian(Q=np.eye(3)).evaluate([1.0, 2.0])


# ---------------------------------------------------------------------------
# fundamental tensor
# ---------------------------------------------------------------------------

class TestFundamentalTensor:
    def test_riemannian_returns_q(self):
        rng = np.random.default_rng(1)
        A = rng.standard_normal((4, 4))
        Q = A @ A.T + 4 * np.eye(4)
        n = mk.Riemannian(Q=Q)
        y = rng.standard_normal(4)
        assert np.allclose(n.fundamental_tensor(y), n.Q, atol=1e-14)

    def test_randers_zero_b_reduces(self):
        n = mk.Randers(Q=np.eye(3), b=np.zeros(3))
        y = np.array([0.3, -1.2, 0.5])
        assert np.allclose(n.fundamental_tensor(y), np.eye(3), atol=1e-12)

    def test_block_matches_fd_oracle(self):
        rng = np.random.default_rng(42)
        n = two_block(0.3)
        for _ in range(100):
            y = rng.standard_normal(4)
            g = n.fundamental_tensor(y)
            gfd = mk.fd_fundamental_tensor(n, y)
            rel = np.linalg.norm(g - gfd) / np.linalg.norm(g)
            assert rel < 1e-6

    def test_all_families_match_fd(self):
        rng = np.random.default_rng(7)
        for n in sample_families():
            for _ in range(15):
                y = rng.standard_normal(n.dimension)
                g = n.fundamental_tensor(y)
                gfd = mk.fd_fundamental_tensor(n, y)
                assert np.linalg.norm(g - gfd) / np.linalg.norm(g) < 1e-6

    def test_zero_homogeneity(self):
        rng = np.random.default_rng(3)
        for n in sample_families():
            y = rng.standard_normal(n.dimension)
            g = n.fundamental_tensor(y)
            for lam in (0.5, 2.0, 7.3):
                assert np.allclose(n.fundamental_tensor(lam * y), g,
                                   rtol=1e-12, atol=1e-12)

    def test_euler_identities(self):
        rng = np.random.default_rng(4)
        for n in sample_families():
            y = rng.standard_normal(n.dimension)
            g = n.fundamental_tensor(y)
            # y' g(y) y = F(y)^2
            assert abs(y @ g @ y - n.evaluate(y) ** 2) < 1e-10
            # g(y) y = grad(F^2)/2 (tight central difference)
            h = 1e-6
            grad = np.array([
                (n.evaluate(y + h * e) ** 2 - n.evaluate(y - h * e) ** 2)
                / (2 * h) for e in np.eye(n.dimension)])
            assert np.allclose(g @ y, 0.5 * grad, atol=5e-9)

    def test_zero_vector_raises(self):
        with pytest.raises(ZeroVector):
            two_block(0.1).fundamental_tensor(np.zeros(4))

    def test_convexity_guards(self):
        # the convexity error surface: degenerate data is rejected upfront
        with pytest.raises(NotStronglyConvex):
            mk.Randers(Q=np.eye(2), b=np.array([1.0, 0.2]))
        with pytest.raises(NotStronglyConvex):
            mk.Riemannian(Q=np.diag([1.0, -0.5]))
        with pytest.raises(NotStronglyConvex):
            mk.BlockStructure.from_sizes([2], forms=[np.diag([1.0, 0.0])])
        with pytest.raises(NotStronglyConvex):
            two_block(-0.1)


class TestInnerProduct:
    def test_self_pairing_is_f_squared(self):
        rng = np.random.default_rng(9)
        for n in sample_families():
            y = rng.standard_normal(n.dimension)
            assert n.inner_product_at(y, y, y) == pytest.approx(
                n.evaluate(y) ** 2, rel=1e-10)

    def test_pairing_with_pole_is_half_derivative(self):
        rng = np.random.default_rng(10)
        for n in sample_families():
            y = rng.standard_normal(n.dimension)
            v = rng.standard_normal(n.dimension)
            h = 1e-7
            fwd = (n.evaluate(y + h * v) ** 2 - n.evaluate(y) ** 2) / h
            assert n.inner_product_at(y, y, v) == pytest.approx(
                0.5 * fwd, rel=1e-5, abs=1e-6)

    def test_riemannian_independent_of_y(self):
        n = mk.Riemannian(Q=np.diag([1.0, 2.0, 3.0]))
        rng = np.random.default_rng(12)
        u, v = rng.standard_normal((2, 3))
        vals = {round(n.inner_product_at(rng.standard_normal(3), u, v), 12)
                for _ in range(5)}
        assert len(vals) == 1
        assert vals.pop() == pytest.approx(u @ n.Q @ v)


# ---------------------------------------------------------------------------
# Cartan tensor
# ---------------------------------------------------------------------------

class TestCartanTensor:
    def test_riemannian_vanishes(self):
        n = mk.Riemannian(Q=np.eye(3))
        rng = np.random.default_rng(13)
        y, u, v, w = rng.standard_normal((4, 3))
        assert n.cartan_tensor(y, u, v, w) == 0.0

    def test_pole_slot_vanishes(self):
        rng = np.random.default_rng(14)
        for n in sample_families():
            y, u, v = rng.standard_normal((3, n.dimension))
            assert abs(n.cartan_tensor(y, y, u, v)) < 1e-12

    def test_total_symmetry(self):
        rng = np.random.default_rng(15)
        for n in sample_families():
            y, u, v, w = rng.standard_normal((4, n.dimension))
            vals = [n.cartan_tensor(y, *[args[i] for i in perm])
                    for args in [(u, v, w)]
                    for perm in itertools.permutations(range(3))]
            assert max(vals) - min(vals) < 1e-12

    def test_randers_matches_fd(self):
        n = mk.Randers(Q=np.eye(3), b=np.array([0.4, -0.1, 0.2]))
        rng = np.random.default_rng(16)
        for _ in range(25):
            y, u, v, w = rng.standard_normal((4, 3))
            c = n.cartan_tensor(y, u, v, w)
            cfd = mk.fd_cartan_tensor(n, y, u, v, w)
            assert abs(c - cfd) < 1e-5 * max(1.0, abs(c))

    def test_block_matches_fd(self):
        n = two_block(0.3)
        rng = np.random.default_rng(17)
        for _ in range(25):
            y, u, v, w = rng.standard_normal((4, 4))
            c = n.cartan_tensor(y, u, v, w)
            cfd = mk.fd_cartan_tensor(n, y, u, v, w)
            assert abs(c - cfd) < 1e-5 * max(1.0, abs(c))


# ---------------------------------------------------------------------------
# FD oracle behavior
# ---------------------------------------------------------------------------

class TestFdFundamentalTensor:
    def test_identity_metric(self):
        n = mk.Riemannian(Q=np.eye(2))
        g = mk.fd_fundamental_tensor(n, np.array([1.0, 0.0]), h=1e-4)
        assert np.allclose(g, np.eye(2), atol=1e-7)

    def test_second_order_convergence(self):
        n = two_block(0.4)
        y = np.array([0.9, -0.3, 0.7, 0.2])
        exact = n.fundamental_tensor(y)
        e1 = np.linalg.norm(mk.fd_fundamental_tensor(n, y, h=2e-3) - exact)
        e2 = np.linalg.norm(mk.fd_fundamental_tensor(n, y, h=1e-3) - exact)
        assert e1 / e2 == pytest.approx(4.0, rel=0.35)

    def test_step_too_large(self):
        n = mk.Riemannian(Q=np.eye(2))
        with pytest.raises(StepTooLarge):
            mk.fd_fundamental_tensor(n, np.array([1.0, 0.0]), h=0.5)


# ---------------------------------------------------------------------------
# strong convexity
# ---------------------------------------------------------------------------

class TestStrongConvexity:
    def test_riemannian_exact(self):
        Q = np.diag([2.0, 5.0, 9.0])
        rep = mk.check_strong_convexity(mk.Riemannian(Q=Q), samples=64, seed=1)
        assert rep.min_eigenvalue == pytest.approx(2.0, abs=1e-12)

    def test_identity_blocks(self):
        n = mk.BlockPerturbed(
            blocks=mk.BlockStructure.from_sizes([2, 2, 2]),
            t=(1.0, 1.0, 1.0), eps=0.0)
        rep = mk.check_strong_convexity(n, samples=64, seed=1)
        assert rep.min_eigenvalue == pytest.approx(1.0, abs=1e-12)

    def test_reported_minimum_attained_by_direction(self):
        n = two_block(0.35, t=(1.0, 2.0))
        rep = mk.check_strong_convexity(n, samples=128, seed=3)
        again = np.linalg.eigvalsh(n._g_raw(rep.worst_direction))[0]
        assert abs(again - rep.min_eigenvalue) < 1e-12

    def test_eps_sweep(self):
        # The shipped scalarization L = sum t_i s_i + eps sqrt(sum s_i^2) is
        # strongly convex for every eps >= 0: L is convex and nondecreasing
        # in s on the cone s_i >= 0, each s_i is a convex quadratic, so
        # Hess F^2 >= sum t_i Q_i.  The sweep therefore reports a
        # non-increasing minimum that plateaus at min_i t_i lambda_min(Q_i)
        # (attained on pure-block directions) and stays positive: every
        # eps is admissible for convexity; "eps small" constrains only
        # curvature positivity downstream.
        eps_grid = [0.0, 0.2, 0.4, 0.8, 1.6, 4.0, 16.0]
        mins = [mk.check_strong_convexity(two_block(e), samples=128,
                                          seed=2).min_eigenvalue
                for e in eps_grid]
        assert all(a >= b - 1e-10 for a, b in zip(mins, mins[1:]))
        assert all(m > 0.999999 for m in mins)


# ---------------------------------------------------------------------------
# Ad(H)-invariance
# ---------------------------------------------------------------------------

class TestAdInvariance:
    def test_normal_metric_invariant(self):
        sp = presets.build_space("CP3")
        n = mk.Riemannian(Q=np.eye(sp.decomposition.dim_m))
        res = mk.check_ad_invariance(n, sp.decomposition, samples=48, seed=0)
        assert res < 1e-10

    def test_su3_block_metric_invariant(self):
        sp = presets.build_space("SU3/T2")
        n = mk.BlockPerturbed(
            blocks=mk.BlockStructure.from_sizes(sp.block_sizes),
            t=(1.0, 2.0, 3.0), eps=0.1)
        res = mk.check_ad_invariance(n, sp.decomposition, samples=48, seed=0)
        assert res < 1e-8

    def test_misaligned_blocks_detected(self):
        # negative control: a block boundary cutting across a root plane
        sp = presets.build_space("SU3/T2")
        n = mk.BlockPerturbed(
            blocks=mk.BlockStructure.from_sizes([1, 2, 3]),
            t=(1.0, 2.0, 3.0), eps=0.1)
        res = mk.check_ad_invariance(n, sp.decomposition, samples=48, seed=0)
        assert res > 1e-3

    def test_randers_b_breaks_invariance(self):
        sp = presets.build_space("SU2xSU2/T2")
        n = mk.Randers(Q=np.eye(4), b=np.array([0.3, 0.0, 0.0, 0.0]))
        res = mk.check_ad_invariance(n, sp.decomposition, samples=48, seed=0)
        assert res > 1e-3
