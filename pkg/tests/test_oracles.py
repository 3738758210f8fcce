"""Recompute every frozen reference value from its oracle."""

import mpmath
import numpy as np
import pytest

import frozen
import oracles


class TestFrozenGeometry:
    def test_moebius_example(self):
        img = oracles.moebius_mp([0.5, 0], [0, 0.5])
        assert complex(img[0]) == pytest.approx(frozen.MOEBIUS_EXAMPLE[0], abs=1e-15)
        assert complex(img[1]) == pytest.approx(frozen.MOEBIUS_EXAMPLE[1], abs=1e-15)
        assert float(img[1].real) == pytest.approx(-np.sqrt(3) / 4, abs=1e-15)

    def test_jacobian_example(self):
        fn = lambda w: np.array([complex(c) for c in oracles.moebius_mp([0.5, 0], w)])
        assert oracles.real_jacobian_det_fd(fn, [0, 0]) == pytest.approx(frozen.JACOBIAN_EXAMPLE, rel=1e-8)

    def test_gradient_example(self):
        fn = lambda w: sum(abs(complex(c)) ** 2 for c in oracles.moebius_mp([0.5, 0], w))
        grad = oracles.wirtinger_gradient_fd(fn, np.zeros(2))
        assert np.allclose(grad, frozen.GRAD_EXAMPLE, atol=1e-8)

    def test_ball_example(self):
        # plug z = (1/2, 0), s = 1/2 into the ellipsoid formulas by hand
        s, zz = 0.5, 0.25
        assert (1 - s * s) * 0.5 / (1 - s * s * zz) == pytest.approx(frozen.BALL_CENTER_EXAMPLE)
        assert (1 - zz) / (1 - s * s * zz) == pytest.approx(frozen.BALL_RHO_EXAMPLE)

    def test_kernel_example(self):
        val = (1 - mpmath.mpf(0.25)) ** -2
        assert float(val) == pytest.approx(frozen.KERNEL_INNER_EXAMPLE, rel=1e-15)


class TestFrozenNorms:
    @pytest.mark.parametrize("alpha", list(frozen.MONOMIAL_NORMS))
    def test_monomial_norms_by_monte_carlo(self, alpha):
        mean, se = oracles.monomial_norm_sq_mc(alpha, 10**6, seed=len(alpha))
        assert abs(mean - frozen.MONOMIAL_NORMS[alpha]) < 3 * se

    def test_equivalent_measure_constant(self):
        # normalized area on the disc is ds dtheta / 2pi in s = |t|^2
        assert float(1 / mpmath.quad(lambda s: 1 - s, [0, 1])) == pytest.approx(frozen.EQUIVALENT_MEASURE_C)


class TestFrozenAngles:
    @pytest.mark.parametrize("theta", list(frozen.LINE_PAIR_NORM_121))
    def test_line_pairs_by_truncation(self, theta):
        m1 = np.diag([1.0, 0.0]).astype(complex)
        u = np.array([np.cos(theta), np.sin(theta)])
        m2 = np.outer(u, u).astype(complex)
        val = oracles.quotient_norm_121_truncated(m1, m2, np.zeros((2, 2)), degree=8)
        assert val == pytest.approx(frozen.LINE_PAIR_NORM_121[theta], abs=1e-10)

    def test_plane_pair_by_truncation(self):
        psi = np.pi / 3
        e = np.eye(3)
        v = np.array([0, np.cos(psi), np.sin(psi)])
        m1 = np.diag([1.0, 1.0, 0.0]).astype(complex)
        m2 = (np.outer(e[0], e[0]) + np.outer(v, v)).astype(complex)
        m3 = np.outer(e[0], e[0]).astype(complex)
        val = oracles.quotient_norm_121_truncated(m1, m2, m3, degree=6)
        assert val == pytest.approx(frozen.PLANE_PAIR_NORM_121, abs=1e-10)

    @pytest.mark.parametrize("r", list(frozen.WITNESS_OVERLAP_SQ))
    def test_witness_values(self, r):
        lam = [mpmath.mpf(r), 0]
        w = [mpmath.mpf(r), mpmath.mpf(r) - 1]
        k = lambda a, b: (1 - oracles.inner_mp(b, a)) ** -3
        overlap = abs(k(lam, w)) ** 2 / (k(lam, lam) * k(w, w))
        assert float(overlap) == pytest.approx(frozen.WITNESS_OVERLAP_SQ[r], abs=1e-12)
        rho = mpmath.sqrt(sum(abs(c) ** 2 for c in oracles.moebius_mp([r, 0], [r, r - 1])))
        assert float(rho) == pytest.approx(frozen.WITNESS_RHO[r], abs=1e-12)


class TestGramOracle:
    def line_points(self, u, count, seed):
        rng = np.random.default_rng(seed)
        t = 0.9 * np.sqrt(rng.random(count)) * np.exp(2j * np.pi * rng.random(count))
        return t[:, None] * np.asarray(u, dtype=complex)[None, :]

    def test_same_line(self):
        pts = self.line_points([1, 0], 60, 0)
        assert abs(oracles.sampled_norm_121_gram(pts, pts, pts)) < 1e-10

    def test_single_kernels(self):
        # one kernel per span: the norm is the squared cosine between them
        a, b = np.array([[0.5, 0]]), np.array([[0.3, 0.3j]])
        k = lambda x, y: (1 - np.vdot(y, x)) ** -3
        cos_sq = abs(k(b[0], a[0])) ** 2 / (k(a[0], a[0]) * k(b[0], b[0])).real
        assert oracles.sampled_norm_121_gram(a, b, np.zeros((0, 2))) == pytest.approx(cos_sq, abs=1e-12)
