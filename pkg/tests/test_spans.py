import numpy as np
import pytest

import frozen
import oracles
from bergmod.ball import pseudo_distance
from bergmod.bergman import Polynomial, SampledFunction, kernel_function, monomial_norm_sq
from bergmod.errors import PreconditionError, SamplingError
from bergmod.spans import (
    SamplePlan,
    WeightedPointMeasure,
    build_span,
    equivalent_measure,
    equivalent_measure_constant,
    project,
    project_oracle_linear,
    sample_variety,
    whiten,
)
from bergmod.varieties import AffineVariety, GraphVariety, LinearVariety, projection_matrix
from grids import sup_error, sup_grid, unit_polynomials

E2 = np.eye(2, dtype=complex)
LINE = LinearVariety.span(E2[0])


class TestSamplePlan:
    @pytest.mark.parametrize(
        "kwargs",
        [{"count": 0}, {"count": 5, "rho_max": 1.0}, {"count": 5, "rho_max": 0.0}, {"count": 5, "scheme": "grid"}],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SamplePlan(**kwargs)


class TestSampling:
    def test_linear_points_on_variety(self, rng):
        v = LinearVariety(np.linalg.qr(rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2)))[0])
        pts = sample_variety(v, SamplePlan(100, seed=1))
        m = projection_matrix(v)
        assert np.max(np.linalg.norm(pts - pts @ m.T, axis=1)) < 1e-12

    @pytest.mark.parametrize("radial", ["uniform", "hyperbolic", "slice"])
    def test_radius_bound_and_determinism(self, radial):
        plan = SamplePlan(150, rho_max=0.9, seed=3, radial=radial)
        a = sample_variety(LINE, plan)
        assert a.shape == (150, 2)
        assert np.max(np.linalg.norm(a, axis=1)) <= 0.9 + 1e-15
        assert np.array_equal(a, sample_variety(LINE, plan))

    def test_seed_changes_sample(self):
        a = sample_variety(LINE, SamplePlan(20, seed=1))
        b = sample_variety(LINE, SamplePlan(20, seed=2))
        assert not np.array_equal(a, b)

    def test_affine_slice(self):
        a = AffineVariety(np.array([0.5, 0.0]), LinearVariety.span(E2[1]))
        pts = sample_variety(a, SamplePlan(50, rho_max=0.9))
        assert np.allclose(pts[:, 0], 0.5, atol=1e-15)
        assert np.max(np.linalg.norm(pts, axis=1)) <= 0.9 + 1e-15

    def test_affine_point(self):
        a = AffineVariety(np.array([0.5, 0.0]), LinearVariety.zero(2))
        assert np.array_equal(sample_variety(a, SamplePlan(10)), [[0.5, 0.0]])

    def test_affine_outside_ball(self):
        a = AffineVariety(np.array([1.5, 0.0]), LinearVariety.span(E2[1]))
        with pytest.raises(PreconditionError):
            sample_variety(a, SamplePlan(10))

    def test_graph_points(self):
        g = GraphVariety(1, (Polynomial({(2,): 0.5}, 1),))
        pts = sample_variety(g, SamplePlan(40, rho_max=0.9, seed=4))
        assert pts.shape == (40, 2)
        assert max(g.residual(p) for p in pts) < 1e-12
        assert np.max(np.linalg.norm(pts, axis=1)) <= 0.9

    def test_separated_net(self):
        plan = SamplePlan(30, rho_max=0.95, scheme="separated-net", separation=0.2, seed=5)
        pts = sample_variety(LinearVariety.full(2), plan)
        assert len(pts) == 30
        assert oracles.greedy_min_distance(pts, lambda a, b: float(pseudo_distance(a, b))) >= 0.2

    def test_infeasible_net_reports_count(self):
        plan = SamplePlan(60, rho_max=0.3, scheme="separated-net", separation=0.5)
        with pytest.raises(SamplingError) as info:
            sample_variety(LINE, plan)
        assert 0 < info.value.achieved < 60


class TestBuildSpan:
    def test_single_point(self):
        lam = np.array([0.3, 0.4j])
        span = build_span([lam])
        assert span.gram[0, 0] == pytest.approx((1 - 0.25) ** -3)
        assert span.rank == 1

    def test_duplicate_point(self):
        lam = np.array([0.3, 0.4j])
        assert build_span([lam, lam]).rank == 1

    def test_empty(self):
        with pytest.raises(ValueError):
            build_span(np.zeros((0, 2)))

    def test_random_set_whitening(self, rng):
        from bergmod.bergman import sample_ball

        span = build_span(sample_ball(2, 50, rng))
        g, w = span.gram, span.whitening
        assert np.allclose(g, g.conj().T)
        assert np.min(np.linalg.eigvalsh(g)) > -1e-10 * np.max(np.abs(g))
        assert np.abs(w.conj().T @ g @ w - np.eye(span.rank)).max() < 1e-10

    def test_dense_span_whitening(self):
        # dense samples lose a few digits to conditioning; the bound is looser
        pts = sample_variety(LINE, SamplePlan(200, rho_max=0.95))
        span = build_span(pts)
        assert np.abs(span.whitening.conj().T @ span.gram @ span.whitening - np.eye(span.rank)).max() < 1e-6
        assert span.rank < 200

    def test_whiten_cutoff(self):
        # two nearly parallel unit vectors and one orthogonal to both
        g = np.array([[1.0, 1 - 1e-14, 0], [1 - 1e-14, 1.0, 0], [0, 0, 4.0]])
        w, vals = whiten(g)
        assert w.shape == (3, 2)
        assert np.abs(w.conj().T @ g @ w - np.eye(2)).max() < 1e-10


class TestProject:
    def test_kernel_in_span(self):
        pts = np.array([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5j]])
        span = build_span(pts)
        k = kernel_function(pts[1])
        proj = project(span, k)
        assert np.allclose(proj.coefficients, [0, 1, 0], atol=1e-10)
        grid = sup_grid(2, 50)
        assert sup_error(proj.evaluator, k, grid) < 1e-10
        assert proj.norm == pytest.approx(np.sqrt(k.norm_sq))

    def test_constant_converges(self):
        one = Polynomial.constant(1.0, 2)
        grid = sup_grid(2, 200)
        grid = grid @ projection_matrix(LINE).T
        errs = []
        for m in (25, 50, 100):
            span = build_span(sample_variety(LINE, SamplePlan(m)))
            errs.append(sup_error(project(span, one).evaluator, one, grid))
        assert errs[0] > errs[1] > errs[2]

    def test_annihilated_coordinate(self):
        f = Polynomial.monomial((0, 1))
        span = build_span(sample_variety(LINE, SamplePlan(200, rho_max=0.95)))
        proj = project(span, f)
        assert np.max(np.abs(proj.evaluator(sup_grid(2)))) < 1e-3

    def test_idempotent(self):
        span = build_span(sample_variety(LinearVariety.span([1, 1j]), SamplePlan(120)))
        f = unit_polynomials(2, [4])[0]
        first = project(span, f)
        second = project(span, first.evaluator)
        assert np.max(np.abs(second.coefficients - first.coefficients)) < 1e-8

    def test_norm_bounded_by_function_norm(self):
        span = build_span(sample_variety(LinearVariety.span([1, 0.5]), SamplePlan(100)))
        for f in unit_polynomials(2, [1, 3, 5], seed=3):
            assert project(span, f).norm <= np.sqrt(f.bergman_norm_sq()) + 1e-6

    def test_matches_oracle_on_plane(self):
        v = LinearVariety.span([1, 0, 0], [0, 1, 1j])
        span = build_span(sample_variety(v, SamplePlan(200)))
        grid = sup_grid(3)
        for f in unit_polynomials(3, [2, 5], seed=1):
            assert sup_error(project(span, f).evaluator, project_oracle_linear(v, f), grid) < 1e-3


class TestProjectOracle:
    def test_first_coordinate(self, rng):
        f = Polynomial.monomial((1, 0))
        w = rng.normal(size=(5, 2)) * 0.3
        assert np.allclose(project_oracle_linear(LINE, f)(w), w[:, 0])

    def test_second_coordinate(self, rng):
        g = project_oracle_linear(LINE, Polynomial.monomial((0, 1)))
        assert np.allclose(g(rng.normal(size=(5, 2)) * 0.3), 0)

    def test_diagonal_line(self, rng):
        v = LinearVariety.span([1, 1])
        f = Polynomial.monomial((1, 1))
        w = (rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))) * 0.3
        expected = ((w[:, 0] + w[:, 1]) / 2) ** 2
        assert np.allclose(project_oracle_linear(v, f)(w), expected)

    def test_generic_evaluator(self, rng):
        v = LinearVariety.span([1, 1])
        f = SampledFunction(lambda w: np.exp(w[:, 0]) * w[:, 1], 2)
        w = rng.normal(size=(5, 2)) * 0.3
        mw = w @ projection_matrix(v).T
        assert np.allclose(project_oracle_linear(v, f)(w), np.exp(mw[:, 0]) * mw[:, 1])


class TestEquivalentMeasure:
    def test_unit_mass(self):
        mu = equivalent_measure(LINE, SamplePlan(400))
        assert mu.total_mass == pytest.approx(1.0, abs=1e-12)

    def test_constant(self):
        assert equivalent_measure_constant(2, 1) == frozen.EQUIVALENT_MEASURE_C

    def test_first_coordinate_norm(self):
        mu = equivalent_measure(LINE, SamplePlan(400))
        val = mu.integrate(lambda p: np.abs(p[:, 0]) ** 2).real
        assert val == pytest.approx(float(monomial_norm_sq((1, 0))), abs=1e-12)

    @pytest.mark.parametrize(
        "v",
        [LINE, LinearVariety.span([1, 1j, 0], [0, 0, 1]), LinearVariety.span([1, 2, 0.5j])],
        ids=["line-c2", "plane-c3", "line-c3"],
    )
    def test_norm_identity_on_corpus(self, v):
        mu = equivalent_measure(v, SamplePlan(400))
        n = v.ambient_dim
        for g in unit_polynomials(n, [0, 1, 2, 3, 4], seed=n):
            qg = project_oracle_linear(v, g)
            lhs = mu.integrate(lambda p: np.abs(g(p)) ** 2).real
            assert abs(lhs - qg.bergman_norm_sq()) < 1e-3

    def test_point_variety(self):
        mu = equivalent_measure(LinearVariety.zero(2), SamplePlan(10))
        assert mu.total_mass == 1 and np.array_equal(mu.points, [[0, 0]])


class TestWeightedPointMeasure:
    def test_negative_weight(self):
        with pytest.raises(ValueError):
            WeightedPointMeasure(np.zeros((2, 2)), [1.0, -1.0])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            WeightedPointMeasure(np.zeros((2, 2)), [1.0])

    def test_csv_round_trip(self, tmp_path):
        mu = equivalent_measure(LINE, SamplePlan(50))
        path = tmp_path / "mu.csv"
        mu.to_csv(path)
        back = WeightedPointMeasure.from_csv(path)
        assert np.array_equal(back.points, mu.points) and np.array_equal(back.weights, mu.weights)

    def test_csv_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            WeightedPointMeasure.from_csv(path)

    def test_reweighted(self):
        mu = WeightedPointMeasure(np.array([[0.5, 0], [0, 0.5]]), [1.0, 2.0])
        nu = mu.reweighted(lambda p: np.abs(p[:, 0]))
        assert np.allclose(nu.weights, [0.5, 0.0])
