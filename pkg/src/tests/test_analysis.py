import math

import numpy as np
import pytest

from harness.analysis import (
    grad_inner_x,
    grad_inner_y,
    inner_product,
    l2_dx,
    l2_dy,
    l2_spatial,
    observed_order,
    run_with_errors,
    spacetime_norms,
)
from numerics.errors import (
    NonFiniteFieldError,
    UnsupportedOperationError,
    ValidationError,
)
from numerics.grid import Field, make_grid, sample_field
from numerics.problems import ProblemSpec, constant_problem, traveling_wave


@pytest.fixture
def m2():
    return make_grid(2, 1, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1729)


def single_interior(g, value):
    values = np.zeros(g.shape)
    values[1, 1] = value
    return Field(g, values)


class TestSpatialNorms:
    def test_zero(self, m2):
        assert l2_spatial(Field(m2, np.zeros(m2.shape))) == 0.0

    def test_single_node(self, m2):
        assert l2_spatial(single_interior(m2, 1.0)) == 0.5

    def test_boundary_ignored(self, m2):
        values = np.full(m2.shape, 9.0)
        values[1, 1] = 1.0

        assert l2_spatial(Field(m2, values)) == 0.5

    def test_inner_product(self, m2):
        f = single_interior(m2, 2.0)

        assert inner_product(f, f) == 1.0
        assert inner_product(f, Field(m2, np.zeros(m2.shape))) == 0.0

    def test_inner_product_grid_mismatch(self, m2):
        other = make_grid(4, 1, 1.0)

        with pytest.raises(ValidationError):
            inner_product(Field(m2, np.zeros(m2.shape)), Field(other, np.zeros(other.shape)))

    def test_non_finite(self, m2):
        with pytest.raises(NonFiniteFieldError):
            l2_spatial(single_interior(m2, np.nan))

    def test_gradient_products(self):
        g = make_grid(4, 1, 1.0)
        f = sample_field(g, lambda x, y: x)

        assert grad_inner_x(f, f) == 0.75
        assert grad_inner_y(f, f) == 0.0
        assert l2_dx(f) == math.sqrt(0.75)
        assert l2_dy(f) == 0.0

    def test_gradient_symmetry(self, rng):
        g = make_grid(8, 1, 1.0)
        f = Field(g, rng.normal(size=g.shape))
        h = Field(g, rng.normal(size=g.shape))

        assert grad_inner_x(f, h) == pytest.approx(grad_inner_x(h, f), rel=1e-12)
        assert grad_inner_y(f, h) == pytest.approx(grad_inner_y(h, f), rel=1e-12)


class TestNormAxioms:
    def test_random_fields(self, rng):
        g = make_grid(8, 1, 1.0)
        for _ in range(1000):
            f = Field(g, rng.uniform(-1.0, 1.0, g.shape))
            h = Field(g, rng.uniform(-1.0, 1.0, g.shape))
            c = rng.uniform(-10.0, 10.0)

            nf, nh = l2_spatial(f), l2_spatial(h)
            assert nf >= 0.0
            assert l2_spatial(Field(g, c * f.values)) == pytest.approx(abs(c) * nf, rel=1e-12)
            assert l2_spatial(Field(g, f.values + h.values)) <= nf + nh + 1e-12
            assert inner_product(f, h) == inner_product(h, f)
            assert inner_product(f, f) == pytest.approx(nf * nf, rel=1e-12)


class TestSpacetimeNorms:
    def test_zero(self):
        assert spacetime_norms([0.0, 0.0, 0.0], 0.5) == (0.0, 0.0, 0.0)

    def test_pythagorean(self):
        assert spacetime_norms([0.0, 3.0, 4.0], 1.0) == (5.0, 4.0, 7.0)

    def test_constant(self):
        N, c = 8, 0.3
        k = 1.0 / N

        l2, linf, l1 = spacetime_norms([c] * (N + 1), k)

        assert linf == c
        assert l1 == pytest.approx(c * k * (N + 1), rel=1e-15)
        assert l2 == pytest.approx(c * math.sqrt(k * (N + 1)), rel=1e-15)

    def test_without_initial_level(self):
        assert spacetime_norms([2.0, 3.0, 4.0], 1.0, include_initial=False) == (5.0, 4.0, 7.0)

    def test_l1_bounded_by_l2(self, rng):
        for _ in range(1000):
            N = int(rng.integers(1, 64))
            k = 1.0 / N
            history = rng.uniform(0.0, 1.0, N + 1)

            l2, _, l1 = spacetime_norms(history, k)

            # T + k with T = 1 is the total weight of the N + 1 levels
            assert l1 <= math.sqrt(1.0 + k) * l2 * (1.0 + 1e-12)

    @pytest.mark.parametrize("history", [[], [1.0, np.nan]])
    def test_rejects(self, history):
        with pytest.raises(ValidationError):
            spacetime_norms(history, 0.1)


class TestObservedOrder:
    def test_exact_power(self):
        assert observed_order(1e-2, 2.5e-3, 2.0) == pytest.approx(2.0, rel=1e-12)

    def test_reference_ratio(self):
        assert observed_order(7.391e-4, 4.285e-4, 2.0) == pytest.approx(0.787, abs=1e-3)

    def test_stagnation(self):
        assert observed_order(3.0e-4, 3.0e-4, 2.0) == 0.0

    @pytest.mark.parametrize("coarse, fine", [(np.nan, 1e-3), (1e-3, np.inf), (0.0, 1e-3)])
    def test_undefined(self, coarse, fine):
        assert observed_order(coarse, fine, 2.0) is None

    def test_bad_refinement(self):
        with pytest.raises(ValidationError):
            observed_order(1e-3, 1e-4, 1.0)


class TestRunWithErrors:
    def test_initial_error_vanishes(self):
        p = traveling_wave(2.0)
        g = make_grid(2, 4, 1.0)

        with_initial = run_with_errors(p, g)
        without = run_with_errors(p, g, include_initial=False)

        assert not with_initial.diverged
        assert with_initial.steps_used == 4
        assert with_initial.l1_l2_u == without.l1_l2_u
        assert with_initial.l2_spacetime_u == without.l2_spacetime_u

    def test_constant_problem_exact(self):
        report = run_with_errors(constant_problem(2.0), make_grid(4, 16, 1.0))

        assert report.l2_spacetime_u == 0.0
        assert report.linf_l2_v == 0.0
        assert report.relative_l2_u == 0.0

    def test_diffusive_limit_coarsest(self):
        report = run_with_errors(traveling_wave(2.0), make_grid(2, 4, 1.0))

        assert report.l2_spacetime_u == pytest.approx(2.451e-4, rel=1e-2)
        assert report.l2_spacetime_v == pytest.approx(report.l2_spacetime_u, rel=1e-10)
        assert 0.0 < report.relative_l2_u < 1e-2

    def test_diverged(self):
        report = run_with_errors(traveling_wave(2.0), make_grid(8, 8, 1.0))

        assert report.diverged
        assert math.isnan(report.l2_spacetime_u) and math.isnan(report.l1_l2_v)
        assert math.isinf(report.linf_l2_u)
        assert report.steps_used < 8
        assert report.diverged_at[0] == report.steps_used

    @pytest.mark.parametrize("R, M", [(8.0, 16), (64.0, 32), (256.0, 32)])
    def test_norm_overflow_reported(self, R, M):
        report = run_with_errors(traveling_wave(R), make_grid(M, 4, 1.0))

        assert report.diverged
        assert report.diverged_at[1] == "norm"
        assert report.diverged_at[0] == report.steps_used
        assert math.isnan(report.l2_spacetime_u) and math.isnan(report.l1_l2_v)
        assert math.isinf(report.linf_l2_v)

    def test_composite_finite(self):
        report = run_with_errors(traveling_wave(2.0), make_grid(8, 8, 1.0), substeps=8)

        assert not report.diverged
        assert math.isfinite(report.l2_spacetime_u)

    def test_needs_exact(self):
        p = ProblemSpec(
            R=1.0,
            T=1.0,
            ic_u=lambda x, y: 0.0,
            ic_v=lambda x, y: 0.0,
            bc_u=lambda x, y, t: 0.0,
            bc_v=lambda x, y, t: 0.0,
        )

        with pytest.raises(UnsupportedOperationError):
            run_with_errors(p, make_grid(4, 4, 1.0))
