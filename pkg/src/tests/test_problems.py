import math

import numpy as np
import pytest

from numerics.errors import UnsupportedOperationError, ValidationError
from numerics.grid import make_grid
from numerics.problems import (
    ProblemSpec,
    build_problem,
    exact_state,
    pde_residual,
    sample_initial,
    traveling_wave,
)


@pytest.fixture
def wave():
    return traveling_wave(2.0)


def zero(x, y):
    return 0.0


def zero_t(x, y, t):
    return 0.0


class TestTravelingWave:
    def test_origin(self, wave):
        eu, ev = wave.exact

        assert eu(0.0, 0.0, 0.0) == 0.625
        assert ev(0.0, 0.0, 0.0) == 0.875

    def test_interior_point(self, wave):
        eu, ev = wave.exact

        assert eu(0.0, 0.5, 0.25) == pytest.approx(0.631829, abs=1e-6)
        assert ev(0.0, 0.5, 0.25) == pytest.approx(0.868171, abs=1e-6)

    @pytest.mark.parametrize("R", [0.5, 2.0, 64.0, 500.0])
    def test_components_sum(self, R):
        eu, ev = traveling_wave(R).exact
        x, y = np.meshgrid(np.linspace(0, 1, 9), np.linspace(0, 1, 9))

        for t in (0.0, 0.3, 1.0):
            np.testing.assert_allclose(eu(x, y, t) + ev(x, y, t), 1.5, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("R", [2.0, 64.0])
    @pytest.mark.parametrize("M", [4, 16, 32])
    def test_monotone_front(self, R, M):
        p = traveling_wave(R)
        g = make_grid(M, 4, 1.0)

        for t in (0.0, 0.5, 1.0):
            u = exact_state(p, g, t).u.values
            # axis 0 is x, axis 1 is y
            assert (np.diff(u, axis=0) <= 1e-15).all()
            assert (np.diff(u, axis=1) >= -1e-15).all()

    @pytest.mark.parametrize("R", [0.0, -1.0, float("inf")])
    def test_bad_reynolds(self, R):
        with pytest.raises(ValidationError) as e:
            traveling_wave(R)

        assert e.value.field == "R"

    @pytest.mark.parametrize("M", [2, 4, 8, 16, 32])
    def test_compatible_on_grids(self, wave, M):
        wave.check_compatibility(make_grid(M, 1, 1.0))


class TestProblemSpec:
    def test_incompatible_data(self):
        with pytest.raises(ValidationError) as e:
            ProblemSpec(
                R=2.0,
                T=1.0,
                ic_u=zero,
                ic_v=zero,
                bc_u=lambda x, y, t: 1.0,
                bc_v=zero_t,
            )

        assert e.value.field == "bc_u"

    def test_registry(self):
        p = build_problem("constant", R=2.0, value=0.25)

        assert p.name == "constant"
        assert p.exact[0](0.3, 0.3, 0.7) == 0.25

    def test_unknown(self):
        with pytest.raises(ValidationError):
            build_problem("vortex", R=2.0)


class TestSampling:
    def test_corner(self, wave):
        s = sample_initial(wave, make_grid(2, 1, 1.0))

        assert s.u[0, 0] == 0.625

    def test_zero_initial(self):
        p = ProblemSpec(R=1.0, T=1.0, ic_u=zero, ic_v=zero, bc_u=zero_t, bc_v=zero_t)

        s = sample_initial(p, make_grid(4, 1, 1.0))

        assert not s.u.values.any()
        assert not s.v.values.any()

    def test_steep_wave(self):
        s = sample_initial(traveling_wave(64.0), make_grid(8, 1, 1.0))

        want = (3.0 - 1.0 / (1.0 + math.exp(8.0))) / 4.0
        assert s.u[0, 8] == pytest.approx(want, rel=1e-14)
        assert s.u[0, 8] == pytest.approx(0.749916, abs=1e-6)

    def test_exact_at_zero_is_initial(self, wave):
        g = make_grid(8, 64, 1.0)

        a, b = exact_state(wave, g, 0.0), sample_initial(wave, g)

        assert np.array_equal(a.u.values, b.u.values)
        assert np.array_equal(a.v.values, b.v.values)

    def test_exact_final_corner(self, wave):
        s = exact_state(wave, make_grid(4, 16, 1.0), 1.0)

        want = (3.0 - 1.0 / (1.0 + math.exp(-0.0625))) / 4.0
        assert s.u[0, 0] == pytest.approx(want, rel=1e-14)
        assert s.u[0, 0] == pytest.approx(0.621095, abs=2e-6)
        np.testing.assert_allclose(s.u.values + s.v.values, 1.5, rtol=0, atol=1e-15)

    def test_exact_outside_window(self, wave):
        with pytest.raises(ValidationError):
            exact_state(wave, make_grid(4, 16, 1.0), 1.5)

    def test_exact_missing(self):
        p = ProblemSpec(R=1.0, T=1.0, ic_u=zero, ic_v=zero, bc_u=zero_t, bc_v=zero_t)

        with pytest.raises(UnsupportedOperationError):
            exact_state(p, make_grid(4, 1, 1.0), 0.0)


class TestResidual:
    def test_indexed_form_shrinks(self, wave):
        coarse = pde_residual(wave, 16, 0.5)
        fine = pde_residual(wave, 64, 0.5)

        assert fine[0] < coarse[0] / 8
        assert fine[1] < coarse[1] / 8

    def test_printed_form_stalls(self):
        wave = traveling_wave(8.0)

        indexed = pde_residual(wave, 64, 0.5, form="indexed")
        printed = pde_residual(wave, 64, 0.5, form="printed")

        assert printed[0] == indexed[0]
        assert printed[1] > 100 * indexed[1]

    def test_bad_form(self, wave):
        with pytest.raises(ValidationError):
            pde_residual(wave, 8, 0.5, form="strong")
