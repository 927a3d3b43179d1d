import logging

import numpy as np
import pytest

from numerics.errors import NonFiniteFieldError, ValidationError
from numerics.grid import (
    Field,
    State,
    format_snapshot,
    make_grid,
    read_snapshot,
    sample_field,
)
from numerics.problems import traveling_wave

logger = logging.getLogger("grid_tests")
logging.basicConfig(
    format="%(levelname)s:%(message)s",
)


@pytest.fixture
def grid():
    return make_grid(4, 8, 1.0)


class TestMakeGrid:
    def test_coarse(self):
        g = make_grid(2, 4, 1.0)

        assert g.h == 0.5
        assert g.k == 0.25

    def test_diffusive_limit_finest(self):
        g = make_grid(16, 256, 1.0)

        assert g.h == 2.0**-4
        assert g.k == 2.0**-8

    @pytest.mark.parametrize(
        "M, N, T, field",
        [
            (1, 4, 1.0, "M"),
            (4, 0, 1.0, "N"),
            (4, 4, 0.0, "T"),
            (4, 4, float("nan"), "T"),
            (4.0, 4, 1.0, "M"),
        ],
    )
    def test_rejects(self, M, N, T, field):
        with pytest.raises(ValidationError) as e:
            make_grid(M, N, T)

        assert e.value.field == field

    @pytest.mark.parametrize("M", [2, 3, 7, 10, 128])
    def test_end_coordinates_exact(self, M):
        x = make_grid(M, 1, 1.0).coordinates

        assert x[0] == 0.0
        assert x[-1] == 1.0

    @pytest.mark.parametrize("M", [3, 7, 10])
    def test_spacing_products(self, M):
        g = make_grid(M, 3 * M, 1.0)

        assert g.h * g.M == pytest.approx(1.0, rel=2**-52)
        assert g.k * g.N == pytest.approx(g.T, rel=2**-52)

    def test_boundary_nodes_once(self, grid):
        ii, jj = grid.boundary_nodes
        nodes = list(zip(ii.tolist(), jj.tolist()))

        assert len(nodes) == 4 * grid.M
        assert len(set(nodes)) == len(nodes)
        assert nodes == sorted(nodes)
        assert all(i in (0, grid.M) or j in (0, grid.M) for i, j in nodes)


class TestField:
    def test_read_only(self, grid):
        f = Field(grid, np.zeros(grid.shape))

        with pytest.raises(ValueError):
            f.values[1, 1] = 2.0

    def test_shape_mismatch(self, grid):
        with pytest.raises(ValidationError):
            Field(grid, np.zeros((3, 3)))

    def test_finite_flag(self, grid):
        values = np.zeros(grid.shape)
        values[2, 3] = np.inf

        f = Field(grid, values)

        assert not f.finite
        with pytest.raises(NonFiniteFieldError) as e:
            f.require_finite()
        assert e.value.node == (2, 3)

    def test_state_grid_mismatch(self, grid):
        other = make_grid(2, 1, 1.0)

        with pytest.raises(ValidationError):
            State(Field(grid, np.zeros(grid.shape)), Field(other, np.zeros(other.shape)))


class TestSampleField:
    def test_zero(self, grid):
        f = sample_field(grid, lambda x, y: 0.0)

        assert not f.values.any()
        assert f.finite

    def test_sum_of_coordinates(self):
        f = sample_field(make_grid(2, 1, 1.0), lambda x, y: x + y)

        assert f[1, 1] == 1.0

    def test_traveling_wave_corner(self):
        p = traveling_wave(2.0)

        f = sample_field(make_grid(4, 1, 1.0), p.ic_u)

        assert f[0, 0] == 0.625

    def test_pointwise_identity(self, grid):
        def fn(x, y):
            return x * x + 3.0 * y - x * y

        f = sample_field(grid, fn)

        for i in range(grid.M + 1):
            for j in range(grid.M + 1):
                assert f[i, j] == fn(grid.coordinates[i], grid.coordinates[j])

    def test_non_finite_flagged(self, grid):
        with np.errstate(divide="ignore"):
            f = sample_field(grid, lambda x, y: 1.0 / x)

        assert not f.finite


class TestSnapshot:
    def test_format(self):
        g = make_grid(2, 1, 1.0)
        s = State(sample_field(g, lambda x, y: x), sample_field(g, lambda x, y: y))

        lines = format_snapshot(s).splitlines()

        assert lines[0] == "# x y u v"
        assert len(lines) == 1 + 9
        assert lines[1] == " ".join(["%.12e" % 0.0] * 4)
        # i-major: second line is node (0, 1)
        assert lines[2].split() == ["%.12e" % v for v in (0.0, 0.5, 0.0, 0.5)]

    def test_read_back(self, grid, tmp_path):
        p = traveling_wave(2.0)
        s = State(sample_field(grid, p.ic_u), sample_field(grid, p.ic_v))
        path = tmp_path / "snap.txt"
        path.write_text(format_snapshot(s))

        x, y, u, v = read_snapshot(path)

        assert np.array_equal(x, grid.mesh[0])
        assert np.array_equal(y, grid.mesh[1])
        np.testing.assert_allclose(u, s.u.values, rtol=1e-12)
        np.testing.assert_allclose(v, s.v.values, rtol=1e-12)
