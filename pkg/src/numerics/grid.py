"""
Discretization parameters and grid functions on the unit square.

Nodes are (x_i, y_j) = (i/M, j/M) for 0 <= i, j <= M. Storage is a dense
(M+1) x (M+1) float64 array indexed [i, j], so rows are constant-x lines.
"""

import io
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Tuple, Union

import numpy as np

from log.logger import get_logger as _logger
from numerics.errors import NonFiniteFieldError, ValidationError

logger = _logger("grid")

SNAPSHOT_HEADER = "x y u v"
SNAPSHOT_FORMAT = "%.12e"

Sampler2D = Callable[[np.ndarray, np.ndarray], Union[np.ndarray, float]]


@dataclass(frozen=True)
class GridSpec:
    """
    Uniform space-time discretization of (0,1)^2 x (0,T).

    Attributes:
        M: Cells per axis, nodes run 0..M.
        N: Number of time steps.
        h: Mesh spacing 1/M.
        k: Time step T/N.
        T: Final time.
    """

    M: int
    N: int
    h: float
    k: float
    T: float

    @cached_property
    def coordinates(self) -> np.ndarray:
        # i/M keeps x_M == 1.0 exactly for every M
        x = np.arange(self.M + 1, dtype=np.float64) / self.M
        x.flags.writeable = False
        return x

    @cached_property
    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        X, Y = np.meshgrid(self.coordinates, self.coordinates, indexing="ij")
        X.flags.writeable = False
        Y.flags.writeable = False
        return X, Y

    @cached_property
    def boundary_nodes(self) -> Tuple[np.ndarray, np.ndarray]:
        """Indices (i, j) of every boundary node, i-major, corners listed once."""
        ring = np.zeros((self.M + 1, self.M + 1), dtype=bool)
        ring[0, :] = ring[-1, :] = ring[:, 0] = ring[:, -1] = True
        ii, jj = np.nonzero(ring)
        return ii, jj

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.M + 1, self.M + 1)

    def time(self, n: int) -> float:
        return n * self.k


def make_grid(M: int, N: int, T: float) -> GridSpec:
    """
    Build the GridSpec for M cells per axis and N steps up to time T.

    Raises:
        ValidationError: If M < 2, N < 1 or T is not a positive finite number.
    """
    if isinstance(M, bool) or not isinstance(M, (int, np.integer)) or M < 2:
        raise ValidationError("M", f"need an integer >= 2, got {M!r}")
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)) or N < 1:
        raise ValidationError("N", f"need an integer >= 1, got {N!r}")
    if not math.isfinite(T) or T <= 0:
        raise ValidationError("T", f"need a positive final time, got {T!r}")

    M, N, T = int(M), int(N), float(T)
    grid = GridSpec(M=M, N=N, h=1.0 / M, k=T / N, T=T)
    logger.debug(f"Grid M={M} N={N} h={grid.h!r} k={grid.k!r} T={T!r}")
    return grid


def _first_non_finite(values: np.ndarray) -> Tuple[int, int]:
    i, j = np.argwhere(~np.isfinite(values))[0]
    return int(i), int(j)


@dataclass(frozen=True, eq=False)
class Field:
    """
    A scalar grid function. Values are read-only once the Field exists.

    `finite` is True iff every entry passes np.isfinite.
    """

    grid: GridSpec
    values: np.ndarray
    finite: bool = field(init=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise ValidationError(
                "values", f"shape {values.shape} does not match grid {self.grid.shape}"
            )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "finite", bool(np.isfinite(values).all()))

    def __getitem__(self, node: Tuple[int, int]) -> float:
        return float(self.values[node])

    def require_finite(self, what: str = "field") -> "Field":
        if not self.finite:
            raise NonFiniteFieldError(
                f"{what} is not finite", _first_non_finite(self.values)
            )
        return self


@dataclass(frozen=True, eq=False)
class State:
    """The velocity pair (u, v) on one grid."""

    u: Field
    v: Field

    def __post_init__(self):
        if self.u.grid != self.v.grid:
            raise ValidationError("state", "u and v live on different grids")

    @property
    def grid(self) -> GridSpec:
        return self.u.grid

    @property
    def finite(self) -> bool:
        return self.u.finite and self.v.finite

    @classmethod
    def from_arrays(cls, grid: GridSpec, u: np.ndarray, v: np.ndarray) -> "State":
        return cls(Field(grid, u), Field(grid, v))


def sample_field(g: GridSpec, f: Sampler2D) -> Field:
    """
    Sample f at every node: values[i, j] = f(x_i, y_j).

    f is called once with the two coordinate arrays; a scalar result is
    broadcast. Non-finite samples are kept and flag the Field as non-finite.
    """
    X, Y = g.mesh
    values = np.broadcast_to(np.asarray(f(X, Y), dtype=np.float64), g.shape).copy()
    sampled = Field(g, values)
    if not sampled.finite:
        logger.warning(
            f"Sampled field has non-finite values, first at {_first_non_finite(values)}"
        )
    return sampled


def format_snapshot(s: State) -> str:
    """
    Render a State in the snapshot text format.

    One header line `# x y u v`, then one line per node in i-major order.
    """
    X, Y = s.grid.mesh
    data = np.column_stack(
        (X.ravel(), Y.ravel(), s.u.values.ravel(), s.v.values.ravel())
    )
    buffer = io.StringIO()
    np.savetxt(
        buffer,
        data,
        fmt=SNAPSHOT_FORMAT,
        delimiter=" ",
        header=SNAPSHOT_HEADER,
        comments="# ",
    )
    return buffer.getvalue()


def read_snapshot(path: Union[str, Path]) -> Tuple[np.ndarray, ...]:
    """
    Load a snapshot file.

    Returns:
        Tuple of (x, y, u, v), each an (M+1) x (M+1) array in [i, j] layout.
    """
    data = np.loadtxt(path, comments="#", ndmin=2)
    side = math.isqrt(data.shape[0])
    if side * side != data.shape[0] or data.shape[1] != 4:
        raise ValidationError("snapshot", f"{path} does not hold a square grid")
    return tuple(data[:, c].reshape(side, side) for c in range(4))
