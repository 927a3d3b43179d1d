"""
One-dimensional difference operators on grid functions.

Each operator comes in two forms: a pointwise evaluation at node (i, j) and
a sweep over a range of interior lines that writes into an optional
caller-provided array. Both forms perform the same floating-point operations
in the same order, so they agree bit for bit.
"""

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from numerics.errors import ValidationError
from numerics.grid import Field, GridSpec

Axis = Literal["x", "y"]


@dataclass(frozen=True)
class InteriorRange:
    """Inclusive interior index bounds lo..hi on the differencing axis."""

    axis: Axis
    lo: int
    hi: int

    def check(self, g: GridSpec) -> "InteriorRange":
        if self.axis not in ("x", "y"):
            raise ValidationError("axis", f"expected 'x' or 'y', got {self.axis!r}")
        if not 1 <= self.lo <= self.hi <= g.M - 1:
            raise ValidationError(
                "range", f"need 1 <= lo <= hi <= {g.M - 1}, got {self.lo}..{self.hi}"
            )
        return self

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


def interior(g: GridSpec, axis: Axis) -> InteriorRange:
    return InteriorRange(axis, 1, g.M - 1)


# pointwise, x direction


def central_x(f: Field, i: int, j: int) -> float:
    a, h = f.values, f.grid.h
    assert 1 <= i <= f.grid.M - 1, f"central_x needs an interior i, got {i}"
    return float((a[i + 1, j] - a[i - 1, j]) / (2.0 * h))


def second_x(f: Field, i: int, j: int) -> float:
    a, h = f.values, f.grid.h
    assert 1 <= i <= f.grid.M - 1, f"second_x needs an interior i, got {i}"
    return float((a[i + 1, j] - 2.0 * a[i, j] + a[i - 1, j]) / (h * h))


def forward_x(f: Field, i: int, j: int) -> float:
    a, h = f.values, f.grid.h
    assert 0 <= i <= f.grid.M - 1, f"forward_x needs 0 <= i <= M-1, got {i}"
    return float((a[i + 1, j] - a[i, j]) / h)


def backward_x(f: Field, i: int, j: int) -> float:
    a, h = f.values, f.grid.h
    assert 1 <= i <= f.grid.M, f"backward_x needs 1 <= i <= M, got {i}"
    return float((a[i, j] - a[i - 1, j]) / h)


# pointwise, y direction


def central_y(f: Field, i: int, j: int) -> float:
    a, h = f.values, f.grid.h
    assert 1 <= j <= f.grid.M - 1, f"central_y needs an interior j, got {j}"
    return float((a[i, j + 1] - a[i, j - 1]) / (2.0 * h))


def second_y(f: Field, i: int, j: int) -> float:
    a, h = f.values, f.grid.h
    assert 1 <= j <= f.grid.M - 1, f"second_y needs an interior j, got {j}"
    return float((a[i, j + 1] - 2.0 * a[i, j] + a[i, j - 1]) / (h * h))


def forward_y(f: Field, i: int, j: int) -> float:
    a, h = f.values, f.grid.h
    assert 0 <= j <= f.grid.M - 1, f"forward_y needs 0 <= j <= M-1, got {j}"
    return float((a[i, j + 1] - a[i, j]) / h)


def backward_y(f: Field, i: int, j: int) -> float:
    a, h = f.values, f.grid.h
    assert 1 <= j <= f.grid.M, f"backward_y needs 1 <= j <= M, got {j}"
    return float((a[i, j] - a[i, j - 1]) / h)


# sweeps


def _lines(a: np.ndarray, rng: InteriorRange, offset: int) -> np.ndarray:
    """View of lines lo+offset..hi+offset along the differencing axis."""
    lines = slice(rng.lo + offset, rng.hi + 1 + offset)
    return a[lines, :] if rng.axis == "x" else a[:, lines]


def _output(f: Field, rng: InteriorRange, out: Optional[np.ndarray]) -> np.ndarray:
    shape = (rng.size, f.grid.M + 1) if rng.axis == "x" else (f.grid.M + 1, rng.size)
    if out is None:
        return np.empty(shape, dtype=np.float64)
    if out.shape != shape:
        raise ValidationError("out", f"expected shape {shape}, got {out.shape}")
    return out


def central_sweep(
    f: Field, rng: InteriorRange, out: Optional[np.ndarray] = None
) -> np.ndarray:
    """(f[+1] - f[-1]) / 2h on every line of rng."""
    rng.check(f.grid)
    a = f.values
    out = _output(f, rng, out)
    np.subtract(_lines(a, rng, +1), _lines(a, rng, -1), out=out)
    out /= 2.0 * f.grid.h
    return out


def second_sweep(
    f: Field, rng: InteriorRange, out: Optional[np.ndarray] = None
) -> np.ndarray:
    """(f[+1] - 2 f[0] + f[-1]) / h^2 on every line of rng."""
    rng.check(f.grid)
    a, h = f.values, f.grid.h
    out = _output(f, rng, out)
    np.multiply(_lines(a, rng, 0), 2.0, out=out)
    np.subtract(_lines(a, rng, +1), out, out=out)
    out += _lines(a, rng, -1)
    out /= h * h
    return out


def forward_sweep(
    f: Field, rng: InteriorRange, out: Optional[np.ndarray] = None
) -> np.ndarray:
    """(f[+1] - f[0]) / h on every line of rng."""
    rng.check(f.grid)
    a = f.values
    out = _output(f, rng, out)
    np.subtract(_lines(a, rng, +1), _lines(a, rng, 0), out=out)
    out /= f.grid.h
    return out


def backward_sweep(
    f: Field, rng: InteriorRange, out: Optional[np.ndarray] = None
) -> np.ndarray:
    """(f[0] - f[-1]) / h on every line of rng."""
    rng.check(f.grid)
    a = f.values
    out = _output(f, rng, out)
    np.subtract(_lines(a, rng, 0), _lines(a, rng, -1), out=out)
    out /= f.grid.h
    return out
