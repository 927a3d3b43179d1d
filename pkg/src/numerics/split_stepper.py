"""
Time-split MacCormack stepping for the coupled Burgers system.

One step is the symmetric product Lx(k/2) Ly(k) Lx(k/2): an x-sweep over
half a step, a y-sweep over a full step, another x-sweep over half a step.
Every stage reads a frozen input State and produces a fresh one; Dirichlet
data then overwrite all four boundary sides of the stage output.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Literal, Optional, Tuple

import numpy as np

from log.logger import get_logger as _logger
from numerics.errors import BoundaryDataError, ValidationError
from numerics.grid import GridSpec, State
from numerics.problems import ProblemSpec
from numerics.stencils import (
    backward_sweep,
    central_sweep,
    forward_sweep,
    interior,
    second_sweep,
)

logger = _logger("split_stepper")

# slack for the substep search only, pow() may land an ulp above an exact 1
SUBSTEP_TOLERANCE = 1e-12

Stage = Literal["Lx1", "Ly", "Lx2"]


class StepStatus(str, Enum):
    OK = "ok"
    DIVERGED = "diverged"


@dataclass(frozen=True)
class StabilityVerdict:
    """
    Outcome of the time-step restriction max{2k/(R h^2), k^(3/4)/h} <= 1.
    """

    diffusive_ratio: float
    convective_ratio: float
    satisfied: bool
    binding_term: Literal["diffusive", "convective"]


@dataclass(frozen=True)
class StepOutcome:
    status: StepStatus
    diverged_at: Optional[Tuple[int, Stage]] = None

    @property
    def ok(self) -> bool:
        return self.status is StepStatus.OK

    def describe(self) -> str:
        if self.ok:
            return "ok"
        n, stage = self.diverged_at
        return f"diverged at step {n}, stage {stage}"


@dataclass
class StageBuffers:
    """
    The work levels n, *, ** and n+1 of one split step.

    Stages never write into their input level. After a step, `advance()`
    promotes level n+1 to level n and clears the dummy levels.
    """

    state_n: State
    state_star: Optional[State] = None
    state_dstar: Optional[State] = None
    state_next: Optional[State] = None

    @property
    def grid(self) -> GridSpec:
        return self.state_n.grid

    def advance(self) -> None:
        if self.state_next is None:
            raise ValidationError("state_next", "no completed step to advance from")
        self.state_n = self.state_next
        self.state_star = self.state_dstar = self.state_next = None


def _ratios(R: float, h: float, k: float) -> Tuple[float, float]:
    return 2.0 * k / (R * h * h), k**0.75 / h


def check_stability(R: float, g: GridSpec) -> StabilityVerdict:
    """
    Evaluate the time-step restriction for Reynolds number R on grid g.

    Ties between the two ratios report the diffusive term as binding.

    Raises:
        ValidationError: If R is not positive.
    """
    if not math.isfinite(R) or R <= 0:
        raise ValidationError("R", f"Reynolds number must be positive, got {R!r}")
    diffusive, convective = _ratios(R, g.h, g.k)
    verdict = StabilityVerdict(
        diffusive_ratio=diffusive,
        convective_ratio=convective,
        satisfied=max(diffusive, convective) <= 1.0,
        binding_term="diffusive" if diffusive >= convective else "convective",
    )
    logger.debug(f"Stability R={R} h={g.h} k={g.k}: {verdict}")
    return verdict


def min_substeps(R: float, g: GridSpec) -> int:
    """
    Smallest m >= 1 with max{2k/(m R h^2), (k/m)^(3/4)/h} <= 1.

    The diffusive ratio falls like 1/m, so the search ends after at most
    ceil(2k/(R h^2)) + ceil((k^(3/4)/h)^(4/3)) candidates.
    """
    if not math.isfinite(R) or R <= 0:
        raise ValidationError("R", f"Reynolds number must be positive, got {R!r}")
    m = 1
    while max(_ratios(R, g.h, g.k / m)) > 1.0 + SUBSTEP_TOLERANCE:
        m += 1
    return m


def boundary_values(
    p: ProblemSpec, g: GridSpec, t_sample: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Sample the Dirichlet data on every boundary node at t_sample.

    Returns:
        (u_ring, v_ring) ordered like GridSpec.boundary_nodes.

    Raises:
        BoundaryDataError: If any sample is NaN/Inf, naming the node.
    """
    ii, jj = g.boundary_nodes
    x, y = g.coordinates[ii], g.coordinates[jj]
    rings = []
    for bc in (p.bc_u, p.bc_v):
        ring = np.broadcast_to(
            np.asarray(bc(x, y, t_sample), dtype=np.float64), x.shape
        )
        bad = ~np.isfinite(ring)
        if bad.any():
            first = int(np.argmax(bad))
            raise BoundaryDataError(
                (int(ii[first]), int(jj[first])), t_sample, float(ring[first])
            )
        rings.append(ring)
    return rings[0], rings[1]


def _with_ring(s: State, rings: Tuple[np.ndarray, np.ndarray]) -> State:
    ii, jj = s.grid.boundary_nodes
    u, v = s.u.values.copy(), s.v.values.copy()
    u[ii, jj] = rings[0]
    v[ii, jj] = rings[1]
    return State.from_arrays(s.grid, u, v)


def apply_bc(s: State, t_sample: float, p: ProblemSpec) -> State:
    """Overwrite the four boundary sides of u and v with phi1, phi2 at t_sample."""
    if not 0.0 <= t_sample <= p.T * (1.0 + 1e-12):
        raise ValidationError("t_sample", f"{t_sample!r} is outside [0, {p.T!r}]")
    return _with_ring(s, boundary_values(p, s.grid, t_sample))


def _advect_diffuse(
    s: State, dt: float, R: float, axis: Literal["x", "y"]
) -> State:
    g = s.grid
    rng = interior(g, axis)
    u, v = s.u.values, s.v.values
    out_u, out_v = u.copy(), v.copy()

    lines = slice(rng.lo, rng.hi + 1)
    pick = (lines, slice(None)) if axis == "x" else (slice(None), lines)
    carrier = (u if axis == "x" else v)[pick]
    inv_R = 1.0 / R

    for src, f, out in ((u, s.u, out_u), (v, s.v, out_v)):
        convective = central_sweep(f, rng)
        diffusive = second_sweep(f, rng)
        out[pick] = src[pick] + dt * (-carrier * convective + inv_R * diffusive)

    return State.from_arrays(g, out_u, out_v)


def stage_x(s: State, dt: float, R: float) -> State:
    """
    x-sweep of the split step.

    For i = 1..M-1 and every j:
        u* = u + dt * (-u * dx(u) + dxx(u) / R)
        v* = v + dt * (-u * dx(v) + dxx(v) / R)
    with centred differences. Columns i = 0 and i = M are copied. The
    caller passes dt = k/2 for the outer sweeps of a step.
    """
    return _advect_diffuse(s, dt, R, "x")


def stage_y(s: State, dt: float, R: float) -> State:
    """
    y-sweep of the split step: the transpose of stage_x with v as the
    carrier velocity, for j = 1..M-1 and every i. Rows j = 0 and j = M are copied.
    """
    return _advect_diffuse(s, dt, R, "y")


def pc_stage_x(s: State, dt: float, R: float) -> State:
    """
    Two-step MacCormack x-sweep.

    The predictor uses forward differences of level n, the corrector backward
    differences of the predictor, and the result is their average. Only used
    to check the collapsed stage_x against; the time loop never calls it.
    """
    g = s.grid
    rng = interior(g, "x")
    rows = slice(rng.lo, rng.hi + 1)
    inv_R = 1.0 / R

    u, v = s.u.values, s.v.values
    carrier = u[rows, :]
    pred_u, pred_v = u.copy(), v.copy()
    for src, f, out in ((u, s.u, pred_u), (v, s.v, pred_v)):
        out[rows, :] = src[rows, :] + dt * (
            -carrier * forward_sweep(f, rng) + inv_R * second_sweep(f, rng)
        )
    predictor = State.from_arrays(g, pred_u, pred_v)

    carrier = pred_u[rows, :]
    corr_u, corr_v = u.copy(), v.copy()
    for src, f, out in ((u, predictor.u, corr_u), (v, predictor.v, corr_v)):
        out[rows, :] = src[rows, :] + dt * (
            -carrier * backward_sweep(f, rng) + inv_R * second_sweep(f, rng)
        )

    out_u, out_v = u.copy(), v.copy()
    out_u[rows, :] = 0.5 * (pred_u[rows, :] + corr_u[rows, :])
    out_v[rows, :] = 0.5 * (pred_v[rows, :] + corr_v[rows, :])
    return State.from_arrays(g, out_u, out_v)


def predictor_corrector_gap(s: State, dt: float, R: float) -> float:
    """Max over interior nodes of |pc_stage_x - stage_x| for both components."""
    a, b = pc_stage_x(s, dt, R), stage_x(s, dt, R)
    inner = (slice(1, -1), slice(1, -1))
    return float(
        max(
            np.max(np.abs(a.u.values[inner] - b.u.values[inner])),
            np.max(np.abs(a.v.values[inner] - b.v.values[inner])),
        )
    )


def _split_step(
    s: State,
    dt: float,
    R: float,
    rings: Tuple[np.ndarray, np.ndarray],
) -> Tuple[Tuple[Optional[State], ...], Optional[Stage]]:
    """
    One Lx(dt/2) Ly(dt) Lx(dt/2) product with boundary data `rings`.

    Stops at the first non-finite stage output.
    """
    star = _with_ring(stage_x(s, dt / 2, R), rings)
    if not star.finite:
        return (star, None, None), "Lx1"
    dstar = _with_ring(stage_y(star, dt, R), rings)
    if not dstar.finite:
        return (star, dstar, None), "Ly"
    nxt = _with_ring(stage_x(dstar, dt / 2, R), rings)
    if not nxt.finite:
        return (star, dstar, nxt), "Lx2"
    return (star, dstar, nxt), None


def _store(
    bufs: StageBuffers,
    levels: Tuple[Optional[State], ...],
    failed: Optional[Stage],
    n: int,
) -> StepOutcome:
    bufs.state_star, bufs.state_dstar, bufs.state_next = levels
    if failed is not None:
        logger.debug(f"Non-finite output at step {n}, stage {failed}")
        return StepOutcome(StepStatus.DIVERGED, (n, failed))
    return StepOutcome(StepStatus.OK)


def full_step(bufs: StageBuffers, n: int, p: ProblemSpec) -> StepOutcome:
    """
    Advance bufs.state_n from t^n to t^{n+1}.

    All three stage outputs receive boundary data sampled at t^{n+1}.
    """
    g = bufs.grid
    rings = boundary_values(p, g, (n + 1) * g.k)
    levels, failed = _split_step(bufs.state_n, g.k, p.R, rings)
    return _store(bufs, levels, failed, n)


def composite_step(
    bufs: StageBuffers, m: int, n: int, p: ProblemSpec
) -> StepOutcome:
    """
    Advance bufs.state_n by m substeps of k/m each.

    Substep q = 1..m samples the boundary at t^n + (q/m) k. With m = 1 this
    is full_step exactly.
    """
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise ValidationError("m", f"need a positive integer, got {m!r}")
    g = bufs.grid
    current = bufs.state_n
    dt = g.k / m
    for q in range(1, m + 1):
        rings = boundary_values(p, g, (n + q / m) * g.k)
        levels, failed = _split_step(current, dt, p.R, rings)
        if failed is not None or q == m:
            return _store(bufs, levels, failed, n)
        current = levels[2]
