"""
Discrete norms, inner products and error reports against exact solutions.

All sums run sequentially in i-major order (spatial) or increasing n
(temporal) through np.cumsum, which never reorders its additions.
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from log.logger import get_logger as _logger
from numerics.errors import UnsupportedOperationError, ValidationError
from numerics.grid import Field, GridSpec
from numerics.problems import ProblemSpec, exact_state, sample_initial
from numerics.split_stepper import StageBuffers, composite_step

logger = _logger("analysis")

INNER = (slice(1, -1), slice(1, -1))


def _sequential_sum(values: np.ndarray) -> float:
    flat = np.ravel(values)
    if flat.size == 0:
        return 0.0
    return float(np.cumsum(flat)[-1])


def _same_grid(f: Field, g: Field) -> GridSpec:
    if f.grid != g.grid:
        raise ValidationError("grid", f"fields live on different grids {f.grid} / {g.grid}")
    return f.grid


def l2_spatial(f: Field) -> float:
    """h * sqrt(sum of f_ij^2 over interior nodes i, j = 1..M-1)."""
    f.require_finite("l2_spatial input")
    inner = f.values[INNER]
    return f.grid.h * math.sqrt(_sequential_sum(inner * inner))


def inner_product(f: Field, g: Field) -> float:
    """h^2 * sum of f_ij g_ij over interior nodes. Symmetric in its arguments."""
    grid = _same_grid(f, g)
    return grid.h * grid.h * _sequential_sum(f.values[INNER] * g.values[INNER])


def grad_inner_x(f: Field, g: Field) -> float:
    """
    h^2 * sum over j = 1..M-1, i = 0..M-1 of dx f_{i+1/2,j} * dx g_{i+1/2,j},
    with dx f_{i+1/2,j} = (f_{i+1,j} - f_{ij}) / h.
    """
    grid = _same_grid(f, g)
    h = grid.h
    df = (f.values[1:, 1:-1] - f.values[:-1, 1:-1]) / h
    dg = (g.values[1:, 1:-1] - g.values[:-1, 1:-1]) / h
    return h * h * _sequential_sum(df * dg)


def grad_inner_y(f: Field, g: Field) -> float:
    """The y twin of grad_inner_x: i = 1..M-1, j = 0..M-1 half nodes."""
    grid = _same_grid(f, g)
    h = grid.h
    df = (f.values[1:-1, 1:] - f.values[1:-1, :-1]) / h
    dg = (g.values[1:-1, 1:] - g.values[1:-1, :-1]) / h
    return h * h * _sequential_sum(df * dg)


def l2_dx(f: Field) -> float:
    return math.sqrt(grad_inner_x(f, f))


def l2_dy(f: Field) -> float:
    return math.sqrt(grad_inner_y(f, f))


def spacetime_norms(
    history: Sequence[float], k: float, include_initial: bool = True
) -> Tuple[float, float, float]:
    """
    Collapse per-step spatial errors e^0..e^N into space-time norms.

    Args:
        history: e^n for n = 0..N.
        k: Time step.
        include_initial: Sum over n = 0..N when True, n = 1..N otherwise.

    Returns:
        (l2, linf, l1) = (sqrt(k sum e^2), max e, k sum e).

    Raises:
        ValidationError: On an empty or non-finite history.
    """
    e = np.asarray(history, dtype=np.float64)
    if e.ndim != 1 or e.size == 0:
        raise ValidationError("history", "need at least one per-step error value")
    if not np.isfinite(e).all():
        raise ValidationError("history", "per-step errors must be finite")
    if not include_initial:
        e = e[1:]
        if e.size == 0:
            return 0.0, 0.0, 0.0
    l2 = math.sqrt(k * _sequential_sum(e * e))
    return l2, float(np.max(e)), k * _sequential_sum(e)


def observed_order(
    e_coarse: float, e_fine: float, refinement: float
) -> Optional[float]:
    """
    log(e_coarse / e_fine) / log(refinement).

    Returns None when either error is non-finite or not positive.
    """
    if refinement <= 1:
        raise ValidationError("refinement", f"need a ratio > 1, got {refinement!r}")
    if not (math.isfinite(e_coarse) and math.isfinite(e_fine)):
        return None
    if e_coarse <= 0 or e_fine <= 0:
        return None
    return math.log(e_coarse / e_fine) / math.log(refinement)


@dataclass(frozen=True)
class ErrorReport:
    """
    Space-time error norms of one run.

    On divergence the L2 and L1 norms are NaN and the Linf norms are Inf,
    matching how the published tables print blown-up runs.
    """

    l2_spacetime_u: float
    l2_spacetime_v: float
    linf_l2_u: float
    linf_l2_v: float
    l1_l2_u: float
    l1_l2_v: float
    exact_l2_u: float
    exact_l2_v: float
    steps_used: int
    diverged: bool
    diverged_at: Optional[Tuple[int, str]] = None
    include_initial: bool = True

    @property
    def relative_l2_u(self) -> float:
        return self.l2_spacetime_u / self.exact_l2_u if self.exact_l2_u else math.nan

    @property
    def relative_l2_v(self) -> float:
        return self.l2_spacetime_v / self.exact_l2_v if self.exact_l2_v else math.nan


def _diverged_report(
    steps_used: int,
    diverged_at: Tuple[int, str],
    exact_u: Sequence[float],
    exact_v: Sequence[float],
    k: float,
    include_initial: bool,
) -> ErrorReport:
    return ErrorReport(
        l2_spacetime_u=math.nan,
        l2_spacetime_v=math.nan,
        linf_l2_u=math.inf,
        linf_l2_v=math.inf,
        l1_l2_u=math.nan,
        l1_l2_v=math.nan,
        exact_l2_u=spacetime_norms(exact_u, k, include_initial)[0],
        exact_l2_v=spacetime_norms(exact_v, k, include_initial)[0],
        steps_used=steps_used,
        diverged=True,
        diverged_at=diverged_at,
        include_initial=include_initial,
    )


def run_with_errors(
    p: ProblemSpec,
    g: GridSpec,
    substeps: int = 1,
    include_initial: bool = True,
) -> ErrorReport:
    """
    Integrate p on g and measure the error against the exact solution at every level.

    Args:
        p: Problem with an exact solution.
        g: Grid; T is taken from g.
        substeps: m of the composite step, 1 for the plain split step.
        include_initial: Space-time sums over n = 0..N (True) or 1..N.

    Returns:
        ErrorReport. A blown-up run is reported, not raised: either a stage
        output turned non-finite, or a finite level is so large that its
        error norm overflows. The latter is reported at stage "norm" of the
        step that produced the level.
    """
    if p.exact is None:
        raise UnsupportedOperationError(f"problem '{p.name}' has no exact solution")

    bufs = StageBuffers(sample_initial(p, g))
    err_u: List[float] = []
    err_v: List[float] = []
    exact_u: List[float] = []
    exact_v: List[float] = []

    def record(n: int) -> bool:
        exact = exact_state(p, g, g.time(n))
        state = bufs.state_n
        with np.errstate(over="ignore"):
            err_u.append(l2_spatial(Field(g, state.u.values - exact.u.values)))
            err_v.append(l2_spatial(Field(g, state.v.values - exact.v.values)))
        exact_u.append(l2_spatial(exact.u))
        exact_v.append(l2_spatial(exact.v))
        return math.isfinite(err_u[-1]) and math.isfinite(err_v[-1])

    record(0)
    for n in range(g.N):
        outcome = composite_step(bufs, substeps, n, p)
        if not outcome.ok:
            logger.info(
                f"R={p.R} M={g.M} N={g.N}: {outcome.describe()}, reporting non-finite norms"
            )
            return _diverged_report(n, outcome.diverged_at, exact_u, exact_v, g.k, include_initial)
        bufs.advance()
        if not record(n + 1):
            logger.info(
                f"R={p.R} M={g.M} N={g.N}: error norm overflowed after step {n}, "
                "reporting non-finite norms"
            )
            return _diverged_report(n, (n, "norm"), exact_u, exact_v, g.k, include_initial)

    with np.errstate(over="ignore"):
        l2_u, linf_u, l1_u = spacetime_norms(err_u, g.k, include_initial)
        l2_v, linf_v, l1_v = spacetime_norms(err_v, g.k, include_initial)
    if not (math.isfinite(l2_u) and math.isfinite(l2_v)):
        logger.info(
            f"R={p.R} M={g.M} N={g.N}: space-time sum overflowed, reporting non-finite norms"
        )
        return _diverged_report(
            g.N - 1, (g.N - 1, "norm"), exact_u, exact_v, g.k, include_initial
        )
    report = ErrorReport(
        l2_spacetime_u=l2_u,
        l2_spacetime_v=l2_v,
        linf_l2_u=linf_u,
        linf_l2_v=linf_v,
        l1_l2_u=l1_u,
        l1_l2_v=l1_v,
        exact_l2_u=spacetime_norms(exact_u, g.k, include_initial)[0],
        exact_l2_v=spacetime_norms(exact_v, g.k, include_initial)[0],
        steps_used=g.N,
        diverged=False,
        include_initial=include_initial,
    )
    logger.info(
        f"R={p.R} M={g.M} N={g.N} m={substeps}: L2 u={l2_u:.4e} v={l2_v:.4e}"
    )
    return report
