"""
Refinement ladders over (h, k) pairs and their tables.
"""

import dataclasses
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from log.logger import get_logger as _logger
from harness.analysis import ErrorReport, observed_order, run_with_errors
from numerics.errors import ValidationError
from numerics.grid import GridSpec, make_grid
from numerics.problems import ProblemSpec, traveling_wave
from numerics.split_stepper import check_stability, min_substeps

logger = _logger("convergence")

CSV_COLUMNS = [
    "h",
    "k",
    "L2_u",
    "L2_v",
    "Linf_u",
    "Linf_v",
    "L1_u",
    "L1_v",
    "order_L2_u",
    "stable",
    "diverged_at",
]
NUMBER_FORMAT = "%.6e"
# 1/h and T/k must be this close to an integer
INTEGER_TOLERANCE = 1e-9


class Coupling(str, Enum):
    """How the time step follows the mesh spacing along a ladder."""

    K_EQ_R_HALF_H2 = "k_eq_R_half_h2"
    K_EQ_QUARTER_H = "k_eq_quarter_h"
    K_EQ_H = "k_eq_h"

    def time_step(self, h: float, R: float) -> float:
        match self:
            case Coupling.K_EQ_R_HALF_H2:
                return 0.5 * R * h * h
            case Coupling.K_EQ_QUARTER_H:
                return 0.25 * h
            case Coupling.K_EQ_H:
                return h


@dataclass(frozen=True)
class LadderSpec:
    """
    A refinement study: one run per spacing in h_list, k tied to h by `coupling`.

    Attributes:
        coupling: Rule giving k from h (and R).
        h_list: Strictly decreasing powers of two.
        R: Reynolds number.
        T: Final time.
        substeps: m of the composite step used for every row, or "auto" for
            the smallest m that satisfies the restriction on each row.
        include_initial: Space-time sums over n = 0..N (True) or 1..N.
    """

    coupling: Coupling
    h_list: Tuple[float, ...]
    R: float
    T: float = 1.0
    substeps: Union[int, Literal["auto"]] = 1
    include_initial: bool = True

    def __post_init__(self):
        if self.substeps != "auto" and not (isinstance(self.substeps, int) and self.substeps >= 1):
            raise ValidationError(
                "substeps", f"expected a positive integer or 'auto', got {self.substeps!r}"
            )
        object.__setattr__(self, "coupling", Coupling(self.coupling))
        object.__setattr__(self, "h_list", tuple(float(h) for h in self.h_list))
        if not self.h_list:
            raise ValidationError("h_list", "a ladder needs at least one spacing")
        for h in self.h_list:
            exponent = math.log2(h) if h > 0 else math.nan
            if not (h > 0 and exponent == round(exponent)):
                raise ValidationError("h_list", f"{h!r} is not a power of two")
        if any(b >= a for a, b in zip(self.h_list, self.h_list[1:])):
            raise ValidationError("h_list", f"spacings must strictly decrease: {self.h_list}")

    def grids(self) -> List[GridSpec]:
        """
        Resolve every (h, k) pair to a GridSpec.

        Raises:
            ValidationError: If 1/h or T/k is not an integer, naming the pair.
        """
        out = []
        for h in self.h_list:
            k = self.coupling.time_step(h, self.R)
            M, N = 1.0 / h, self.T / k
            if abs(M - round(M)) > INTEGER_TOLERANCE or abs(N - round(N)) > INTEGER_TOLERANCE:
                raise ValidationError(
                    "h_list",
                    f"pair (h={h!r}, k={k!r}) gives non-integer M={M!r} or N={N!r}",
                )
            out.append(make_grid(int(round(M)), int(round(N)), self.T))
        return out


def halving_ladder(h_max: float, h_min: float) -> Tuple[float, ...]:
    """h_max, h_max/2, ... down to h_min inclusive. Empty when h_min > h_max."""
    out = []
    h = h_max
    while h >= h_min * (1.0 - 1e-12):
        out.append(h)
        h /= 2.0
    return tuple(out)


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    k: float
    l2_u: float
    l2_v: float
    linf_u: float
    linf_v: float
    l1_u: float
    l1_v: float
    observed_order_vs_prev: Optional[float] = None
    stable: bool = True
    diverged_at: Optional[Tuple[int, str]] = None
    report: Optional[ErrorReport] = field(default=None, compare=False, repr=False)

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None

    @classmethod
    def from_report(
        cls, g: GridSpec, report: ErrorReport, stable: bool
    ) -> "ConvergenceRow":
        return cls(
            h=g.h,
            k=g.k,
            l2_u=report.l2_spacetime_u,
            l2_v=report.l2_spacetime_v,
            linf_u=report.linf_l2_u,
            linf_v=report.linf_l2_v,
            l1_u=report.l1_l2_u,
            l1_v=report.l1_l2_v,
            stable=stable,
            diverged_at=report.diverged_at,
            report=report,
        )


def run_ladder(
    spec: LadderSpec,
    problem_factory: Callable[[float, float], ProblemSpec] = traveling_wave,
    workers: int = 1,
) -> List[ConvergenceRow]:
    """
    Run every pair of the ladder, unstable ones included, and attach observed orders.

    Args:
        spec: The ladder.
        problem_factory: Builds the problem from (R, T).
        workers: Rows run on a thread pool of this size; results keep ladder order.

    Returns:
        One ConvergenceRow per spacing. order_L2_u compares each row with the
        previous one when both are finite.
    """
    grids = spec.grids()
    problem = problem_factory(spec.R, spec.T)

    def run(g: GridSpec) -> ConvergenceRow:
        m = min_substeps(spec.R, g) if spec.substeps == "auto" else spec.substeps
        verdict = check_stability(spec.R, dataclasses.replace(g, N=g.N * m, k=g.k / m))
        if not verdict.satisfied:
            logger.warning(
                f"Running h={g.h} k={g.k} despite failed stability check "
                f"({verdict.binding_term} ratio "
                f"{max(verdict.diffusive_ratio, verdict.convective_ratio):.4g})"
            )
        report = run_with_errors(
            problem, g, substeps=m, include_initial=spec.include_initial
        )
        return ConvergenceRow.from_report(g, report, verdict.satisfied)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, grids))
    else:
        rows = [run(g) for g in grids]

    with_orders = rows[:1]
    for prev, row in zip(rows, rows[1:]):
        order = observed_order(prev.l2_u, row.l2_u, prev.h / row.h)
        with_orders.append(
            dataclasses.replace(row, observed_order_vs_prev=order)
        )

    for row in with_orders:
        logger.info(
            f"h={row.h:.6g} k={row.k:.6g} L2_u={row.l2_u:.4e} order={row.observed_order_vs_prev}"
        )
    return with_orders


def fitted_order(rows: Sequence[ConvergenceRow]) -> Optional[float]:
    """Least-squares slope of log L2_u against log h over finite, positive rows."""
    pts = [
        (row.h, row.l2_u)
        for row in rows
        if math.isfinite(row.l2_u) and row.l2_u > 0
    ]
    if len(pts) < 2:
        return None
    h, e = np.log(np.array(pts)).T
    slope, _ = np.polyfit(h, e, 1)
    return float(slope)


def _format_value(val: Any) -> str:
    if isinstance(val, bool):
        return "true" if val else "false"
    if val is None:
        return ""
    if isinstance(val, float):
        if math.isnan(val):
            return "NaN"
        if math.isinf(val):
            return "Inf" if val > 0 else "-Inf"
        return NUMBER_FORMAT % val
    if isinstance(val, tuple):
        return f"{val[0]}:{val[1]}"
    return str(val)


def _records(rows: Sequence[ConvergenceRow]) -> List[Dict[str, Any]]:
    return [
        {
            "h": row.h,
            "k": row.k,
            "L2_u": row.l2_u,
            "L2_v": row.l2_v,
            "Linf_u": row.linf_u,
            "Linf_v": row.linf_v,
            "L1_u": row.l1_u,
            "L1_v": row.l1_v,
            "order_L2_u": row.observed_order_vs_prev,
            "stable": row.stable,
            "diverged_at": row.diverged_at,
        }
        for row in rows
    ]


def emit_table(rows: Sequence[ConvergenceRow], format: str = "csv") -> str:
    """
    Serialize ladder rows.

    Args:
        rows: Non-empty rows.
        format: "csv" (fixed header, %.6e numbers, NaN/Inf literals) or "json"
            (a list of objects with the same keys and the same cell text).

    Raises:
        ValidationError: On empty rows or an unknown format.
    """
    if not rows:
        raise ValidationError("rows", "nothing to emit")
    if format not in ("csv", "json"):
        raise ValidationError("format", f"expected 'csv' or 'json', got {format!r}")

    records = [
        {key: _format_value(val) for key, val in record.items()}
        for record in _records(rows)
    ]
    df = pd.DataFrame(records, columns=CSV_COLUMNS, dtype=str)

    if format == "csv":
        buffer = io.StringIO()
        df.to_csv(buffer, index=False, lineterminator="\n")
        return buffer.getvalue()
    return json.dumps(df.to_dict(orient="records"), indent=2) + "\n"
