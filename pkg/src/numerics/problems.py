"""
Initial-boundary value problems for the coupled Burgers system.

    u_t + u u_x + v u_y = (u_xx + u_yy) / R
    v_t + u v_x + v v_y = (v_xx + v_yy) / R      on (0,1)^2 x (0,T]

with u(x,y,0) = ic_u, v(x,y,0) = ic_v and Dirichlet data bc_u, bc_v on the
boundary. Samplers are numpy-aware: they receive coordinate arrays.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Literal, Optional, Tuple, Union

import numpy as np

from log.logger import get_logger as _logger
from numerics.errors import (
    NonFiniteFieldError,
    UnsupportedOperationError,
    ValidationError,
)
from numerics.grid import GridSpec, State, make_grid, sample_field

logger = _logger("problems")

Value = Union[np.ndarray, float]
InitialSampler = Callable[[np.ndarray, np.ndarray], Value]
BoundarySampler = Callable[[np.ndarray, np.ndarray, float], Value]

COMPATIBILITY_TOLERANCE = 1e-12
COMPATIBILITY_CHECK_M = 16


@dataclass(frozen=True)
class ProblemSpec:
    """
    Data of one initial-boundary value problem.

    Attributes:
        R: Reynolds number.
        T: Final time.
        ic_u, ic_v: Initial data u0(x, y), v0(x, y).
        bc_u, bc_v: Dirichlet data phi1(x, y, t), phi2(x, y, t).
        exact: Optional closed-form pair (u, v) as functions of (x, y, t).
        name: Label used in logs and reports.
    """

    R: float
    T: float
    ic_u: InitialSampler
    ic_v: InitialSampler
    bc_u: BoundarySampler
    bc_v: BoundarySampler
    exact: Optional[Tuple[BoundarySampler, BoundarySampler]] = None
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        if not math.isfinite(self.R) or self.R <= 0:
            raise ValidationError("R", f"Reynolds number must be positive, got {self.R!r}")
        if not math.isfinite(self.T) or self.T <= 0:
            raise ValidationError("T", f"final time must be positive, got {self.T!r}")
        self.check_compatibility(
            make_grid(COMPATIBILITY_CHECK_M, 1, self.T)
        )

    def check_compatibility(self, g: GridSpec) -> None:
        """
        Check bc(x, y, 0) == ic(x, y) on the boundary nodes of g.

        Raises:
            ValidationError: If the data disagree by more than 1e-12 anywhere.
        """
        ii, jj = g.boundary_nodes
        x, y = g.coordinates[ii], g.coordinates[jj]
        for name, ic, bc in (("u", self.ic_u, self.bc_u), ("v", self.ic_v, self.bc_v)):
            initial = np.broadcast_to(np.asarray(ic(x, y), dtype=np.float64), x.shape)
            boundary = np.broadcast_to(
                np.asarray(bc(x, y, 0.0), dtype=np.float64), x.shape
            )
            gap = np.abs(initial - boundary)
            if not (gap <= COMPATIBILITY_TOLERANCE).all():
                worst = int(np.argmax(np.where(np.isnan(gap), np.inf, gap)))
                raise ValidationError(
                    f"bc_{name}",
                    f"boundary data at t=0 disagrees with the initial data at node "
                    f"({int(ii[worst])}, {int(jj[worst])}) by {gap[worst]!r}",
                )


def _wave_term(R: float, x: Value, y: Value, t: float) -> Value:
    return 1.0 / (1.0 + np.exp(R * (-t - 4.0 * x + 4.0 * y) / 32.0))


def traveling_wave(R: float, T: float = 1.0) -> ProblemSpec:
    """
    The closed-form front moving along x - y.

        u(x,y,t) = (3 - 1/(1 + exp(R(-t - 4x + 4y)/32))) / 4
        v(x,y,t) = (3 + 1/(1 + exp(R(-t - 4x + 4y)/32))) / 4

    Initial and boundary data are the exact solution itself.
    """

    def exact_u(x, y, t):
        return 0.25 * (3.0 - _wave_term(R, x, y, t))

    def exact_v(x, y, t):
        return 0.25 * (3.0 + _wave_term(R, x, y, t))

    return ProblemSpec(
        R=R,
        T=T,
        ic_u=lambda x, y: exact_u(x, y, 0.0),
        ic_v=lambda x, y: exact_v(x, y, 0.0),
        bc_u=exact_u,
        bc_v=exact_v,
        exact=(exact_u, exact_v),
        name="traveling-wave",
    )


def constant_problem(R: float, value: float = 0.625, T: float = 1.0) -> ProblemSpec:
    """Both components equal to `value` everywhere and for all time."""

    def initial(x, y):
        return value

    def boundary(x, y, t):
        return value

    return ProblemSpec(
        R=R,
        T=T,
        ic_u=initial,
        ic_v=initial,
        bc_u=boundary,
        bc_v=boundary,
        exact=(boundary, boundary),
        name="constant",
    )


PROBLEMS: Dict[str, Callable[..., ProblemSpec]] = {
    "traveling-wave": lambda R, T=1.0, **_: traveling_wave(R, T),
    "constant": lambda R, T=1.0, value=0.625, **_: constant_problem(R, value, T),
}


def build_problem(name: str, **params) -> ProblemSpec:
    """
    Look up a built-in problem by name.

    Raises:
        ValidationError: For an unknown name.
    """
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise ValidationError(
            "problem", f"unknown problem {name!r}, known: {', '.join(sorted(PROBLEMS))}"
        ) from None
    return factory(**params)


def _sample_state(g: GridSpec, fu: InitialSampler, fv: InitialSampler, what: str) -> State:
    s = State(sample_field(g, fu), sample_field(g, fv))
    s.u.require_finite(f"{what} u")
    s.v.require_finite(f"{what} v")
    return s


def sample_initial(p: ProblemSpec, g: GridSpec) -> State:
    """
    Sample the initial data on g.

    Raises:
        NonFiniteFieldError: If a sample is NaN/Inf.
        ValidationError: If the initial and boundary data disagree at t=0 on g.
    """
    p.check_compatibility(g)
    return _sample_state(g, p.ic_u, p.ic_v, "initial")


def exact_state(p: ProblemSpec, g: GridSpec, t: float) -> State:
    """
    Sample the exact solution at time t.

    Raises:
        UnsupportedOperationError: If the problem has no exact solution.
        ValidationError: If t lies outside [0, T].
    """
    if p.exact is None:
        raise UnsupportedOperationError(f"problem '{p.name}' has no exact solution")
    # N*k may exceed T by rounding
    if not 0.0 <= t <= p.T * (1.0 + 1e-12):
        raise ValidationError("t", f"{t!r} is outside [0, {p.T!r}]")
    eu, ev = p.exact
    return _sample_state(g, lambda x, y: eu(x, y, t), lambda x, y: ev(x, y, t), "exact")


def pde_residual(
    p: ProblemSpec,
    M: int,
    t: float,
    form: Literal["indexed", "printed"] = "indexed",
) -> Tuple[float, float]:
    """
    Plug the exact solution into the differential operator.

    Derivatives are second-order central differences with spacing 1/M in
    space and in time. `indexed` is the form the split scheme discretizes,
    v-equation convection u*v_x + v*v_y. `printed` swaps that to
    v*v_x + u*v_y.

    Returns:
        Max absolute residual over interior nodes for the u- and v-equation.
    """
    if p.exact is None:
        raise UnsupportedOperationError(f"problem '{p.name}' has no exact solution")
    if form not in ("indexed", "printed"):
        raise ValidationError("form", f"expected 'indexed' or 'printed', got {form!r}")

    eu, ev = p.exact
    h = 1.0 / M
    X, Y = make_grid(M, 1, 1.0).mesh
    X, Y = X[1:-1, 1:-1], Y[1:-1, 1:-1]

    def parts(f):
        c = f(X, Y, t)
        dt = (f(X, Y, t + h) - f(X, Y, t - h)) / (2.0 * h)
        dx = (f(X + h, Y, t) - f(X - h, Y, t)) / (2.0 * h)
        dy = (f(X, Y + h, t) - f(X, Y - h, t)) / (2.0 * h)
        lap = (
            f(X + h, Y, t) + f(X - h, Y, t) + f(X, Y + h, t) + f(X, Y - h, t) - 4.0 * c
        ) / (h * h)
        return c, dt, dx, dy, lap

    u, ut, ux, uy, ulap = parts(eu)
    v, vt, vx, vy, vlap = parts(ev)

    res_u = ut + u * ux + v * uy - ulap / p.R
    if form == "indexed":
        res_v = vt + u * vx + v * vy - vlap / p.R
    else:
        res_v = vt + v * vx + u * vy - vlap / p.R

    return float(np.max(np.abs(res_u))), float(np.max(np.abs(res_v)))
