"""
The solve, converge and check-stability commands. Each returns a process exit code.
"""

import dataclasses
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, TextIO, Union

import numpy as np

from harness.convergence import emit_table, fitted_order, run_ladder
from harness.run_config import RunConfig
from log.logger import get_logger as _logger
from numerics.grid import GridSpec, format_snapshot
from numerics.problems import exact_state, sample_initial
from numerics.split_stepper import (
    StageBuffers,
    check_stability,
    composite_step,
    min_substeps,
)

logger = _logger("commands")

EXIT_OK = 0
EXIT_DIVERGED = 1
EXIT_UNSTABLE = 1
EXIT_USAGE = 2

DEFAULT_SNAPSHOT_DIR = "snapshots"


def write_atomic(path: Union[str, Path], text: str) -> Path:
    """Write text to a sibling temp file, then rename it over path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f".{path.name}.tmp")
    with tmp.open(mode="w") as file:
        file.write(text)
    os.replace(tmp, path)
    logger.info(f"Wrote {path}")
    return path


def snapshot_steps(cfg: RunConfig, g: GridSpec) -> List[int]:
    """Step indices for the requested snapshot times, each snapped to the nearest t^n."""
    times = cfg.snapshot_t or (g.T,)
    steps = []
    for t in times:
        n = min(max(int(round(t / g.k)), 0), g.N)
        if not np.isclose(g.time(n), t, rtol=0.0, atol=1e-12):
            logger.warning(f"Snapshot time {t!r} is not a grid time, using t={g.time(n)!r}")
        if n not in steps:
            steps.append(n)
    return sorted(steps)


def snapshot_name(n: int) -> str:
    return f"snapshot_n{n:06d}.txt"


def cmd_solve(cfg: RunConfig, stderr: Optional[TextIO] = None) -> int:
    """
    Integrate the configured problem to T and write snapshots.

    Snapshots already taken are written even when the run blows up.

    Returns:
        0 on success, 1 when a stage output turned non-finite.
    """
    g = cfg.grid()
    p = cfg.problem_spec()
    m = cfg.resolved_substeps(g)
    verdict = check_stability(p.R, dataclasses.replace(g, N=g.N * m, k=g.k / m))
    if not verdict.satisfied:
        logger.warning(
            f"Stability restriction violated for R={p.R} h={g.h} k/m={g.k / m} "
            f"({verdict.binding_term} term); running anyway"
        )
    logger.info(f"Solving '{p.name}' R={p.R} M={g.M} N={g.N} m={m}")

    wanted = snapshot_steps(cfg, g)
    out_dir = Path(cfg.out or DEFAULT_SNAPSHOT_DIR)
    snapshots: Dict[int, str] = {}

    bufs = StageBuffers(sample_initial(p, g))
    if 0 in wanted:
        snapshots[0] = format_snapshot(bufs.state_n)

    status = EXIT_OK
    for n in range(g.N):
        outcome = composite_step(bufs, m, n, p)
        if not outcome.ok:
            logger.error(f"R={p.R} M={g.M} N={g.N}: {outcome.describe()}")
            print(outcome.describe(), file=stderr or sys.stderr)
            status = EXIT_DIVERGED
            break
        bufs.advance()
        if n + 1 in wanted:
            snapshots[n + 1] = format_snapshot(bufs.state_n)

    for n, text in snapshots.items():
        write_atomic(out_dir.joinpath(snapshot_name(n)), text)

    if status == EXIT_OK and p.exact is not None:
        exact = exact_state(p, g, g.time(g.N))
        err = max(
            float(np.max(np.abs(bufs.state_n.u.values - exact.u.values))),
            float(np.max(np.abs(bufs.state_n.v.values - exact.v.values))),
        )
        logger.info(f"Max nodal error at t={g.time(g.N)!r}: {err:.6e}")
    return status


def cmd_converge(cfg: RunConfig) -> int:
    """
    Run the configured ladder and write its table.

    Diverged rows are data, so this returns 0 whenever the table is written.
    """
    ladder = cfg.ladder()
    rows = run_ladder(ladder, problem_factory=cfg.problem_factory, workers=cfg.workers)
    table = emit_table(rows, cfg.format)
    if cfg.out:
        write_atomic(cfg.out, table)
    else:
        sys.stdout.write(table)

    slope = fitted_order(rows)
    if slope is not None:
        logger.info(f"Fitted L2_u order over {len(rows)} rows: {slope:.3f}")
    return EXIT_OK


def cmd_check_stability(cfg: RunConfig, stdout: Optional[TextIO] = None) -> int:
    """
    Print both ratios of the time-step restriction and the verdict.

    Returns:
        0 when the restriction holds for the plain step, 1 otherwise.
    """
    stdout = stdout or sys.stdout
    g = cfg.grid()
    verdict = check_stability(cfg.R, g)
    m = min_substeps(cfg.R, g)
    print(
        f"diffusive={verdict.diffusive_ratio:.6f} "
        f"convective={verdict.convective_ratio:.6f} "
        f"{'satisfied' if verdict.satisfied else 'not satisfied'} m={m}",
        file=stdout,
    )
    print(f"binding={verdict.binding_term}", file=stdout)
    return EXIT_OK if verdict.satisfied else EXIT_UNSTABLE
