import math
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from jinja2 import Environment, FileSystemLoader

from harness.convergence import Coupling, LadderSpec, halving_ladder
from log.logger import get_logger as _logger
from numerics.errors import ValidationError
from numerics.grid import GridSpec, make_grid
from numerics.problems import PROBLEMS, ProblemSpec, build_problem
from numerics.split_stepper import min_substeps

COMMANDS = ("solve", "converge", "check-stability")
FORMATS = ("csv", "json")
KEYS = (
    "command",
    "problem",
    "R",
    "T",
    "value",
    "M",
    "N",
    "h",
    "h_min",
    "coupling",
    "substeps",
    "include_initial",
    "workers",
    "format",
    "out",
    "snapshot_t",
)
GRID_KEYS_MN = ("M", "N")
GRID_KEYS_H = ("h", "h_min", "coupling")
# `#` opens a comment only at the start of a line or after whitespace
COMMENT = re.compile(r"(?:^|\s)#.*$")


class ConfigError(ValueError):
    """
    A run configuration could not be parsed or validated.

    `line` is the 1-based line number of the offending entry (None when the
    problem concerns the whole document); `origin` says where it came from.
    """

    def __init__(self, message: str, line: Optional[int] = None, origin: str = ""):
        where = f"line {line}" if line is not None else "config"
        if origin:
            where = f"{where} ({origin})"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.origin = origin


@dataclass(frozen=True)
class RunConfig:
    """A validated run configuration. Exactly one of (M, N) or (h, coupling) is set."""

    R: float
    problem: str = "traveling-wave"
    T: float = 1.0
    value: Optional[float] = None
    M: Optional[int] = None
    N: Optional[int] = None
    h: Optional[float] = None
    h_min: Optional[float] = None
    coupling: Optional[Coupling] = None
    command: str = "solve"
    out: Optional[str] = None
    format: str = "csv"
    snapshot_t: Tuple[float, ...] = ()
    substeps: Union[int, str] = 1
    include_initial: bool = True
    workers: int = 1

    def grid(self) -> GridSpec:
        """The GridSpec of this run; for a ladder, its coarsest row."""
        if self.M is not None:
            return make_grid(self.M, self.N, self.T)
        return self.ladder().grids()[0]

    def ladder(self) -> LadderSpec:
        """
        The halving ladder h, h/2, ..., h_min.

        Raises:
            ValidationError: Without (h, coupling), or when the ladder is empty.
        """
        if self.h is None or self.coupling is None:
            raise ValidationError("h", "a ladder needs h and coupling")
        h_min = self.h if self.h_min is None else self.h_min
        return LadderSpec(
            coupling=self.coupling,
            h_list=halving_ladder(self.h, h_min),
            R=self.R,
            T=self.T,
            substeps=self.substeps,
            include_initial=self.include_initial,
        )

    def problem_spec(self) -> ProblemSpec:
        return self.problem_factory(self.R, self.T)

    def problem_factory(self, R: float, T: float) -> ProblemSpec:
        params = {"R": R, "T": T}
        if self.value is not None:
            params["value"] = self.value
        return build_problem(self.problem, **params)

    def resolved_substeps(self, g: GridSpec) -> int:
        if self.substeps == "auto":
            return min_substeps(self.R, g)
        return self.substeps


def _parse_number(raw: str) -> float:
    """Accept decimals, fractions `1/8` and powers of two `2^-3`."""
    text = raw.replace(" ", "")
    if "^" in text:
        base, exponent = text.split("^", 1)
        return float(base) ** int(exponent)
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _parse_bool(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true/false, got {raw!r}")


def _parse_int(raw: str) -> int:
    return int(raw)


def _parse_positive(raw: str) -> float:
    val = _parse_number(raw)
    if not math.isfinite(val) or val <= 0:
        raise ValueError(f"expected a positive number, got {raw!r}")
    return val


def _parse_choice(choices):
    def parse(raw: str) -> str:
        if raw not in choices:
            raise ValueError(f"expected one of {', '.join(choices)}, got {raw!r}")
        return raw

    return parse


def _parse_times(raw: str) -> Tuple[float, ...]:
    return tuple(_parse_number(part) for part in raw.split(",") if part.strip())


def _parse_substeps(raw: str) -> Union[int, str]:
    if raw == "auto":
        return raw
    m = int(raw)
    if m < 1:
        raise ValueError(f"expected a positive integer or 'auto', got {raw!r}")
    return m


PARSERS = {
    "command": _parse_choice(COMMANDS),
    "problem": _parse_choice(tuple(sorted(PROBLEMS))),
    "R": _parse_positive,
    "T": _parse_positive,
    "value": _parse_number,
    "M": _parse_int,
    "N": _parse_int,
    "h": _parse_positive,
    "h_min": _parse_positive,
    "coupling": Coupling,
    "substeps": _parse_substeps,
    "include_initial": _parse_bool,
    "workers": _parse_int,
    "format": _parse_choice(FORMATS),
    "out": str,
    "snapshot_t": _parse_times,
}


class RunConfigParser:
    LOGGER = _logger("run_config")

    def __init__(self):
        self._values: Dict[str, object] = {}
        self._lines: Dict[str, Tuple[Optional[int], str]] = {}

    def _fail(self, key: str, message: str):
        line, origin = self._lines.get(key, (None, ""))
        raise ConfigError(message, line, origin)

    def feed(self, lines: List[Tuple[int, str, str]]) -> None:
        for lineno, origin, raw in lines:
            text = COMMENT.sub("", raw).strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, origin)
            key, value = (part.strip() for part in text.split("=", 1))
            if key not in PARSERS:
                raise ConfigError(f"unknown key {key!r}", lineno, origin)
            try:
                self._values[key] = PARSERS[key](value)
            except ValueError as e:
                raise ConfigError(f"bad value for {key}: {e}", lineno, origin) from e
            self._lines[key] = (lineno, origin)

    def build(self) -> RunConfig:
        values = self._values
        if "R" not in values:
            raise ConfigError("missing required key 'R'")

        has_mn = [k for k in GRID_KEYS_MN if k in values]
        has_h = [k for k in GRID_KEYS_H if k in values]
        if has_mn and has_h:
            # blame whichever grid key came last
            last = max(has_mn + has_h, key=lambda k: self._lines[k][0])
            self._fail(
                last,
                f"conflicting grid settings {', '.join(has_mn)} and {', '.join(has_h)}; "
                "give either M and N or h and coupling",
            )
        if has_mn and len(has_mn) != 2:
            raise ConfigError("M and N must be given together")
        if has_h and not {"h", "coupling"} <= set(has_h):
            raise ConfigError("h and coupling must be given together")
        if not has_mn and not has_h:
            raise ConfigError("no grid given; set M and N, or h and coupling")

        cfg = RunConfig(**values)
        self._check(cfg)
        self.LOGGER.debug(f"Parsed config {cfg}")
        return cfg

    def _check(self, cfg: RunConfig) -> None:
        if cfg.workers < 1:
            self._fail("workers", f"workers must be >= 1, got {cfg.workers}")
        if cfg.h_min is not None and cfg.h_min > cfg.h:
            self._fail("h_min", f"h_min={cfg.h_min!r} above h={cfg.h!r} leaves an empty ladder")
        for t in cfg.snapshot_t:
            if not 0.0 <= t <= cfg.T:
                self._fail("snapshot_t", f"snapshot time {t!r} outside [0, {cfg.T!r}]")
        try:
            cfg.grid()
            if cfg.command == "converge" and cfg.M is None:
                cfg.ladder().grids()
        except ValidationError as e:
            key = e.field if e.field in self._lines else ("M" if cfg.M is not None else "h")
            self._fail(key, str(e))


def parse_config(
    text: str, overrides: Optional[Dict[str, str]] = None
) -> RunConfig:
    """
    Parse a `key = value` document into a RunConfig.

    Args:
        text: The document; `#` at the start of a line or after whitespace
            starts a comment.
        overrides: Extra entries applied after the document, as if appended.

    Raises:
        ConfigError: Naming the line of an unknown key, bad value or
            conflicting grid setting, or a missing required key.
    """
    lines = [(n, "", raw) for n, raw in enumerate(text.splitlines(), start=1)]
    next_line = len(lines) + 1
    for offset, (key, value) in enumerate((overrides or {}).items()):
        lines.append((next_line + offset, f"--{key} override", f"{key} = {value}"))
    parser = RunConfigParser()
    parser.feed(lines)
    return parser.build()


def _render(value) -> Optional[str]:
    if value is None:
        return None
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Coupling):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg: RunConfig) -> str:
    """Render cfg as a document that parse_config reads back to an equal RunConfig."""
    template_dir = Path(os.path.dirname(__file__)).joinpath("..", "templates").resolve()
    env = Environment(
        loader=FileSystemLoader(template_dir),
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    template = env.get_template("run_config.j2")
    context = {key: _render(getattr(cfg, key)) for key in KEYS if key != "snapshot_t"}
    context["snapshot_t"] = [repr(t) for t in cfg.snapshot_t]
    return template.render(context)
