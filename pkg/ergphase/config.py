"""
Numeric defaults and run configuration.

Every tolerance the library uses lives in :class:`Tolerances`; modules read
them from :data:`DEFAULT_TOLERANCES` so there's a single place to look them
up, and the command line interface prints them in the header of every CSV
file it writes.

"""

from __future__ import annotations

import dataclasses
import logging
import os
import pathlib
from collections.abc import Callable, Mapping
from typing import Any

from .exceptions import InvalidSpec


__all__ = [
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "RunConfig",
    "THREADS_ENV",
    "read_config_file",
    "thread_count",
]


logger = logging.getLogger(__name__)


THREADS_ENV = "ERG_PHASE_THREADS"


@dataclasses.dataclass(frozen=True)
class Tolerances:
    """
    Numeric defaults.

    Attributes:
        overflow_guard: Largest ``|theta|`` at which cumulants are evaluated.
        quad_tol: Convergence threshold between successive quadrature passes.
        quad_nodes: Initial number of Gauss-Legendre nodes.
        quad_max_nodes: Node count at which doubling stops.
        dual_tol: Bound on ``|K'(theta) - u|`` for a dual pair.
        bracket_limit: Largest ``|theta|`` explored when bracketing a dual.
        boundary_steps: Tilts at which ``I(0)`` and ``I(1)`` are probed.
        boundary_cauchy: Increment below which a boundary value is finite.
        divergence_ceiling: Value above which a boundary value is infinite.
        scan_grid: Points in the stationary-point sign scan.
        scan_margin: Constant added to the adaptive scan half-width.
        assumption_range: Half-width of the theta range certifying the
            single-zero assumption.
        assumption_grid: Points in the assumption sign scan.
        stationarity_tol: Bound on the stationarity residual of a maximizer.
        tie_tol: Score difference below which two maximizers tie.
        psi_check_tol: Bound on the primal/dual free energy discrepancy.
        transition_margin: Distance to the critical point below which the
            transition curve isn't computed.
        cache_refresh: Chain steps between full recomputations of densities.

    """

    overflow_guard: float = 700.0
    quad_tol: float = 1e-12
    quad_nodes: int = 64
    quad_max_nodes: int = 16384
    dual_tol: float = 1e-11
    bracket_limit: float = 1e4
    boundary_steps: tuple[float, ...] = (10.0, 20.0, 40.0, 80.0, 160.0)
    boundary_cauchy: float = 1e-8
    divergence_ceiling: float = 1e6
    scan_grid: int = 10_000
    scan_margin: float = 50.0
    assumption_range: float = 40.0
    assumption_grid: int = 10_000
    stationarity_tol: float = 1e-9
    tie_tol: float = 1e-10
    psi_check_tol: float = 1e-8
    transition_margin: float = 1e-6
    cache_refresh: int = 100_000

    def as_header(self) -> list[str]:
        """
        Render the defaults as ``# key=value`` comment lines.

        """
        lines = []
        for field in dataclasses.fields(self):
            value = getattr(self, field.name)
            if isinstance(value, tuple):
                value = ",".join(f"{v:g}" for v in value)
            lines.append(f"# {field.name}={value}")
        return lines


DEFAULT_TOLERANCES = Tolerances()


def read_config_file(path: str | os.PathLike[str]) -> dict[str, str]:
    """
    Read ``key=value`` lines from a configuration file.

    Blank lines and lines starting with ``#`` are ignored. Keys are the long
    names of command line flags, with or without the leading dashes.

    Raises:
        InvalidSpec: If a line has no ``=`` or a key is repeated.

    """
    values: dict[str, str] = {}
    text = pathlib.Path(path).read_text(encoding="utf-8")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidSpec(str(path), f"line {lineno}: expected key=value")
        key = key.strip().lstrip("-").replace("-", "_")
        if key in values:
            raise InvalidSpec(str(path), f"line {lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def thread_count(environ: Mapping[str, str] | None = None) -> int:
    """
    Read the parallelism cap from :data:`THREADS_ENV`.

    Raises:
        InvalidSpec: If the variable is set to anything but a positive integer.

    """
    if environ is None:
        environ = os.environ
    raw = environ.get(THREADS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    try:
        count = int(raw)
    except ValueError:
        raise InvalidSpec(raw, f"{THREADS_ENV} must be a positive integer") from None
    if count < 1:
        raise InvalidSpec(raw, f"{THREADS_ENV} must be a positive integer")
    return count


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """
    Settings of one command line invocation.

    Attributes:
        command: Subcommand name.
        dist_spec: Edge-weight distribution, e.g. ``beta:a=2,b=2``.
        p: Number of edges of the second subgraph.
        options: Remaining command specific settings, already converted.
        output: Output path, or :obj:`None` for standard output.
        workers: Parallelism cap.

    """

    command: str
    dist_spec: str = "bernoulli:q=0.5"
    p: int = 2
    options: Mapping[str, Any] = dataclasses.field(default_factory=dict)
    output: str | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.p < 2:
            raise InvalidSpec(str(self.p), "p must be an integer >= 2")
        if self.workers < 1:
            raise InvalidSpec(str(self.workers), "workers must be >= 1")
        for key, value in self.options.items():
            if key.endswith("tol") and value is not None and not value > 0:
                raise InvalidSpec(f"{key}={value}", "tolerances must be > 0")

    def get(self, key: str, default: Any = None) -> Any:
        value = self.options.get(key)
        return default if value is None else value

    @classmethod
    def from_sources(
        cls,
        command: str,
        flags: Mapping[str, Any],
        converters: Mapping[str, Callable[[str], Any]],
        config_file: str | os.PathLike[str] | None = None,
        environ: Mapping[str, str] | None = None,
    ) -> RunConfig:
        """
        Merge defaults, a configuration file and command line flags.

        Flags that weren't given on the command line must be :obj:`None` in
        ``flags``; configuration file values fill them in, converted with
        ``converters``. Keys the command doesn't know are rejected.

        Raises:
            InvalidSpec: On unknown keys or values that don't convert.

        """
        merged: dict[str, Any] = {}
        if config_file is not None:
            for key, raw in read_config_file(config_file).items():
                if key not in converters:
                    raise InvalidSpec(f"{key}={raw}", f"unknown key for {command}")
                try:
                    merged[key] = converters[key](raw)
                except (TypeError, ValueError) as exc:
                    raise InvalidSpec(f"{key}={raw}", str(exc)) from None
            logger.debug("loaded %d settings from %s", len(merged), config_file)
        for key, value in flags.items():
            if value is not None:
                merged[key] = value

        kwargs: dict[str, Any] = {"command": command}
        if "dist" in merged:
            kwargs["dist_spec"] = merged.pop("dist")
        if "p" in merged:
            kwargs["p"] = merged.pop("p")
        kwargs["output"] = merged.pop("out", None)
        kwargs["workers"] = thread_count(environ)
        kwargs["options"] = merged
        return cls(**kwargs)

