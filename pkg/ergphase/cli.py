"""
Command line interface.

Every subcommand writes CSV to standard output, or to ``--out``. The file
starts with ``#`` comment lines recording the version, the settings and the
numeric defaults, so that it documents how it was produced; identical
settings produce identical bytes.

Failures print a single line ``error: <code>: <message>`` on standard error
and exit with status 2 for invalid input, 3 otherwise.

"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import dataclasses
import io
import logging
import pathlib
import sys
from collections.abc import Callable, Iterable, Sequence
from typing import Any, NoReturn, Optional

import numpy as np

from .asymptotics import region, standard_tables
from .config import DEFAULT_TOLERANCES, RunConfig
from .distributions import EdgeWeightDistribution, parse_distribution
from .exceptions import (
    DomainError,
    ErgPhaseError,
    InvalidDistribution,
    InvalidSpec,
    UnsupportedSubgraph,
)
from .legendre import boundary_behavior, dual_of, rate, rate_derivatives
from .sampler import (
    SubgraphSpec,
    constant_graph_density,
    exact_small_model,
    parse_subgraph,
    run_chain,
)
from .variational import (
    ModelParams,
    critical_point,
    maximizers,
    phase_curve,
    score_at_theta,
    stationary_points,
)
from .version import version as ergphase_version


__all__ = ["main"]


logger = logging.getLogger(__name__)


EXIT_INVALID = 2
EXIT_FAILURE = 3


class ArgumentParser(argparse.ArgumentParser):
    """Parser that raises :exc:`InvalidSpec` instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise InvalidSpec(self.prog, message)


def _boolean(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{value!r} isn't a boolean")


@dataclasses.dataclass(frozen=True)
class Option:
    """Flag of a subcommand, also accepted as a configuration file key."""

    flag: str
    type: Callable[[str], Any]
    help: str
    many: bool = False

    @property
    def dest(self) -> str:
        return self.flag.lstrip("-").replace("-", "_")

    def add_to(self, parser: argparse.ArgumentParser) -> None:
        if self.type is _boolean:
            parser.add_argument(self.flag, action="store_true", default=None, help=self.help)
        else:
            parser.add_argument(
                self.flag,
                type=self.type,
                nargs="+" if self.many else None,
                default=None,
                help=self.help,
            )

    def convert(self, raw: str) -> Any:
        if self.many:
            return [self.type(item) for item in raw.replace(",", " ").split()]
        return self.type(raw)


COMMON_OPTIONS = (
    Option("--dist", str, "edge-weight distribution, e.g. beta:a=2,b=2"),
    Option("--p", int, "number of edges of the second subgraph"),
    Option("--out", str, "output file; standard output by default"),
)

BETA_OPTIONS = (
    Option("--beta1", float, "edge parameter"),
    Option("--beta2", float, "second subgraph parameter"),
)


class CsvOutput:
    """CSV document assembled in memory, comment lines first."""

    def __init__(self) -> None:
        self.buffer = io.StringIO()
        self.writer = csv.writer(self.buffer, lineterminator="\n")

    def comment(self, text: str) -> None:
        self.buffer.write(f"# {text}\n")

    def row(self, values: Iterable[Any]) -> None:
        self.writer.writerow([_format(value) for value in values])

    def getvalue(self) -> str:
        return self.buffer.getvalue()


def _format(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def _required(config: RunConfig, key: str) -> Any:
    value = config.get(key)
    if value is None:
        raise InvalidSpec(f"--{key.replace('_', '-')}", f"required by {config.command}")
    return value


def _distribution(config: RunConfig) -> EdgeWeightDistribution:
    return parse_distribution(config.dist_spec)


def _params(config: RunConfig) -> ModelParams:
    return ModelParams(float(_required(config, "beta1")), float(_required(config, "beta2")), config.p)


def _region_name(params: ModelParams) -> str:
    try:
        return region(params).value
    except DomainError:
        return "boundary"


def _warn_repulsive(params: ModelParams) -> None:
    if not params.attractive:
        logger.warning(
            "beta2 = %g < 0: the maximizer is a stationary point of a concave "
            "functional, outside the phase structure",
            params.beta2,
        )


# Subcommands


def cmd_psi(config: RunConfig, out: CsvOutput) -> None:
    dist, params = _distribution(config), _params(config)
    _warn_repulsive(params)
    found = maximizers(dist, params)
    first = found.points[0]
    second = found.points[1] if len(found.points) > 1 else None
    out.row(["beta1", "beta2", "psi", "u1", "theta1", "u2", "theta2", "on_transition", "region"])
    out.row(
        [
            params.beta1,
            params.beta2,
            found.psi,
            first.u,
            first.theta,
            None if second is None else second.u,
            None if second is None else second.theta,
            found.on_transition,
            _region_name(params),
        ]
    )


def cmd_maximizers(config: RunConfig, out: CsvOutput) -> None:
    dist, params = _distribution(config), _params(config)
    _warn_repulsive(params)
    found = maximizers(dist, params)
    best = {point.theta for point in found.points}
    out.comment(f"psi={found.psi:.12g}")
    out.row(["theta", "u", "score", "local_max", "global_max"])
    # Stationary points alternate between local maxima and minima.
    for index, pair in enumerate(stationary_points(dist, params)):
        out.row(
            [
                pair.theta,
                pair.u,
                score_at_theta(dist, params, pair.theta),
                index % 2 == 0,
                pair.theta in best,
            ]
        )


def cmd_critical_point(config: RunConfig, out: CsvOutput) -> None:
    dist = _distribution(config)
    critical = critical_point(dist, config.p)
    out.row(["beta1_c", "beta2_c", "u0", "theta0"])
    out.row([critical.beta1_c, critical.beta2_c, critical.u0, critical.theta0])


def _gnuplot_script(data: str) -> str:
    return "\n".join(
        [
            'set datafile separator ","',
            "set key autotitle columnhead",
            'set xlabel "beta1"',
            'set ylabel "beta2"',
            f'plot "{data}" using 1:2 with lines, '
            '"" using 1:3 with lines dashtype 2, '
            '"" using 1:4 with lines dashtype 2',
            "",
        ]
    )


def cmd_phase_curve(config: RunConfig, out: CsvOutput) -> None:
    dist = _distribution(config)
    gnuplot = config.get("gnuplot")
    if gnuplot is not None and config.output is None:
        raise InvalidSpec("--gnuplot", "the plot script needs --out")
    curve = phase_curve(
        dist,
        config.p,
        float(_required(config, "beta1_min")),
        float(config.get("step", 0.5)),
        workers=config.workers,
    )
    critical = curve.critical
    out.comment(f"critical beta1_c={critical.beta1_c:.12g} beta2_c={critical.beta2_c:.12g}")
    out.row(["beta1", "beta2_transition", "beta2_upper", "beta2_lower"])
    for sample in curve:
        out.row([sample.beta1, sample.beta2, sample.upper, sample.lower])
    if gnuplot is not None:
        pathlib.Path(gnuplot).write_text(_gnuplot_script(config.output), encoding="utf-8")


def cmd_tables(config: RunConfig, out: CsvOutput) -> None:
    reports = standard_tables()
    for number, report in enumerate(reports, start=1):
        out.comment(f"row {number}: {report.dist} p={report.params.p}")
    out.row(
        [
            "beta1",
            "beta2",
            "theta_opt",
            "u_opt",
            "theta_approx",
            "u_approx",
            "psi_exact",
            "psi_approx",
            "region",
        ]
    )
    for report in reports:
        out.writer.writerow(report.as_row())


RATE_GRID = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


def cmd_rate(config: RunConfig, out: CsvOutput) -> None:
    dist = _distribution(config)
    boundary = boundary_behavior(dist)
    out.comment(f"rate_at_0={boundary.at_zero:.12g} rate_at_1={boundary.at_one:.12g}")
    out.row(["u", "theta", "rate", "rate_prime", "rate_second"])
    for u in config.get("u", RATE_GRID):
        pair = dual_of(dist, u)
        derivatives = rate_derivatives(dist, u)
        out.row([u, pair.theta, rate(dist, u), derivatives.i1, derivatives.i2])


DEFAULT_SUBGRAPHS = {2: "two_star", 3: "triangle"}


def _subgraph(config: RunConfig) -> SubgraphSpec:
    spec = config.get("h2", DEFAULT_SUBGRAPHS.get(config.p))
    if spec is None:
        raise UnsupportedSubgraph(f"no default subgraph with p={config.p}; pass --h2")
    return parse_subgraph(spec)


def cmd_sample(config: RunConfig, out: CsvOutput) -> None:
    dist, params = _distribution(config), _params(config)
    h2 = _subgraph(config)
    n = int(config.get("n", 40))
    if config.get("exact", False):
        model = exact_small_model(dist, params, h2, n)
        out.comment(f"psi_n={model.psi_n:.12g}")
        out.row(["state", "probability"])
        for state, probability in zip(model.states, model.pmf):
            out.row([";".join(f"{x:g}" for x in state), probability])
        return

    trace = run_chain(
        dist,
        params,
        h2,
        n,
        steps=int(config.get("steps", 100_000)),
        burn_in=config.get("burn_in"),
        thin=config.get("thin"),
        seed=int(config.get("seed", 0)),
    )
    out.row(["step", "t_edge", "t_h2"])
    for step, t_edge, t_h2 in trace:
        out.row([step, t_edge, t_h2])
    out.comment(
        f"mean_t1={trace.mean_t1:.12g} mean_edge_weight={trace.mean_edge_weight:.12g} "
        f"mean_t2={trace.mean_t2:.12g} acceptance_rate={trace.acceptance_rate:.12g}"
    )
    if not params.attractive:
        return
    found = maximizers(dist, params)
    # On the transition curve the chain settles near one of the maximizers.
    u_star = min(found.u_values, key=lambda u: abs(u - trace.mean_edge_weight))
    out.comment(
        f"u_star={u_star:.12g} abs_error={abs(trace.mean_edge_weight - u_star):.12g} "
        f"t2_reference={constant_graph_density(u_star, n, h2):.12g}"
    )


def _sweep_row(dist: EdgeWeightDistribution, params: ModelParams) -> list[Any]:
    found = maximizers(dist, params)
    best = max(found.points, key=lambda point: point.score)
    return [params.beta1, params.beta2, found.psi, best.u, len(found.points), found.on_transition]


def cmd_sweep(config: RunConfig, out: CsvOutput) -> None:
    dist = _distribution(config)
    points = int(config.get("points", 11))
    if points < 1:
        raise InvalidSpec(f"--points={points}", "needs at least one point")
    beta1s = np.linspace(float(_required(config, "beta1_min")), float(_required(config, "beta1_max")), points)
    beta2s = np.linspace(float(_required(config, "beta2_min")), float(_required(config, "beta2_max")), points)
    grid = [ModelParams(float(b1), float(b2), config.p) for b1 in beta1s for b2 in beta2s]
    if any(not params.attractive for params in grid):
        logger.warning("the sweep includes beta2 < 0")

    def evaluate(params: ModelParams) -> list[Any]:
        return _sweep_row(dist, params)

    if config.workers > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.workers) as executor:
            rows = list(executor.map(evaluate, grid))
    else:
        rows = [evaluate(params) for params in grid]
    out.row(["beta1", "beta2", "psi", "u", "maximizers", "on_transition"])
    for row in rows:
        out.row(row)


@dataclasses.dataclass(frozen=True)
class Command:
    run: Callable[[RunConfig, CsvOutput], None]
    help: str
    options: tuple[Option, ...] = ()


COMMANDS: dict[str, Command] = {
    "psi": Command(cmd_psi, "limiting free energy and its maximizers", BETA_OPTIONS),
    "maximizers": Command(
        cmd_maximizers, "stationary points of the variational problem", BETA_OPTIONS
    ),
    "critical-point": Command(cmd_critical_point, "end point of the transition curve"),
    "phase-curve": Command(
        cmd_phase_curve,
        "transition curve and the bounding curves",
        (
            Option("--beta1-min", float, "smallest beta1 sampled"),
            Option("--step", float, "spacing of beta1 samples (default 0.5)"),
            Option("--gnuplot", str, "also write a gnuplot script plotting --out"),
        ),
    ),
    "tables": Command(cmd_tables, "exact and approximate values near degeneracy"),
    "rate": Command(
        cmd_rate,
        "rate function and its derivatives",
        (Option("--u", float, "mean weights (default 0.1 ... 0.9)", many=True),),
    ),
    "sample": Command(
        cmd_sample,
        "Metropolis-Hastings samples of a finite graph",
        (
            *BETA_OPTIONS,
            Option("--h2", str, "two_star or triangle (default from --p)"),
            Option("--n", int, "number of vertices (default 40)"),
            Option("--steps", int, "steps recorded after burn-in (default 100000)"),
            Option("--burn-in", int, "steps discarded first (default 200 sweeps)"),
            Option("--thin", int, "steps between records (default one sweep)"),
            Option("--seed", int, "random seed (default 0)"),
            Option("--exact", _boolean, "enumerate a model with at most 3 vertices"),
        ),
    ),
    "sweep": Command(
        cmd_sweep,
        "free energy over a grid of parameters",
        (
            Option("--beta1-min", float, "smallest beta1"),
            Option("--beta1-max", float, "largest beta1"),
            Option("--beta2-min", float, "smallest beta2"),
            Option("--beta2-max", float, "largest beta2"),
            Option("--points", int, "grid points per axis (default 11)"),
        ),
    ),
}


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="ergphase",
        description="Phase structure of edge-weighted exponential random graphs.",
    )
    parser.add_argument("--version", action="version", version=f"ergphase {ergphase_version}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="file of key=value settings")
    common.add_argument("-v", "--verbose", action="count", default=0, help="log more")
    common.add_argument("--quiet", action="store_true", help="log errors only")
    for option in COMMON_OPTIONS:
        option.add_to(common)
    subparsers = parser.add_subparsers(dest="command", metavar="<command>")
    for name, command in COMMANDS.items():
        subparser = subparsers.add_parser(name, parents=[common], help=command.help)
        for option in command.options:
            option.add_to(subparser)
    return parser


def configure_logging(verbose: int, quiet: bool) -> None:
    if quiet:
        level = logging.ERROR
    elif verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = logging.WARNING
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger("ergphase").setLevel(level)


def _header(config: RunConfig, out: CsvOutput) -> None:
    out.comment(f"ergphase {ergphase_version}")
    out.comment(f"command={config.command}")
    out.comment(f"dist={config.dist_spec}")
    out.comment(f"p={config.p}")
    for key in sorted(config.options):
        value = config.options[key]
        if isinstance(value, list):
            value = ",".join(_format(item) for item in value)
        out.comment(f"{key}={_format(value)}")
    for line in DEFAULT_TOLERANCES.as_header():
        out.buffer.write(line + "\n")


def run(argv: Optional[Sequence[str]] = None) -> str:
    """
    Execute a command line and return the CSV document it produces.

    Raises:
        ErgPhaseError: On any failure.

    """
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise InvalidSpec("ergphase", "a command is required")
    configure_logging(args.verbose, args.quiet)
    command = COMMANDS[args.command]
    options = (*COMMON_OPTIONS, *command.options)
    flags = {option.dest: getattr(args, option.dest) for option in options}
    converters = {option.dest: option.convert for option in options}
    config = RunConfig.from_sources(args.command, flags, converters, args.config)
    logger.debug("running %s with %s", config.command, config)

    out = CsvOutput()
    _header(config, out)
    command.run(config, out)
    document = out.getvalue()
    if config.output is None:
        sys.stdout.write(document)
    else:
        pathlib.Path(config.output).write_text(document, encoding="utf-8")
    return document


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        run(argv)
    except InvalidDistribution as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ErgPhaseError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return 0
