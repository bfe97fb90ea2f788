"""Command line front end: ``fynet <subcommand> [options]``.

Exit status is 0 on success, 1 on domain errors (reported as JSON on stderr)
and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import pathlib
import sys
import typing
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .modules import FidelityBounds, Nonlocality, StandardForm, Uncertainty
from .modules.Multigraph import Multigraph, fixture, load_graph
from .modules.QuditAlgebra import load_state
from .modules.TriangleNetwork import TriangleProtocol
from .modules.Utilities import DomainError, PreconditionError
from .utils.envs import FY_RESTARTS, FY_SEED, FY_VERSION
from .utils.logger import logger

DEFAULT_PRECISION = 6


@dataclass
class RunConfig:
    subcommand: str
    seed: int = FY_SEED
    restarts: int = FY_RESTARTS
    tolerance: typing.Optional[float] = None
    input: typing.Optional[pathlib.Path] = None
    output: typing.Optional[pathlib.Path] = None
    format: str = "json"
    precision: int = DEFAULT_PRECISION
    options: dict = field(default_factory=dict)
    """subcommand specific arguments"""

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        common = {"subcommand", "seed", "restarts", "tolerance", "input", "output", "format", "precision", "handler"}
        return cls(
            subcommand=args.subcommand,
            seed=args.seed,
            restarts=args.restarts,
            tolerance=args.tolerance,
            input=getattr(args, "input", None),
            output=args.output,
            format=args.format,
            precision=args.precision,
            options={k: v for k, v in vars(args).items() if k not in common},
        )


def _int_list(text: str) -> typing.List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got '{text}'") from error


def _float_list(text: str) -> typing.List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got '{text}'") from error


def _graph(config: RunConfig) -> Multigraph:
    if config.input is not None:
        return load_graph(config.input)
    name = config.options.get("fixture")
    if name is None:
        raise PreconditionError("Give a graph with --graph FILE or --fixture NAME")
    return fixture(name)


def cmd_standardize(config: RunConfig):
    graph = _graph(config)
    result = StandardForm.standardize(graph, exhaustive=config.options.get("exhaustive", False))
    desc = result.to_dict()
    desc["n2_trace"] = list(result.n2_trace)
    try:
        desc["class"] = StandardForm.classify(result.graph, *result.pair).tag
    except DomainError:
        desc["class"] = None
    return desc


def cmd_classify(config: RunConfig):
    graph = _graph(config)
    v1, v2 = config.options["pair"]
    return StandardForm.classify(graph, graph.check_vertex(v1 - 1), graph.check_vertex(v2 - 1)).to_dict()


def cmd_bounds(config: RunConfig):
    opts = config.options
    if opts.get("sweep"):
        return FidelityBounds.sweep(opts.get("primes"), opts.get("betas") or (1, 5))
    if config.input is not None or opts.get("fixture"):
        return FidelityBounds.bound_for_graph(_graph(config), exhaustive=opts.get("exhaustive", False)).to_dict()
    if opts.get("d") is None or opts.get("beta") is None:
        raise PreconditionError("bounds needs --d and --beta, a graph, or --sweep")
    return FidelityBounds.compare(opts["d"], opts["beta"]).to_dict()


def cmd_protocol(config: RunConfig):
    opts = config.options
    which = opts["which"]
    protocol = TriangleProtocol.create(which, restarts=config.restarts, seed=config.seed)

    if opts.get("sweep"):
        if which != "p1":
            raise PreconditionError("--sweep is available for p1 only")
        frame = protocol.sweep(opts.get("t_values") or range(2, 13))
        frame.insert(0, "seed", config.seed)
        return frame

    if which == "p1":
        result = protocol.run(t=opts.get("t") or 2, with_state=False)
    elif which == "p2":
        result = protocol.run(
            k=opts.get("k") or 1,
            free_pairs=opts.get("free_pairs", False),
            pinned=opts.get("pin") or (),
            shifts=opts.get("shifts") or (0, 1, 2),
            with_state=False,
        )
    elif which == "p3":
        result = protocol.run(k=opts.get("k") or 2, with_state=False)
    else:
        result = protocol.run(d=opts.get("d") or 3)

    desc = result.to_dict()
    desc.setdefault("seed", config.seed)
    return desc


def cmd_bell(config: RunConfig):
    opts = config.options
    inequalities = Nonlocality.builtin_inequalities(opts.get("inequalities"))

    if opts.get("table"):
        frame = Nonlocality.table1_report(
            opts.get("source_dims") or (2, 3, 4),
            restarts=config.restarts,
            seed=config.seed,
            inequalities=inequalities,
        )
        frame.insert(0, "seed", config.seed)
        return frame

    by_name = {ineq.name: ineq for ineq in inequalities}
    name = opts.get("ineq")
    if name not in by_name:
        raise PreconditionError(f"Unknown inequality '{name}', expected one of {sorted(by_name)}")
    ineq = by_name[name]
    tolerance = config.tolerance or Nonlocality.SEESAW_TOLERANCE

    if opts.get("state") is None:
        value = Nonlocality.quantum_max(ineq, restarts=config.restarts, seed=config.seed, tolerance=tolerance)
        kind = "quantum_max"
    else:
        rho = load_state(pathlib.Path(opts["state"]).read_text())
        value, _ = Nonlocality.seesaw(ineq, rho, restarts=config.restarts, seed=config.seed, tolerance=tolerance)
        kind = "seesaw"

    return {
        "ineq": name,
        kind: value,
        "classical_bound": ineq.classical_bound,
        "violation": value > ineq.classical_bound + 1.0e-9,
        "seed": config.seed,
    }


def cmd_figur_test(config: RunConfig):
    opts = config.options
    return Uncertainty.figur_suite(opts.get("samples") or 1000, opts.get("lambda_grid"), seed=config.seed)


HANDLERS = {
    "standardize": cmd_standardize,
    "classify": cmd_classify,
    "bounds": cmd_bounds,
    "protocol": cmd_protocol,
    "bell": cmd_bell,
    "figur-test": cmd_figur_test,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=FY_SEED, help=f"random seed (default {FY_SEED})")
    common.add_argument("--restarts", type=int, default=FY_RESTARTS, help=f"optimizer restarts (default {FY_RESTARTS})")
    common.add_argument("--tolerance", type=float, default=None, help="convergence tolerance override")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="significant digits of floats")
    common.add_argument("--output", type=pathlib.Path, default=None, help="write the report here instead of stdout")

    graph = argparse.ArgumentParser(add_help=False)
    graph.add_argument("--graph", dest="input", type=pathlib.Path, default=None, help="graph JSON file")
    graph.add_argument("--fixture", default=None, help="named graph: k3, tree3, twin5, star, path")

    parser = argparse.ArgumentParser(prog="fynet", description="Graph-state fidelity bounds and triangle-network protocols")
    parser.add_argument("--version", action="version", version=FY_VERSION)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("standardize", parents=[common, graph], help="standard form under local complementation")
    p.add_argument("--exhaustive", action="store_true", help="minimum index over the LC orbit (n <= 6)")

    p = sub.add_parser("classify", parents=[common, graph], help="class G0-G3 of a graph for a connected pair")
    p.add_argument("--pair", type=int, nargs=2, default=(1, 2), metavar=("V1", "V2"), help="1-based vertices")

    p = sub.add_parser("bounds", parents=[common, graph], help="fidelity thresholds ub2 and ub1")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--beta", type=int, default=None)
    p.add_argument("--exhaustive", action="store_true")
    p.add_argument("--sweep", action="store_true", help="emit both bounds on a (d, beta) grid")
    p.add_argument("--primes", type=_int_list, default=None)
    p.add_argument("--betas", type=_int_list, default=None)

    p = sub.add_parser("protocol", parents=[common], help="triangle network preparation protocols")
    p.add_argument("--which", choices=["p1", "p2", "p3", "variants"], required=True)
    p.add_argument("--t", type=int, default=None, help="source dimension of p1")
    p.add_argument("--k", type=int, default=None, help="pairs per source of p2, or local root of p3")
    p.add_argument("--d", type=int, default=None, help="target dimension of variants")
    p.add_argument("--sweep", action="store_true", help="p1 fidelity for every t in --t-values")
    p.add_argument("--t-values", type=_int_list, default=None)
    p.add_argument("--free-pairs", action="store_true", help="p2: optimize every pair separately")
    p.add_argument("--pin", type=int, nargs="*", default=None, help="p2: sources fixed to maximal entanglement")
    p.add_argument("--shifts", type=int, nargs=3, default=None, help="p2: output shift of each node")

    p = sub.add_parser("bell", parents=[common], help="Bell values by see-saw")
    p.add_argument("--table", action="store_true", help="values on Protocol I outputs for every inequality")
    p.add_argument("--source-dims", type=_int_list, default=None)
    p.add_argument("--ineq", default="g1")
    p.add_argument("--state", default=None, help="state JSON; without it the quantum optimum is estimated")
    p.add_argument("--inequalities", default=None, help="JSON file with additional inequalities")

    p = sub.add_parser("figur-test", parents=[common], help="randomized check of the uncertainty relation")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--lambda-grid", type=_float_list, default=None)

    return parser


def _round(obj, precision: int):
    if isinstance(obj, (float, np.floating)):
        return float(f"{obj:.{precision}g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): _round(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v, precision) for v in obj]
    return obj


def render(payload, config: RunConfig) -> str:
    if isinstance(payload, pd.DataFrame):
        frame = payload
    else:
        frame = None

    if config.format == "csv":
        if frame is None:
            frame = pd.json_normalize(_round(payload, config.precision))
        return frame.to_csv(index=False, float_format=f"%.{config.precision}g", lineterminator="\n")

    if frame is not None:
        payload = frame.to_dict(orient="records")
    return json.dumps(_round(payload, config.precision), indent=2, ensure_ascii=False) + "\n"


def main(argv: typing.Sequence[str] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as error:
        return int(error.code or 0)

    config = RunConfig.from_args(args)

    try:
        payload = HANDLERS[config.subcommand](config)
    except DomainError as error:
        logger.debug(f"{config.subcommand} failed: {error!r}")
        sys.stderr.write(json.dumps({"error": type(error).__name__, "message": str(error)}) + "\n")
        return 1

    text = render(payload, config)

    if config.output is not None:
        config.output.write_text(text)
        logger.info(f"Write {config.subcommand} report to {config.output}")
    else:
        sys.stdout.write(text)

    return 0
