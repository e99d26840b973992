"""Command-line entry point."""

import argparse
import json
import logging
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from . import __version__
from .builtins import BUILTINS, DEFAULT_STARTS, load_builtin
from .certificates import check_discrete
from .defaults import DEFAULT_DT, get_log_level
from .dynamics_method import DynamicsConfig
from .equilibrium_method import UeParams
from .errors import (
    ContractViolationError,
    DivergenceError,
    InsufficientSamplesError,
    IqvipError,
)
from .problem import IqvipProblem
from .problem_base import ForwardMap
from .projections import (
    Ball,
    BoxSpec,
    ProjectorFamily,
    Singleton,
    constant_family,
    estimate_rho,
    spanned_box_family,
    whole_space_family,
)
from .rates import estimate_linear_rate, estimate_rate
from .solve_method import SolverConfig
from .tolling_method import TollTrace
from .trace_io import (
    write_iter_trace,
    write_summary,
    write_toll_trace,
    write_trajectory,
)
from .traffic_network import TrafficNetwork

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

COMMANDS = ("certify", "solve", "simulate", "traffic")

# Sample count for the empirical rho diagnostic printed by certify
RHO_SAMPLES = 1000

# Outer iterations of a toll run unless --max-iter is given
TRAFFIC_MAX_ITER = 150


def _vector(text: str) -> List[float]:
    return [float(part) for part in text.split(",") if part.strip()]


PARAM_TYPES: Dict[str, Callable[[str], Any]] = {
    "sigma": float,
    "tau": float,
    "mu": float,
    "h": float,
    "x0": _vector,
    "v0": _vector,
    "horizon": float,
    "dt": float,
    "stop_residual": float,
    "stop_error": float,
    "max_iter": int,
    "seed": int,
    "variant": str,
    "tail_fraction": float,
    "gap_tol": float,
    "ue_max_iter": int,
    "value_of_time": float,
}

REQUIRED_PARAMS: Dict[str, Sequence[str]] = {
    "certify": (),
    "solve": ("tau",),
    "simulate": ("sigma", "tau", "horizon"),
    "traffic": ("sigma", "tau", "mu"),
}


@dataclass(frozen=True)
class RunSpec:
    """
    One command-line invocation.

    Attributes:
        command: ``certify``, ``solve``, ``simulate`` or ``traffic``.
        problem_source: Built-in name, JSON file path or http(s) URL.
        params: Flat parameter map; keys listed in PARAM_TYPES.
        output_path: CSV trace (or JSON document for certify).
    """

    command: str
    problem_source: str
    params: Dict[str, Any] = field(default_factory=dict)
    output_path: Optional[str] = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ContractViolationError(
                f"command: must be one of {', '.join(COMMANDS)}, "
                f"got {self.command!r}"
            )
        unknown = sorted(set(self.params) - set(PARAM_TYPES))
        if unknown:
            raise ContractViolationError(
                f"params: unknown key(s) {', '.join(unknown)}"
            )
        missing = [
            key
            for key in REQUIRED_PARAMS[self.command]
            if self.params.get(key) is None
        ]
        if missing:
            raise ContractViolationError(
                f"{self.command}: missing required parameter(s) "
                f"{', '.join(missing)}"
            )
        if self.command != "certify" and self.output_path is None:
            raise ContractViolationError(
                f"{self.command}: --out is required"
            )
        if self.params.get("seed") is None:
            params = dict(self.params)
            params["seed"] = 0
            object.__setattr__(self, "params", params)

    def get(self, key: str, default: Any = None) -> Any:
        value = self.params.get(key)
        return default if value is None else value


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports errors instead of exiting."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ContractViolationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="iqvip",
        description=(
            "Solve inverse quasi-variational inequalities, simulate their "
            "second-order dynamics and optimize traffic tolls."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument(
        "--problem",
        required=True,
        help=(
            f"built-in ({', '.join(sorted(BUILTINS))}), JSON file or "
            "http(s) URL"
        ),
    )
    parser.add_argument("--sigma", type=float)
    parser.add_argument("--tau", type=float)
    parser.add_argument("--mu", type=float)
    parser.add_argument("--h", type=float)
    parser.add_argument(
        "--x0", type=_vector, help="comma-separated, e.g. --x0=-7,5"
    )
    parser.add_argument("--horizon", type=float)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--stop-residual", type=float)
    parser.add_argument("--stop-error", type=float)
    parser.add_argument("--max-iter", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument(
        "--variant", choices=("inertial", "first_order", "general")
    )
    parser.add_argument("--tail-fraction", type=float)
    parser.add_argument(
        "--params",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="extra parameter; may be repeated",
    )
    parser.add_argument("--out")
    return parser


def _parse_extra(items: Sequence[str]) -> Dict[str, Any]:
    extra: Dict[str, Any] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise ContractViolationError(
                f"--params {item!r}: expected KEY=VALUE"
            )
        if key not in PARAM_TYPES:
            raise ContractViolationError(f"--params: unknown key {key!r}")
        try:
            extra[key] = PARAM_TYPES[key](raw)
        except ValueError as e:
            raise ContractViolationError(
                f"--params {key}: invalid value {raw!r}"
            ) from e
    return extra


_VECTOR_FLAGS = ("--x0",)
_NEGATIVE_VALUE = re.compile(r"^-\.?\d")


def _attach_vector_values(argv: Sequence[str]) -> List[str]:
    """Rewrite ``--x0 -7,5`` as ``--x0=-7,5`` so argparse keeps the value."""
    tokens: List[str] = []
    pending = False
    for token in argv:
        if pending and _NEGATIVE_VALUE.match(token):
            tokens[-1] = f"{tokens[-1]}={token}"
        else:
            tokens.append(token)
        pending = token in _VECTOR_FLAGS
    return tokens


def spec_from_args(argv: Optional[Sequence[str]] = None) -> RunSpec:
    """Parse command-line arguments into a RunSpec."""
    if argv is None:
        argv = sys.argv[1:]
    args = build_parser().parse_args(_attach_vector_values(argv))
    params = _parse_extra(args.params)
    for key in PARAM_TYPES:
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    return RunSpec(args.command, args.problem, params, args.out)


_FAMILY_BUILDERS: Dict[str, Callable[[Dict[str, Any]], ProjectorFamily]] = {
    "spanned_box": lambda spec: spanned_box_family(),
    "whole_space": lambda spec: whole_space_family(),
    "box": lambda spec: constant_family(
        BoxSpec(spec["lower"], spec["upper"])
    ),
    "ball": lambda spec: constant_family(
        Ball(spec["center"], float(spec["radius"]))
    ),
    "singleton": lambda spec: constant_family(Singleton(spec["point"])),
}


def problem_from_dict(data: Dict[str, Any]) -> IqvipProblem:
    """
    Build an affine problem from its document form.

    Keys: ``matrix``, optional ``offset``, ``lipschitz``,
    ``strong_monotonicity``, ``mu``, ``family`` ({type, ...}),
    optional ``known_solution`` and ``name``.

    Raises:
        ContractViolationError: If a field is missing or invalid.
    """
    try:
        family_spec = data["family"]
        kind = family_spec["type"]
        if kind not in _FAMILY_BUILDERS:
            raise ContractViolationError(
                f"family.type: unknown family {kind!r}; choose from "
                f"{', '.join(sorted(_FAMILY_BUILDERS))}"
            )
        V = ForwardMap.affine(
            data["matrix"],
            data.get("offset"),
            data.get("lipschitz"),
            data.get("strong_monotonicity"),
        )
        return IqvipProblem(
            V,
            _FAMILY_BUILDERS[kind](family_spec),
            float(data["mu"]),
            dimension=len(data["matrix"]),
            known_solution=data.get("known_solution"),
            name=str(data.get("name", "problem")),
        )
    except KeyError as e:
        raise ContractViolationError(f"problem: missing field {e}") from e
    except TypeError as e:
        raise ContractViolationError(f"problem: invalid field: {e}") from e


def load_problem(source: str) -> IqvipProblem:
    """Built-in IQVIP or a JSON problem file."""
    if source in BUILTINS:
        problem = load_builtin(source)
        if not isinstance(problem, IqvipProblem):
            raise ContractViolationError(
                f"--problem {source!r} is a traffic network; use "
                "--command traffic"
            )
        return problem
    try:
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise ContractViolationError(
            f"--problem: cannot read {source}: {e}"
        ) from e
    except json.JSONDecodeError as e:
        raise ContractViolationError(
            f"{source}: line {e.lineno}, column {e.colno}: {e.msg}"
        ) from e
    return problem_from_dict(data)


def load_network(source: str) -> TrafficNetwork:
    """Built-in network, JSON file or http(s) URL."""
    if source in BUILTINS:
        network = load_builtin(source)
        if not isinstance(network, TrafficNetwork):
            raise ContractViolationError(
                f"--problem {source!r} is not a traffic network"
            )
        return network
    return TrafficNetwork.load(source)  # type: ignore[return-value]


def _with_mu(problem: IqvipProblem, mu: Optional[float]) -> IqvipProblem:
    if mu is None or mu == problem.mu:
        return problem
    return IqvipProblem(
        problem.forward_map,
        problem.family,
        mu,
        problem.dimension,
        known_solution=problem.known_solution,
        name=problem.name,
    )


def _start(spec: RunSpec, problem: IqvipProblem) -> np.ndarray:
    x0 = spec.get("x0")
    if x0 is None:
        x0 = DEFAULT_STARTS.get(spec.problem_source)
    if x0 is None:
        raise ContractViolationError(
            f"{spec.command}: --x0 is required for {spec.problem_source}"
        )
    return np.asarray(x0, dtype=float)


def _solver_config(
    spec: RunSpec, default_max_iter: int = 100_000
) -> SolverConfig:
    variant = spec.get("variant", "inertial")
    sigma = spec.get("sigma")
    if sigma is None:
        if variant != "first_order":
            raise ContractViolationError(
                f"{spec.command}: --sigma is required for the "
                f"{variant} variant"
            )
        sigma = 1.0
    return SolverConfig(
        variant=variant,
        sigma=sigma,
        tau=spec.get("tau"),
        h=spec.get("h", 1.0),
        max_iter=spec.get("max_iter", default_max_iter),
        stop_residual=spec.get("stop_residual"),
        stop_error=spec.get("stop_error"),
    )


def _linear_rate_summary(trace: Any, tail: float) -> Dict[str, Any]:
    try:
        rate = estimate_linear_rate(trace, tail)
    except InsufficientSamplesError as e:
        logger.warning("No rate fit: %s", e)
        return {"q": None, "r_squared": None}
    return {"q": rate.q, "r_squared": rate.r_squared, "metric": rate.metric}


def _run_certify(spec: RunSpec) -> Dict[str, Any]:
    problem = _with_mu(load_problem(spec.problem_source), spec.get("mu"))
    constants = problem.certify()
    document: Dict[str, Any] = {
        "problem": problem.name,
        "constants": constants.to_dict(),
        "rho_estimate": estimate_rho(
            problem.family,
            RHO_SAMPLES,
            seed=spec.get("seed"),
            dimension=problem.dimension,
        ),
    }
    sigma, tau = spec.get("sigma"), spec.get("tau")
    if sigma is not None and tau is not None:
        document["step"] = check_discrete(constants, sigma, tau).to_dict()
    return document


def _run_solve(spec: RunSpec) -> Dict[str, Any]:
    problem = _with_mu(load_problem(spec.problem_source), spec.get("mu"))
    config = _solver_config(spec)
    trace = problem.solve(_start(spec, problem), config)
    write_iter_trace(trace, spec.output_path)
    summary = {
        "command": "solve",
        "problem": problem.name,
        "variant": config.variant.value,
        "steps_used": trace.steps_used,
        "stop_reason": trace.stop_reason.value,
        "final_residual": float(trace.residual[-1]),
        "seed": spec.get("seed"),
    }
    summary.update(
        _linear_rate_summary(trace, spec.get("tail_fraction", 0.5))
    )
    return summary


def _run_simulate(spec: RunSpec) -> Dict[str, Any]:
    problem = _with_mu(load_problem(spec.problem_source), spec.get("mu"))
    x0 = _start(spec, problem)
    v0 = spec.get("v0", np.zeros_like(x0))
    config = DynamicsConfig(
        sigma_fn=spec.get("sigma"),
        tau_fn=spec.get("tau"),
        x0=x0,
        v0=v0,
        horizon=spec.get("horizon"),
        step=spec.get("dt", DEFAULT_DT),
    )
    trace = problem.integrate(config)
    write_trajectory(trace, spec.output_path)
    summary: Dict[str, Any] = {
        "command": "simulate",
        "problem": problem.name,
        "samples": len(trace),
        "final_residual": float(trace.residual[-1]),
        "seed": spec.get("seed"),
        "zeta": None,
        "nu": None,
        "r_squared": None,
    }
    if trace.dist is not None:
        try:
            rate = estimate_rate(trace, spec.get("tail_fraction", 0.5))
            summary.update(
                zeta=rate.zeta, nu=rate.nu, r_squared=rate.r_squared
            )
        except InsufficientSamplesError as e:
            logger.warning("No rate fit: %s", e)
    return summary


def _run_traffic(spec: RunSpec) -> Dict[str, Any]:
    network = load_network(spec.problem_source)
    defaults = UeParams()
    ue_params = UeParams(
        gap_tol=spec.get("gap_tol", defaults.gap_tol),
        max_iter=spec.get("ue_max_iter", defaults.max_iter),
        value_of_time=spec.get("value_of_time", defaults.value_of_time),
    )
    config = _solver_config(spec, default_max_iter=TRAFFIC_MAX_ITER)
    run = network.solve_tolls(
        config, spec.get("mu"), ue_params, x0=spec.get("x0")
    )
    write_toll_trace(run, spec.output_path)
    summary = {
        "command": "traffic",
        "network": network.name,
        "variant": config.variant.value,
        "steps_used": run.steps_used,
        "stop_reason": run.stop_reason.value,
        "initial_residual": float(run.residual[0]),
        "final_residual": float(run.residual[-1]),
        "final_tolls": run.tolls[-1].tolist(),
        "seed": spec.get("seed"),
    }
    summary.update(
        _linear_rate_summary(run, spec.get("tail_fraction", 0.5))
    )
    return summary


_RUNNERS: Dict[str, Callable[[RunSpec], Dict[str, Any]]] = {
    "certify": _run_certify,
    "solve": _run_solve,
    "simulate": _run_simulate,
    "traffic": _run_traffic,
}


def _flush_partial(spec: RunSpec, error: DivergenceError) -> None:
    trace = error.trace
    if trace is None or spec.output_path is None or len(trace) == 0:
        return
    if spec.command == "simulate":
        write_trajectory(trace, spec.output_path)
    elif isinstance(trace, TollTrace):
        write_toll_trace(trace, spec.output_path)
    else:
        write_iter_trace(trace, spec.output_path)
    write_summary(
        {
            "command": spec.command,
            "diverged": True,
            "step": error.step,
            "time": error.time,
            "message": str(error),
        },
        spec.output_path,
    )


def run(spec: RunSpec, stdout: Any = None) -> int:
    """
    Execute a RunSpec.

    Returns:
        0 on success, 1 for invalid input, 2 for numerical failure.
    """
    stdout = stdout or sys.stdout
    try:
        result = _RUNNERS[spec.command](spec)
    except DivergenceError as e:
        logger.error("%s", e)
        _flush_partial(spec, e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (IqvipError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    if spec.command == "certify":
        text = json.dumps(result, indent=2, sort_keys=True)
        print(text, file=stdout)
        if spec.output_path is not None:
            Path(spec.output_path).write_text(text + "\n", encoding="utf-8")
    else:
        write_summary(result, spec.output_path)
        print(json.dumps(result, sort_keys=True), file=stdout)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Console entry point."""
    try:
        level = get_log_level()
    except ValueError as e:
        print(f"error: IQVIP_LOG: {e}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    try:
        spec = spec_from_args(argv)
    except ContractViolationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
