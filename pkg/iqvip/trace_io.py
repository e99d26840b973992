"""
CSV and JSON serialization of run outputs.

Traces are written with a one-line header and 17 significant digits so
that files round-trip exactly and diff cleanly between runs.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .dynamics_method import TrajectoryTrace
from .errors import ContractViolationError
from .solve_method import IterTrace, SolverVariant, StopReason
from .tolling_method import TollTrace

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FLOAT_FORMAT = "%.17g"
SUMMARY_SUFFIX = ".summary.json"


def summary_path(path: PathLike) -> Path:
    """Sidecar summary file for a trace written to ``path``."""
    path = Path(path)
    return path.with_name(path.name + SUMMARY_SUFFIX)


def _write_csv(path: PathLike, columns: List[str], table: np.ndarray) -> None:
    np.savetxt(
        path,
        table,
        fmt=FLOAT_FORMAT,
        delimiter=",",
        header=",".join(columns),
        comments="",
    )
    logger.debug("Wrote %d rows to %s", table.shape[0], path)


def _read_csv(path: PathLike) -> Dict[str, np.ndarray]:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
    if not header:
        raise ContractViolationError(f"Trace file {path} has no header")
    columns = header.split(",")
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if table.shape[1] != len(columns):
        raise ContractViolationError(
            f"Trace file {path}: header has {len(columns)} columns, "
            f"rows have {table.shape[1]}"
        )
    return {name: table[:, i] for i, name in enumerate(columns)}


def _stack(data: Dict[str, np.ndarray], prefix: str) -> np.ndarray:
    keys = sorted(
        (k for k in data if k.startswith(prefix) and k[len(prefix) :].isdigit()),
        key=lambda k: int(k[len(prefix) :]),
    )
    if not keys:
        raise ContractViolationError(f"No {prefix}0.. columns in trace file")
    return np.column_stack([data[k] for k in keys])


def _iter_trace(
    data: Dict[str, np.ndarray],
    path: PathLike,
    stop_reason: Optional[StopReason],
) -> IterTrace:
    summary = read_summary(path) if summary_path(path).exists() else {}
    if stop_reason is None:
        stop_reason = StopReason(summary.get("stop_reason", "max_iter"))
    n = data["n"].astype(int)
    return IterTrace(
        n=n,
        x=_stack(data, "x"),
        residual=data["residual"],
        error=data.get("error"),
        stop_reason=stop_reason,
        steps_used=int(n[-1]) if n.size else 0,
        variant=SolverVariant(summary.get("variant", "inertial")),
    )


def write_iter_trace(trace: IterTrace, path: PathLike) -> None:
    """Write ``n, x0..x{d-1}, residual[, error]``."""
    d = trace.x.shape[1]
    columns = ["n"] + [f"x{i}" for i in range(d)] + ["residual"]
    parts = [trace.n[:, None], trace.x, trace.residual[:, None]]
    if trace.error is not None:
        columns.append("error")
        parts.append(trace.error[:, None])
    _write_csv(path, columns, np.hstack(parts))


def read_iter_trace(
    path: PathLike, stop_reason: Optional[StopReason] = None
) -> IterTrace:
    """
    Read a trace written by ``write_iter_trace``.

    The stop reason and variant come from the sidecar summary when it
    exists.
    """
    return _iter_trace(_read_csv(path), path, stop_reason)


def write_trajectory(trace: TrajectoryTrace, path: PathLike) -> None:
    """Write ``t, x*, v*, residual[, dist]``."""
    d = trace.positions.shape[1]
    columns = (
        ["t"]
        + [f"x{i}" for i in range(d)]
        + [f"v{i}" for i in range(d)]
        + ["residual"]
    )
    parts = [
        trace.times[:, None],
        trace.positions,
        trace.velocities,
        trace.residual[:, None],
    ]
    if trace.dist is not None:
        columns.append("dist")
        parts.append(trace.dist[:, None])
    _write_csv(path, columns, np.hstack(parts))


def read_trajectory(path: PathLike) -> TrajectoryTrace:
    """Read a trajectory written by ``write_trajectory``."""
    data = _read_csv(path)
    dist = data.get("dist")
    return TrajectoryTrace(
        times=data["t"],
        positions=_stack(data, "x"),
        velocities=_stack(data, "v"),
        residual=data["residual"],
        dist=dist,
        half_sq=None if dist is None else 0.5 * dist**2,
    )


def write_toll_trace(trace: TollTrace, path: PathLike) -> None:
    """Write ``n, x* (tolls), flow*, residual``."""
    d = trace.tolls.shape[1]
    columns = (
        ["n"]
        + [f"x{i}" for i in range(d)]
        + [f"flow{i}" for i in range(d)]
        + ["residual"]
    )
    table = np.hstack(
        [
            trace.n[:, None],
            trace.tolls,
            trace.flows,
            trace.residual[:, None],
        ]
    )
    _write_csv(path, columns, table)


def read_toll_trace(
    path: PathLike, stop_reason: Optional[StopReason] = None
) -> TollTrace:
    """
    Read a toll trace written by ``write_toll_trace``.

    The solver trace gets the file's residual column, which is the
    traffic residual and equals the natural-map norm of the toll problem.
    """
    data = _read_csv(path)
    trace = _iter_trace(data, path, stop_reason)
    return TollTrace(
        trace=trace, flows=_stack(data, "flow"), residual=trace.residual
    )


def write_summary(summary: Dict[str, Any], path: PathLike) -> Path:
    """Write the sidecar summary of the trace at ``path``."""
    target = summary_path(path)
    with open(target, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return target


def read_summary(path: PathLike) -> Dict[str, Any]:
    """Read the sidecar summary of the trace at ``path``."""
    with open(summary_path(path), "r", encoding="utf-8") as fh:
        return json.load(fh)
