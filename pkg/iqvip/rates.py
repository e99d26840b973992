"""Log-linear rate fits for iteration and trajectory traces."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np
from scipy import stats

from .defaults import MIN_FIT_SAMPLES
from .errors import ContractViolationError, InsufficientSamplesError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RateEstimate:
    """
    Fit of ``|x(t) - x*| ~ nu |x(0) - x*| exp(-zeta t)``.

    ``exact`` marks a trace that reached the solution exactly; zeta is
    then +inf and nu is 0.
    """

    nu: float
    zeta: float
    r_squared: float
    samples_used: int
    exact: bool = False


@dataclass(frozen=True)
class LinearRate:
    """Fit of ``e_n ~ C q^n``; q is 0 for exact convergence."""

    q: float
    r_squared: float
    samples_used: int
    metric: str = "error"
    exact: bool = False


def _select_tail(
    x: np.ndarray, y: np.ndarray, tail_fraction: float
) -> Tuple[np.ndarray, np.ndarray]:
    if not 0 < tail_fraction <= 1:
        raise ContractViolationError(
            f"tail_fraction must lie in (0, 1], got {tail_fraction}"
        )
    start = int(math.floor(len(y) * (1.0 - tail_fraction)))
    x_tail, y_tail = x[start:], y[start:]
    if len(y_tail) < MIN_FIT_SAMPLES:
        raise InsufficientSamplesError(
            f"Rate fit needs at least {MIN_FIT_SAMPLES} samples in the "
            f"tail, got {len(y_tail)}"
        )
    zeros = np.flatnonzero(y_tail <= 0)
    if zeros.size:
        logger.debug(
            "Tail reaches zero at sample %d; fitting the prefix",
            int(zeros[0]),
        )
        x_tail, y_tail = x_tail[: zeros[0]], y_tail[: zeros[0]]
    return x_tail, y_tail


def fit_log_linear(x: Any, y: Any) -> Tuple[float, float, float]:
    """
    Least-squares line through ``(x, log y)``.

    Args:
        x: Abscissae, at least two distinct values.
        y: Positive ordinates.

    Returns:
        ``(slope, intercept, r_squared)``. Constant data has r_squared 1.
    """
    x = np.asarray(x, dtype=float)
    log_y = np.log(np.asarray(y, dtype=float))
    fit = stats.linregress(x, log_y)
    if np.ptp(log_y) == 0.0:
        r_squared = 1.0
    else:
        r_squared = float(fit.rvalue) ** 2
    return float(fit.slope), float(fit.intercept), r_squared


def estimate_rate(trace: Any, tail_fraction: float = 0.5) -> RateEstimate:
    """
    Estimate the exponential decay rate of a trajectory.

    Args:
        trace: TrajectoryTrace with distances to the solution.
        tail_fraction: Trailing share of samples used for the fit.

    Returns:
        RateEstimate with ``zeta`` the negated slope of log dist vs t.

    Raises:
        ContractViolationError: If the trace has no distances or
            tail_fraction is outside (0, 1].
        InsufficientSamplesError: If the tail has fewer than 10 samples.
    """
    dist: Optional[np.ndarray] = trace.dist
    if dist is None:
        raise ContractViolationError(
            "Trajectory has no distances; integrate with a known solution"
        )
    times, tail = _select_tail(trace.times, dist, tail_fraction)
    if len(tail) < 2:
        return RateEstimate(
            nu=0.0,
            zeta=math.inf,
            r_squared=1.0,
            samples_used=len(tail),
            exact=True,
        )
    slope, intercept, r_squared = fit_log_linear(times, tail)
    d0 = float(dist[0])
    nu = math.exp(intercept) / d0 if d0 > 0 else math.inf
    return RateEstimate(
        nu=nu, zeta=-slope, r_squared=r_squared, samples_used=len(tail)
    )


def estimate_linear_rate(
    trace: Any, tail_fraction: float = 0.5, metric: str = "auto"
) -> LinearRate:
    """
    Estimate the linear convergence factor q of an iteration trace.

    Args:
        trace: IterTrace from a solver run.
        tail_fraction: Trailing share of iterates used for the fit.
        metric: ``"error"`` for ``|x_n - x*|``, ``"residual"`` for
            ``|B(x_n)|``, or ``"auto"`` to prefer errors when present.

    Returns:
        LinearRate with ``q = exp(slope)`` of log e_n vs n.

    Raises:
        ContractViolationError: If the metric is unknown or unavailable.
        InsufficientSamplesError: If the tail has fewer than 10 points.
    """
    if metric not in ("auto", "error", "residual"):
        raise ContractViolationError(f"Unknown rate metric: {metric!r}")
    if metric == "auto":
        metric = "error" if trace.error is not None else "residual"
    values = trace.error if metric == "error" else trace.residual
    if values is None:
        raise ContractViolationError(
            "Trace has no errors; attach a known solution or use "
            "metric='residual'"
        )
    ns, tail = _select_tail(trace.n.astype(float), values, tail_fraction)
    if len(tail) < 2:
        return LinearRate(
            q=0.0,
            r_squared=1.0,
            samples_used=len(tail),
            metric=metric,
            exact=True,
        )
    slope, _, r_squared = fit_log_linear(ns, tail)
    return LinearRate(
        q=math.exp(slope),
        r_squared=r_squared,
        samples_used=len(tail),
        metric=metric,
    )
