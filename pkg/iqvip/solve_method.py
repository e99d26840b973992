"""Discrete inertial projection schemes."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import (
    Any,
    Callable,
    Dict,
    Hashable,
    List,
    Mapping,
    Optional,
    Tuple,
    Union,
)

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .defaults import DIVERGENCE_BOUND, LOG_EVERY
from .errors import ContractViolationError, DivergenceError
from .problem_base import IqvipProblemBase
from .vectors import Vec, as_vec

logger = logging.getLogger(__name__)

Schedule = Union[float, Callable[[int], float]]
IterCallback = Callable[[int, Vec, float], None]


class SolverVariant(str, Enum):
    GENERAL = "general"
    INERTIAL = "inertial"
    FIRST_ORDER = "first_order"


class StopReason(str, Enum):
    RESIDUAL = "residual"
    ERROR = "error"
    MAX_ITER = "max_iter"


def _evaluate(schedule: Schedule, n: int) -> float:
    return float(schedule(n)) if callable(schedule) else float(schedule)


@dataclass(frozen=True)
class SolverConfig:
    """
    Parameters of a solver run.

    Attributes:
        variant: ``general``, ``inertial`` or ``first_order``.
        sigma: Damping sigma, or a schedule ``n -> sigma_n`` (general only).
            Ignored by ``first_order``.
        tau: Relaxation tau, or a schedule ``n -> tau_n`` (general only).
        h: Step size, or a schedule ``n -> h_n``; must be 1 unless the
            variant is ``general``.
        max_iter: Iteration cap; always active.
        stop_residual: Stop once ``|B(x_n)| <= stop_residual``.
        stop_error: Stop once ``|x_n - x*| <= stop_error``; needs a
            known solution.
    """

    variant: Union[SolverVariant, str] = SolverVariant.INERTIAL
    sigma: Schedule = 0.5
    tau: Schedule = 1e-3
    h: Schedule = 1.0
    max_iter: int = 100_000
    stop_residual: Optional[float] = None
    stop_error: Optional[float] = None

    def __post_init__(self) -> None:
        try:
            variant = SolverVariant(self.variant)
        except ValueError as exc:
            raise ContractViolationError(
                f"Unknown solver variant: {self.variant!r}"
            ) from exc
        object.__setattr__(self, "variant", variant)

        if variant is not SolverVariant.GENERAL:
            for name in ("sigma", "tau", "h"):
                if callable(getattr(self, name)):
                    raise ContractViolationError(
                        f"{variant.value} variant takes a constant {name}; "
                        "schedules need variant='general'"
                    )
            if self.h != 1.0:
                raise ContractViolationError(
                    f"{variant.value} variant requires h == 1, got {self.h}"
                )
        if not callable(self.tau) and not self.tau > 0:
            raise ContractViolationError(
                f"tau must be positive, got {self.tau}"
            )
        if not callable(self.h) and not self.h > 0:
            raise ContractViolationError(f"h must be positive, got {self.h}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ContractViolationError(
                f"max_iter must be a positive integer, got {self.max_iter}"
            )
        for name in ("stop_residual", "stop_error"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ContractViolationError(
                    f"{name} must be positive, got {value}"
                )

    def sigma_at(self, n: int) -> float:
        return _evaluate(self.sigma, n)

    def tau_at(self, n: int) -> float:
        return _evaluate(self.tau, n)

    def h_at(self, n: int) -> float:
        return _evaluate(self.h, n)


@dataclass
class IterTrace:
    """
    Iterate history of a solver run.

    Arrays are indexed by recorded iterate; ``n`` runs 0, 1, 2, ...
    ``error`` holds ``|x_n - x*|`` when a known solution was attached.
    """

    n: np.ndarray
    x: np.ndarray
    residual: np.ndarray
    error: Optional[np.ndarray]
    stop_reason: StopReason
    steps_used: int
    variant: SolverVariant = SolverVariant.INERTIAL

    @property
    def v(self) -> Optional[np.ndarray]:
        """Squared errors ``|x_n - x*|^2``."""
        return None if self.error is None else self.error**2

    @property
    def final_x(self) -> Vec:
        return self.x[-1]

    @property
    def iterates(self) -> List[Tuple[int, Vec, float, Optional[float]]]:
        """Rows ``(n, x_n, residual, v_n)``."""
        v = self.v
        return [
            (
                int(self.n[i]),
                self.x[i],
                float(self.residual[i]),
                None if v is None else float(v[i]),
            )
            for i in range(len(self.n))
        ]

    def __len__(self) -> int:
        return len(self.n)


class _TraceRecorder:
    """Accumulates iterates and builds an IterTrace."""

    def __init__(self, track_error: bool) -> None:
        self.xs: List[Vec] = []
        self.residuals: List[float] = []
        self.errors: Optional[List[float]] = [] if track_error else None

    def add(self, x: Vec, residual: float, error: Optional[float]) -> None:
        self.xs.append(x)
        self.residuals.append(residual)
        if self.errors is not None:
            self.errors.append(error)

    def build(
        self, stop_reason: StopReason, variant: SolverVariant
    ) -> IterTrace:
        count = len(self.xs)
        return IterTrace(
            n=np.arange(count),
            x=np.array(self.xs, dtype=float),
            residual=np.array(self.residuals, dtype=float),
            error=(
                None
                if self.errors is None
                else np.array(self.errors, dtype=float)
            ),
            stop_reason=stop_reason,
            steps_used=max(count - 1, 0),
            variant=variant,
        )


def _escaped(x: Vec) -> bool:
    return not np.all(np.isfinite(x)) or bool(
        np.max(np.abs(x)) > DIVERGENCE_BOUND
    )


class IqvipProblemSolve(IqvipProblemBase):
    """Extension of IqvipProblemBase with the discrete schemes."""

    def _drift(self, x: Vec) -> Vec:
        """``P_{psi(x)}(V(x) - mu x) - V(x)``, i.e. ``-B(x)``."""
        return -self._natural_map(x)

    @staticmethod
    def _advance(
        variant: SolverVariant,
        x: Vec,
        x_prev: Vec,
        drift: Vec,
        sigma: float,
        tau: float,
        h: float,
    ) -> Vec:
        if variant is SolverVariant.GENERAL:
            return x + (1.0 - sigma * h) * (x - x_prev) + tau * h**2 * drift
        if variant is SolverVariant.INERTIAL:
            y = x + (1.0 - sigma) * (x - x_prev)
            return y + tau * drift
        return x + tau * drift

    def _pair(self, x_n: Any, x_prev: Any) -> Tuple[Vec, Vec]:
        return (
            as_vec(x_n, "x_n", self.dimension),
            as_vec(x_prev, "x_prev", self.dimension),
        )

    def step_general(
        self,
        x_n: Any,
        x_prev: Any,
        h: float,
        sigma: float,
        tau: float,
    ) -> Vec:
        """
        One step of the general scheme.

        ``x_n + (1 - sigma h)(x_n - x_prev) + tau h^2 (P - V)`` where
        ``P - V = P_{psi(x_n)}(V(x_n) - mu x_n) - V(x_n)``.
        """
        x_n, x_prev = self._pair(x_n, x_prev)
        return self._advance(
            SolverVariant.GENERAL,
            x_n,
            x_prev,
            self._drift(x_n),
            sigma,
            tau,
            h,
        )

    def step_inertial(
        self, x_n: Any, x_prev: Any, sigma: float, tau: float
    ) -> Vec:
        """
        One step of the inertial projection scheme.

        Extrapolates ``y = x_n + (1 - sigma)(x_n - x_prev)`` and returns
        ``y + tau (P - V)``.
        """
        x_n, x_prev = self._pair(x_n, x_prev)
        return self._advance(
            SolverVariant.INERTIAL,
            x_n,
            x_prev,
            self._drift(x_n),
            sigma,
            tau,
            1.0,
        )

    def step_first_order(self, x_n: Any, tau: float) -> Vec:
        """One projection step ``x_n + tau (P - V)``."""
        x_n = as_vec(x_n, "x_n", self.dimension)
        return self._advance(
            SolverVariant.FIRST_ORDER,
            x_n,
            x_n,
            self._drift(x_n),
            1.0,
            tau,
            1.0,
        )

    def solve(
        self,
        x0: Any,
        config: SolverConfig,
        x_minus1: Optional[Any] = None,
        callback: Optional[IterCallback] = None,
    ) -> IterTrace:
        """
        Iterate the configured scheme until a stopping rule fires.

        The residual rule is checked before the error rule, both before
        the iteration cap.

        Args:
            x0: Starting point.
            config: Solver configuration.
            x_minus1: Previous iterate; defaults to x0.
            callback: Called as ``callback(n, x_n, residual)`` for every
                recorded iterate.

        Returns:
            IterTrace with every iterate from n = 0 to the stop.

        Raises:
            ContractViolationError: If inputs are invalid or stop_error is
                set without a known solution.
            DivergenceError: If an iterate becomes non-finite or exceeds
                the divergence bound; carries the finite partial trace.
        """
        if config.stop_error is not None and self.known_solution is None:
            raise ContractViolationError(
                "stop_error requires a problem with a known solution"
            )
        x = as_vec(x0, "x0", self.dimension)
        x_prev = (
            x.copy()
            if x_minus1 is None
            else as_vec(x_minus1, "x_minus1", self.dimension)
        )
        self.forward_map.reset()
        x_star = self.known_solution
        recorder = _TraceRecorder(track_error=x_star is not None)
        variant = SolverVariant(config.variant)

        logger.info(
            "Solving %s with %s scheme (max_iter=%d)",
            self.name,
            variant.value,
            config.max_iter,
        )
        n = 0
        while True:
            b = self._natural_map(x)
            if _escaped(b):
                raise DivergenceError(
                    f"Natural map is not finite at iteration {n}",
                    step=n,
                    trace=recorder.build(StopReason.MAX_ITER, variant),
                )
            residual = float(np.linalg.norm(b))
            error = (
                None
                if x_star is None
                else float(np.linalg.norm(x - x_star))
            )
            recorder.add(x, residual, error)
            if callback is not None:
                callback(n, x, residual)
            if n % LOG_EVERY == 0:
                logger.debug(
                    "iter %d: residual=%.6e error=%s", n, residual, error
                )

            reason = None
            if (
                config.stop_residual is not None
                and residual <= config.stop_residual
            ):
                reason = StopReason.RESIDUAL
            elif (
                config.stop_error is not None
                and error is not None
                and error <= config.stop_error
            ):
                reason = StopReason.ERROR
            elif n >= config.max_iter:
                reason = StopReason.MAX_ITER
            if reason is not None:
                break

            x_next = self._advance(
                variant,
                x,
                x_prev,
                -b,
                config.sigma_at(n),
                config.tau_at(n),
                config.h_at(n),
            )
            if _escaped(x_next):
                raise DivergenceError(
                    f"Iterate {n + 1} left the divergence bound "
                    f"{DIVERGENCE_BOUND:g}",
                    step=n + 1,
                    trace=recorder.build(StopReason.MAX_ITER, variant),
                )
            x_prev, x = x, x_next
            n += 1

        logger.info(
            "Stopped %s after %d steps (%s), residual=%.3e",
            self.name,
            n,
            reason.value,
            residual,
        )
        return recorder.build(reason, variant)


def sweep(
    problem: IqvipProblemSolve,
    x0: Any,
    configs: Mapping[Hashable, SolverConfig],
    max_workers: Optional[int] = None,
    x_minus1: Optional[Any] = None,
) -> Dict[Hashable, IterTrace]:
    """
    Run several configurations on one problem in a thread pool.

    Results are keyed like ``configs`` and ordered by sorted key,
    independent of completion order.

    Raises:
        DivergenceError: Re-raised from the first diverging run in key
            order.
    """
    keys = sorted(configs)
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {
            key: executor.submit(problem.solve, x0, configs[key], x_minus1)
            for key in keys
        }
        return {key: futures[key].result() for key in keys}


def check_eventual_decrease(errors: Any, window: int = 1000) -> bool:
    """
    Check that every error is eventually beaten within ``window`` steps.

    True iff for each n with a full window ahead, some ``e_{n+k}`` with
    ``1 <= k <= window`` is strictly below ``e_n`` (zeros count as
    converged).
    """
    if window < 1:
        raise ContractViolationError(f"window must be >= 1, got {window}")
    e = np.asarray(errors, dtype=float)
    if e.size <= window:
        return True
    ahead = sliding_window_view(e[1:], window).min(axis=1)
    current = e[: ahead.shape[0]]
    return bool(np.all((ahead < current) | (current == 0.0)))
