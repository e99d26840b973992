"""Second-order dynamics ``x'' + sigma(t) x' + tau(t) B(x) = 0``."""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from .defaults import DEFAULT_DT, DIVERGENCE_BOUND, LOG_EVERY
from .errors import ContractViolationError, DivergenceError
from .problem_base import IqvipProblemBase
from .vectors import Vec, as_vec

logger = logging.getLogger(__name__)

TimeFunction = Callable[[float], float]


@dataclass(frozen=True)
class ConstantCoefficient:
    """``t -> value``."""

    value: float

    def __call__(self, t: float) -> float:
        return self.value


def _as_time_function(
    value: Union[float, TimeFunction], name: str
) -> TimeFunction:
    if callable(value):
        return value
    try:
        return ConstantCoefficient(float(value))
    except (TypeError, ValueError) as exc:
        raise ContractViolationError(
            f"{name} must be a number or a callable of time"
        ) from exc


@dataclass(frozen=True)
class DynamicsConfig:
    """
    Initial value problem for the trajectory simulator.

    Attributes:
        sigma_fn: Damping coefficient sigma(t), or a constant.
        tau_fn: Gain coefficient tau(t), or a constant.
        x0: Initial position.
        v0: Initial velocity.
        step: Fixed RK4 step.
        horizon: Final time.
    """

    sigma_fn: Union[float, TimeFunction]
    tau_fn: Union[float, TimeFunction]
    x0: Any
    v0: Any
    horizon: float
    step: float = DEFAULT_DT

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "sigma_fn", _as_time_function(self.sigma_fn, "sigma_fn")
        )
        object.__setattr__(
            self, "tau_fn", _as_time_function(self.tau_fn, "tau_fn")
        )
        x0 = as_vec(self.x0, "x0")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(
            self, "v0", as_vec(self.v0, "v0", dimension=x0.shape[0])
        )
        if not self.step > 0:
            raise ContractViolationError(
                f"step must be positive, got {self.step}"
            )
        if not self.horizon >= self.step:
            raise ContractViolationError(
                f"horizon {self.horizon} must be at least step {self.step}"
            )
        for t in (0.0, float(self.horizon)):
            for name in ("sigma_fn", "tau_fn"):
                value = getattr(self, name)(t)
                if not math.isfinite(value):
                    raise ContractViolationError(
                        f"{name}({t}) is not finite: {value}"
                    )

    @property
    def num_steps(self) -> int:
        return int(math.floor(self.horizon / self.step + 1e-9))


class TrajectorySample(NamedTuple):
    t: float
    x: Vec
    v: Vec
    dist: Optional[float]
    half_sq: Optional[float]


@dataclass
class TrajectoryTrace:
    """
    Sampled trajectory.

    Rows of ``positions`` and ``velocities`` align with ``times``.
    ``dist`` and ``half_sq`` are None when no solution was given.
    """

    times: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    residual: np.ndarray
    dist: Optional[np.ndarray] = None
    half_sq: Optional[np.ndarray] = None

    @property
    def samples(self) -> List[TrajectorySample]:
        out = []
        for i, t in enumerate(self.times):
            out.append(
                TrajectorySample(
                    float(t),
                    self.positions[i],
                    self.velocities[i],
                    None if self.dist is None else float(self.dist[i]),
                    None if self.half_sq is None else float(self.half_sq[i]),
                )
            )
        return out

    def __len__(self) -> int:
        return len(self.times)


def _build_trace(
    times: List[float],
    states: List[Vec],
    residuals: List[float],
    dimension: int,
    x_star: Optional[Vec],
) -> TrajectoryTrace:
    stacked = np.array(states, dtype=float).reshape(-1, 2 * dimension)
    positions = stacked[:, :dimension]
    trace = TrajectoryTrace(
        times=np.array(times, dtype=float),
        positions=positions,
        velocities=stacked[:, dimension:],
        residual=np.array(residuals, dtype=float),
    )
    if x_star is not None:
        dist = np.linalg.norm(positions - x_star, axis=1)
        trace.dist = dist
        trace.half_sq = 0.5 * dist**2
    return trace


class IqvipProblemDynamics(IqvipProblemBase):
    """Extension of IqvipProblemBase with the trajectory simulator."""

    def _rhs(
        self, sigma_fn: TimeFunction, tau_fn: TimeFunction, t: float, z: Vec
    ) -> Vec:
        n = self.dimension
        position, velocity = z[:n], z[n:]
        acceleration = (
            -tau_fn(t) * self._natural_map(position) - sigma_fn(t) * velocity
        )
        return np.concatenate((velocity, acceleration))

    def vector_field(
        self,
        sigma_fn: Union[float, TimeFunction],
        tau_fn: Union[float, TimeFunction],
        t: float,
        position: Any,
        velocity: Any,
    ) -> Tuple[Vec, Vec]:
        """
        Evaluate the first-order form of the dynamics.

        Returns:
            ``(v, -tau(t) B(u) - sigma(t) v)`` for state ``(u, v)``.
        """
        position = as_vec(position, "position", self.dimension)
        velocity = as_vec(velocity, "velocity", self.dimension)
        z = self._rhs(
            _as_time_function(sigma_fn, "sigma_fn"),
            _as_time_function(tau_fn, "tau_fn"),
            float(t),
            np.concatenate((position, velocity)),
        )
        return z[: self.dimension], z[self.dimension :]

    def integrate(
        self, config: DynamicsConfig, x_star: Optional[Any] = None
    ) -> TrajectoryTrace:
        """
        Integrate the dynamics with fixed-step classical RK4.

        Coefficients are evaluated at the stage times ``t``,
        ``t + dt/2`` and ``t + dt``. Every step is sampled; sample k sits
        at time ``k * dt``.

        Args:
            config: Initial value problem.
            x_star: Solution used for the distance columns; defaults to
                the problem's known solution.

        Returns:
            TrajectoryTrace from t = 0 to the horizon.

        Raises:
            ContractViolationError: If config dimensions do not match.
            DivergenceError: If the state becomes non-finite or exceeds
                the divergence bound; carries the blow-up time and the
                finite partial trace.
        """
        n = self.dimension
        if config.x0.shape[0] != n:
            raise ContractViolationError(
                f"x0 has dimension {config.x0.shape[0]}, expected {n}"
            )
        if x_star is None:
            x_star = self.known_solution
        else:
            x_star = as_vec(x_star, "x_star", n)

        self.forward_map.reset()
        sigma_fn, tau_fn = config.sigma_fn, config.tau_fn
        dt = float(config.step)
        steps = config.num_steps

        def f(t: float, z: Vec) -> Vec:
            return self._rhs(sigma_fn, tau_fn, t, z)

        z = np.concatenate((config.x0, config.v0))
        times = [0.0]
        states = [z]
        residuals = [float(np.linalg.norm(self._natural_map(z[:n])))]
        logger.info(
            "Integrating %s: %d RK4 steps of %g", self.name, steps, dt
        )
        for k in range(steps):
            t = k * dt
            k1 = f(t, z)
            k2 = f(t + 0.5 * dt, z + 0.5 * dt * k1)
            k3 = f(t + 0.5 * dt, z + 0.5 * dt * k2)
            k4 = f(t + dt, z + dt * k3)
            z_next = z + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)

            t_next = (k + 1) * dt
            if not np.all(np.isfinite(z_next)) or np.max(
                np.abs(z_next)
            ) > DIVERGENCE_BOUND:
                raise DivergenceError(
                    f"Trajectory diverged at t={t_next:g}",
                    time=t_next,
                    trace=_build_trace(times, states, residuals, n, x_star),
                )
            z = z_next
            times.append(t_next)
            states.append(z)
            residuals.append(float(np.linalg.norm(self._natural_map(z[:n]))))
            if (k + 1) % LOG_EVERY == 0:
                logger.debug("t=%g residual=%.6e", t_next, residuals[-1])

        return _build_trace(times, states, residuals, n, x_star)
