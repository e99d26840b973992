"""Toll setting as an IQVIP over the controlled-link flows."""

import logging
import threading
from dataclasses import dataclass
from typing import Any, List, Optional

import numpy as np

from .equilibrium_method import (
    TrafficNetworkEquilibrium,
    UeParams,
    UeResult,
)
from .errors import ContractViolationError, DivergenceError
from .problem import IqvipProblem
from .problem_base import ForwardMap
from .projections import (
    BoxSpec,
    MovingSetSpec,
    ProjectorFamily,
    moving_family,
    negated_family,
)
from .solve_method import IterTrace, SolverConfig, StopReason
from .vectors import Vec, as_vec

logger = logging.getLogger(__name__)


class WarmStartFlowMap:
    """
    Toll -> negated controlled-link flows, ``W(x) = -V(x)``.

    With warm start on, each equilibrium starts from the per-OD flows of
    the previous call in the same thread. ``reset`` drops that state; the
    solver calls it at the start of every run, so runs sharing one map
    across threads do not see each other's flows.
    """

    def __init__(
        self, network: TrafficNetworkEquilibrium, params: UeParams
    ) -> None:
        self.network = network
        self.params = params
        self._local = threading.local()

    @property
    def last_result(self) -> Optional[UeResult]:
        return getattr(self._local, "last_result", None)

    @property
    def calls(self) -> int:
        """Equilibrium solves in the calling thread since the last reset."""
        return getattr(self._local, "calls", 0)

    @property
    def last_flows(self) -> Optional[np.ndarray]:
        result = self.last_result
        if result is None:
            return None
        return result.link_flows[self.network.controlled_indices]

    def reset(self) -> None:
        self._local.last_result = None
        self._local.calls = 0

    def __call__(self, tolls: Vec) -> Vec:
        previous = self.last_result
        initial = None
        if self.params.warm_start and previous is not None:
            initial = previous.od_flows
        result = self.network.user_equilibrium(tolls, self.params, initial)
        self._local.last_result = result
        self._local.calls = self.calls + 1
        return -result.link_flows[self.network.controlled_indices]


@dataclass
class TollTrace:
    """Solver trace of a toll run with the equilibrium flows per iterate."""

    trace: IterTrace
    flows: np.ndarray
    residual: np.ndarray

    @property
    def tolls(self) -> np.ndarray:
        return self.trace.x

    @property
    def n(self) -> np.ndarray:
        return self.trace.n

    @property
    def error(self) -> Optional[np.ndarray]:
        return self.trace.error

    @property
    def stop_reason(self) -> StopReason:
        return self.trace.stop_reason

    @property
    def steps_used(self) -> int:
        return self.trace.steps_used

    def steps_to(self, threshold: float) -> Optional[int]:
        """First iteration whose residual is at most ``threshold``."""
        hits = np.flatnonzero(self.residual <= threshold)
        return int(self.n[hits[0]]) if hits.size else None

    def __len__(self) -> int:
        return len(self.trace)


class TrafficNetworkTolling(TrafficNetworkEquilibrium):
    """Extension of TrafficNetworkEquilibrium with toll optimization."""

    def corridor_family(self) -> ProjectorFamily:
        """Moving boxes ``psi(x) = [lo + x, hi + x]`` (rho = 1)."""
        spec = MovingSetSpec.from_set(
            BoxSpec(self.corridor_lo, self.corridor_hi),
            shift=lambda x: x,
            shift_lipschitz=1.0,
        )
        return moving_family(spec)

    def traffic_residual(self, tolls: Any, flows: Any, mu: float) -> float:
        """
        Residual ``|P_{psi(x)}(V + mu x) - V|`` of the toll problem.

        Args:
            tolls: Toll vector x.
            flows: Controlled-link flows V(x).
            mu: Regularization parameter.

        Returns:
            Norm of the clamp of ``V + mu x`` into
            ``[lo + x, hi + x]`` minus V.
        """
        x = as_vec(tolls, "tolls", self.num_controlled)
        v = as_vec(flows, "flows", self.num_controlled)
        projected = np.clip(
            v + mu * x, self.corridor_lo + x, self.corridor_hi + x
        )
        return float(np.linalg.norm(projected - v))

    def _require_controls(self) -> None:
        if self.num_controlled == 0:
            raise ContractViolationError(
                f"Network '{self.name}' has no controlled links"
            )

    def as_problem(
        self,
        mu: float,
        ue_params: Optional[UeParams] = None,
        flow_map: Optional[WarmStartFlowMap] = None,
    ) -> IqvipProblem:
        """
        Wrap the toll problem as an IQVIP.

        Uses ``W = -V`` over ``-psi``, so the natural map is
        ``P_{psi(x)}(V + mu x) - V`` and its norm is the traffic residual.
        """
        self._require_controls()
        if flow_map is None:
            flow_map = WarmStartFlowMap(self, ue_params or UeParams())
        return IqvipProblem(
            ForwardMap(flow_map, name="negated equilibrium flows"),
            negated_family(self.corridor_family()),
            mu,
            self.num_controlled,
            name=f"{self.name} tolls",
        )

    def solve_tolls(
        self,
        config: SolverConfig,
        mu: float,
        ue_params: Optional[UeParams] = None,
        x0: Optional[Any] = None,
    ) -> TollTrace:
        """
        Iterate tolls with the configured scheme.

        Args:
            config: Solver configuration.
            mu: Regularization parameter.
            ue_params: Equilibrium settings for every flow evaluation.
            x0: Initial tolls; zeros by default.

        Returns:
            TollTrace whose residual column is the traffic residual.

        Raises:
            ContractViolationError: If the network has no controlled links.
            DivergenceError: Propagated from the solver, with the partial
                run as a TollTrace.
        """
        self._require_controls()
        flow_map = WarmStartFlowMap(self, ue_params or UeParams())
        problem = self.as_problem(mu, flow_map=flow_map)
        if x0 is None:
            x0 = np.zeros(self.num_controlled)

        flows: List[np.ndarray] = []
        residuals: List[float] = []

        def record(n: int, x: Vec, _residual: float) -> None:
            v = flow_map.last_flows.copy()
            flows.append(v)
            residuals.append(self.traffic_residual(x, v, mu))

        def collected(trace: IterTrace) -> TollTrace:
            return TollTrace(
                trace=trace,
                flows=np.array(flows).reshape(-1, self.num_controlled),
                residual=np.array(residuals, dtype=float),
            )

        try:
            trace = problem.solve(x0, config, callback=record)
        except DivergenceError as e:
            if e.trace is not None:
                e.trace = collected(e.trace)
            raise
        logger.info(
            "Toll run on %s: %d equilibrium solves, final r_n=%.3e",
            self.name,
            flow_map.calls,
            residuals[-1],
        )
        return collected(trace)
