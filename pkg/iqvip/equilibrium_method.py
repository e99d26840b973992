"""User equilibrium by Frank-Wolfe with exact line search."""

import logging
import warnings
from dataclasses import dataclass
from typing import Any, Dict, Hashable, List, Optional, Tuple

import networkx as nx
import numpy as np
from scipy.optimize import minimize_scalar

from .defaults import (
    LINE_SEARCH_XATOL,
    LOG_EVERY,
    UE_GAP_TOL,
    UE_MAX_ITER,
    VALUE_OF_TIME,
)
from .errors import ContractViolationError, InfeasibleNetworkError
from .network_base import BPR_ALPHA, BPR_BETA, TrafficNetworkBase
from .vectors import as_vec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UeParams:
    """
    Frank-Wolfe settings.

    Attributes:
        gap_tol: Stop once the relative gap is at most this.
        max_iter: Cap on line-search updates.
        value_of_time: Tolls are divided by this before entering the
            generalized cost.
        warm_start: Let repeated solves start from the previous flows.
        line_search_xatol: Step tolerance of the bounded line search.
    """

    gap_tol: float = UE_GAP_TOL
    max_iter: int = UE_MAX_ITER
    value_of_time: float = VALUE_OF_TIME
    warm_start: bool = True
    line_search_xatol: float = LINE_SEARCH_XATOL

    def __post_init__(self) -> None:
        if not self.gap_tol > 0:
            raise ContractViolationError(
                f"gap_tol must be positive, got {self.gap_tol}"
            )
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ContractViolationError(
                f"max_iter must be a positive integer, got {self.max_iter}"
            )
        if not self.value_of_time > 0:
            raise ContractViolationError(
                f"value_of_time must be positive, got {self.value_of_time}"
            )
        if not self.line_search_xatol > 0:
            raise ContractViolationError(
                "line_search_xatol must be positive, "
                f"got {self.line_search_xatol}"
            )


@dataclass
class UeResult:
    """
    Equilibrium link flows and diagnostics.

    ``od_flows`` has one row per OD pair; its column sums are
    ``link_flows``.
    """

    link_flows: np.ndarray
    od_flows: np.ndarray
    relative_gap: float
    iterations: int
    objective_history: np.ndarray
    link_costs: np.ndarray
    converged: bool


class TrafficNetworkEquilibrium(TrafficNetworkBase):
    """Extension of TrafficNetworkBase with user-equilibrium assignment."""

    def _link_tolls(self, tolls: Any, value_of_time: float) -> np.ndarray:
        tolls = as_vec(tolls, "tolls", self.num_controlled)
        per_link = np.zeros(self.num_links)
        per_link[self.controlled_indices] = tolls / value_of_time
        return per_link

    def generalized_costs(
        self, flows: Any, tolls: Any, value_of_time: float = VALUE_OF_TIME
    ) -> np.ndarray:
        """BPR time plus toll on every link."""
        return self.link_times(flows) + self._link_tolls(tolls, value_of_time)

    def _beckmann(self, flows: np.ndarray, link_tolls: np.ndarray) -> float:
        coeff = BPR_ALPHA / (BPR_BETA + 1)
        integral = self.t0 * (
            flows + coeff * flows ** (BPR_BETA + 1) / self.cap**BPR_BETA
        )
        return float(np.sum(integral) + link_tolls @ flows)

    def beckmann(
        self, flows: Any, tolls: Any, value_of_time: float = VALUE_OF_TIME
    ) -> float:
        """
        Beckmann objective: summed cost integrals from 0 to each flow.

        Raises:
            ContractViolationError: If flows are negative or misshaped.
        """
        flows = as_vec(flows, "flows", self.num_links)
        if np.any(flows < 0):
            raise ContractViolationError("flows must be nonnegative")
        return self._beckmann(flows, self._link_tolls(tolls, value_of_time))

    def _shortest_paths(
        self, origin: Hashable, costs: np.ndarray
    ) -> Tuple[Dict[Hashable, float], Dict[Hashable, List[Hashable]]]:
        def weight(u: Hashable, v: Hashable, data: Dict[int, Any]) -> float:
            return min(costs[key] for key in data)

        if np.all(costs >= 0):
            return nx.single_source_dijkstra(self.graph, origin, weight=weight)
        try:
            return nx.single_source_bellman_ford(
                self.graph, origin, weight=weight
            )
        except nx.NetworkXUnbounded as e:
            raise InfeasibleNetworkError(
                f"Negative generalized-cost cycle reachable from {origin!r}"
            ) from e

    def _path_links(
        self, nodes: List[Hashable], costs: np.ndarray
    ) -> List[int]:
        """Cheapest link per hop; ties go to the lowest link index."""
        return [
            min(self.graph[u][v], key=lambda k: (costs[k], k))
            for u, v in zip(nodes[:-1], nodes[1:])
        ]

    def _all_or_nothing(
        self, costs: np.ndarray
    ) -> Tuple[np.ndarray, float]:
        """Assign each OD demand to a cheapest path at fixed costs."""
        od_flows = np.zeros((len(self.od_pairs), self.num_links))
        lower_bound = 0.0
        by_origin: Dict[Hashable, List[int]] = {}
        for i, od in enumerate(self.od_pairs):
            by_origin.setdefault(od.origin, []).append(i)
        for origin, members in by_origin.items():
            dist, paths = self._shortest_paths(origin, costs)
            for i in members:
                od = self.od_pairs[i]
                if od.demand == 0:
                    continue
                links = self._path_links(paths[od.destination], costs)
                od_flows[i, links] += od.demand
                lower_bound += od.demand * dist[od.destination]
        return od_flows, lower_bound

    def user_equilibrium(
        self,
        tolls: Any,
        params: Optional[UeParams] = None,
        initial_od_flows: Optional[np.ndarray] = None,
    ) -> UeResult:
        """
        Compute the user equilibrium under the given tolls.

        Frank-Wolfe: all-or-nothing assignment on cheapest generalized-cost
        paths, then a bounded Brent line search on the Beckmann objective,
        until the relative gap ``(c.f - c.y) / c.f`` reaches gap_tol.

        Args:
            tolls: One toll per controlled link.
            params: Frank-Wolfe settings.
            initial_od_flows: Feasible per-OD flows to start from.

        Returns:
            UeResult with link and per-OD flows.

        Raises:
            InfeasibleNetworkError: If an OD pair has no path.
            ContractViolationError: If tolls or initial flows are
                misshaped.
        """
        params = params or UeParams()
        link_tolls = self._link_tolls(tolls, params.value_of_time)
        self.check_reachability()

        if initial_od_flows is None:
            od_flows, _ = self._all_or_nothing(self.t0 + link_tolls)
        else:
            od_flows = np.array(initial_od_flows, dtype=float)
            expected = (len(self.od_pairs), self.num_links)
            if od_flows.shape != expected:
                raise ContractViolationError(
                    f"initial_od_flows has shape {od_flows.shape}, "
                    f"expected {expected}"
                )

        flows = od_flows.sum(axis=0)
        history = [self._beckmann(flows, link_tolls)]
        gap = np.inf
        iterations = 0
        while True:
            costs = self.link_times(flows) + link_tolls
            target, lower_bound = self._all_or_nothing(costs)
            total = float(costs @ flows)
            gap = (total - lower_bound) / abs(total) if total != 0 else 0.0
            if gap <= params.gap_tol or iterations >= params.max_iter:
                break

            direction = target.sum(axis=0) - flows

            def phi(step: float) -> float:
                return self._beckmann(
                    np.maximum(flows + step * direction, 0.0), link_tolls
                )

            search = minimize_scalar(
                phi,
                bounds=(0.0, 1.0),
                method="bounded",
                options={"xatol": params.line_search_xatol},
            )
            step = float(search.x)
            if phi(step) > history[-1]:
                logger.debug("FW line search made no progress; stopping")
                break
            od_flows = od_flows + step * (target - od_flows)
            flows = od_flows.sum(axis=0)
            history.append(self._beckmann(flows, link_tolls))
            iterations += 1
            if iterations % LOG_EVERY == 0:
                logger.debug("FW iter %d: relative gap %.3e", iterations, gap)

        converged = gap <= params.gap_tol
        if not converged:
            warnings.warn(
                f"Frank-Wolfe stopped after {iterations} iterations with "
                f"relative gap {gap:.3e} above {params.gap_tol:.1e}",
                UserWarning,
                stacklevel=2,
            )
        return UeResult(
            link_flows=flows,
            od_flows=od_flows,
            relative_gap=float(gap),
            iterations=iterations,
            objective_history=np.array(history),
            link_costs=costs,
            converged=converged,
        )

    def flow_map(
        self,
        tolls: Any,
        params: Optional[UeParams] = None,
        initial_od_flows: Optional[np.ndarray] = None,
    ) -> np.ndarray:
        """Equilibrium flows on the controlled links under ``tolls``."""
        result = self.user_equilibrium(tolls, params, initial_od_flows)
        return result.link_flows[self.controlled_indices]
