"""Unified traffic network combining all capabilities."""

from .tolling_method import TrafficNetworkTolling


class TrafficNetwork(TrafficNetworkTolling):
    """
    Road network with equilibrium assignment and toll optimization.

    Features:
    - Loading from dicts, JSON files and http(s) URLs
    - BPR link times and Beckmann objective
    - Frank-Wolfe user equilibrium with warm start
    - Toll problem wrapped as an IQVIP and solved by the inertial scheme

    Example:
        >>> from iqvip import SolverConfig, TrafficNetwork, load_builtin
        >>> net = load_builtin("traffic-demo")
        >>> run = net.solve_tolls(
        ...     SolverConfig(sigma=0.6, tau=0.02, max_iter=150), mu=0.5
        ... )
    """

    pass
