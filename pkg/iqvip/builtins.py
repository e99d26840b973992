"""Built-in problems runnable without external files."""

import logging
from importlib import resources
from typing import Callable, Dict, Tuple, Union

import numpy as np

from .errors import ContractViolationError
from .problem import IqvipProblem
from .problem_base import ForwardMap
from .projections import (
    MovingSetSpec,
    Singleton,
    constant_family,
    moving_family,
    spanned_box_family,
)
from .traffic_network import TrafficNetwork

logger = logging.getLogger(__name__)

# Example matrix; the declared constants L=2.2, eta=2 are inputs, not
# properties computed from it
EXAMPLE51_MATRIX = np.array([[3.4, -0.64], [2.375, 0.8]])
EXAMPLE51_LIPSCHITZ = 2.2
EXAMPLE51_MONOTONICITY = 2.0
EXAMPLE51_MU = 2.0

TRAFFIC_DEMO_FILE = "traffic_demo.json"

# Starting points used by the command line when --x0 is omitted
DEFAULT_STARTS: Dict[str, Tuple[float, ...]] = {
    "example51": (7.0, 5.0),
    "damped": (1.0, 1.0),
    "scalar-gain": (1.0, 1.0),
}


def example51() -> IqvipProblem:
    """``V(x) = Qx`` over the box spanned by 0 and x, mu = 2, x* = 0."""
    V = ForwardMap.affine(
        EXAMPLE51_MATRIX,
        lipschitz=EXAMPLE51_LIPSCHITZ,
        strong_monotonicity=EXAMPLE51_MONOTONICITY,
        name="Q x",
    )
    return IqvipProblem(
        V,
        spanned_box_family(),
        EXAMPLE51_MU,
        dimension=2,
        known_solution=np.zeros(2),
        name="example51",
    )


def damped(dimension: int = 2) -> IqvipProblem:
    """
    Problem whose natural map vanishes identically.

    ``psi(x) = {V(x)}`` with ``V(x) = x``, so the projection always
    returns V(x) and the dynamics reduce to pure damping.
    """
    V = ForwardMap.affine(np.eye(dimension), None, 1.0, 1.0, name="x")
    spec = MovingSetSpec.from_set(
        Singleton(np.zeros(dimension)), shift=V, shift_lipschitz=1.0
    )
    return IqvipProblem(
        V, moving_family(spec), 1.0, dimension=dimension, name="damped"
    )


def scalar_gain(dimension: int = 2) -> IqvipProblem:
    """``V(x) = x`` with ``psi = {0}`` and mu = 1; B(x) = x, x* = 0."""
    V = ForwardMap.affine(np.eye(dimension), None, 1.0, 1.0, name="x")
    return IqvipProblem(
        V,
        constant_family(Singleton(np.zeros(dimension))),
        1.0,
        dimension=dimension,
        known_solution=np.zeros(dimension),
        name="scalar-gain",
    )


def traffic_demo() -> TrafficNetwork:
    """The shipped synthetic 8-node, 16-link network."""
    source = resources.files("iqvip") / "data" / TRAFFIC_DEMO_FILE
    with resources.as_file(source) as path:
        return TrafficNetwork.from_file(path)


BUILTINS: Dict[str, Callable[[], Union[IqvipProblem, TrafficNetwork]]] = {
    "example51": example51,
    "damped": damped,
    "scalar-gain": scalar_gain,
    "traffic-demo": traffic_demo,
}


def load_builtin(name: str) -> Union[IqvipProblem, TrafficNetwork]:
    """
    Build a built-in problem by name.

    Raises:
        ContractViolationError: If the name is unknown.
    """
    try:
        factory = BUILTINS[name]
    except KeyError as e:
        raise ContractViolationError(
            f"Unknown built-in problem {name!r}; choose from "
            f"{', '.join(sorted(BUILTINS))}"
        ) from e
    logger.debug("Loading built-in problem %s", name)
    return factory()
