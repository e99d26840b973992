"""Base class for IQVIP problems."""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass
from typing import Any, Callable, Optional

import numpy as np

from .defaults import SOLUTION_TOL
from .errors import ContractViolationError, InvalidConstantsError
from .projections import ProjectorFamily
from .vectors import Vec, as_vec, check_dimension

logger = logging.getLogger(__name__)


class AffineMap:
    """The map ``x -> A x + b``."""

    def __init__(self, matrix: Any, offset: Any = None) -> None:
        self.matrix = np.array(matrix, dtype=float)
        if self.matrix.ndim != 2 or (
            self.matrix.shape[0] != self.matrix.shape[1]
        ):
            raise ContractViolationError(
                f"matrix must be square, got shape {self.matrix.shape}"
            )
        n = self.matrix.shape[0]
        self.offset = (
            np.zeros(n)
            if offset is None
            else as_vec(offset, "offset", dimension=n)
        )

    def __call__(self, x: Vec) -> Vec:
        return self.matrix @ x + self.offset


@dataclass(frozen=True)
class ForwardMap:
    """
    Single-valued map V with optional Lipschitz and monotonicity moduli.

    Attributes:
        evaluate: Callable computing V(x).
        lipschitz: Lipschitz constant L, if known.
        strong_monotonicity: Strong monotonicity constant eta, if known.
        name: Label used in logs.
    """

    evaluate: Callable[[Vec], Vec]
    lipschitz: Optional[float] = None
    strong_monotonicity: Optional[float] = None
    name: str = "V"

    def __post_init__(self) -> None:
        L, eta = self.lipschitz, self.strong_monotonicity
        if L is not None and not L > 0:
            raise InvalidConstantsError(
                f"Lipschitz constant must be positive, got {L}"
            )
        if eta is not None and not eta > 0:
            raise InvalidConstantsError(
                f"Strong monotonicity constant must be positive, got {eta}"
            )
        if L is not None and eta is not None and eta > L:
            raise InvalidConstantsError(
                f"Strong monotonicity eta={eta} exceeds Lipschitz L={L}"
            )

    def __call__(self, x: Vec) -> Vec:
        return self.evaluate(x)

    def reset(self) -> None:
        """Clear per-run state of ``evaluate`` (warm starts), if it has any."""
        reset = getattr(self.evaluate, "reset", None)
        if callable(reset):
            reset()

    @classmethod
    def affine(
        cls,
        matrix: Any,
        offset: Any = None,
        lipschitz: Optional[float] = None,
        strong_monotonicity: Optional[float] = None,
        name: str = "affine",
    ) -> "ForwardMap":
        """Build ``V(x) = A x + b``."""
        return cls(
            AffineMap(matrix, offset), lipschitz, strong_monotonicity, name
        )

    @property
    def certified(self) -> bool:
        """True when both L and eta are known."""
        return (
            self.lipschitz is not None
            and self.strong_monotonicity is not None
        )


class IqvipProblemBase:
    """
    Base class holding an IQVIP instance.

    Find x* with ``V(x*) in psi(x*)`` and ``<x*, z - V(x*)> >= 0`` for all
    z in ``psi(x*)``. Equivalently, x* is a zero of the natural map
    ``B(x) = V(x) - P_{psi(x)}(V(x) - mu x)``.

    Instances are treated as immutable and may be shared across threads.
    """

    def __init__(
        self,
        forward_map: ForwardMap,
        family: ProjectorFamily,
        mu: float,
        dimension: int,
        known_solution: Optional[Any] = None,
        solution_tol: float = SOLUTION_TOL,
        name: str = "iqvip",
    ) -> None:
        """
        Initialize the problem.

        Args:
            forward_map: The map V.
            family: Projector family of psi.
            mu: Regularization parameter mu > 0.
            dimension: Length of the state vector.
            known_solution: Optional solution x*, checked on entry.
            solution_tol: Residual tolerance for accepting x*.
            name: Label used in logs and summaries.

        Raises:
            ContractViolationError: If mu or dimension is invalid, or the
                known solution has a residual above solution_tol.
        """
        if not mu > 0:
            raise ContractViolationError(f"mu must be positive, got {mu}")
        if int(dimension) != dimension or dimension < 1:
            raise ContractViolationError(
                f"dimension must be a positive integer, got {dimension}"
            )
        self.forward_map = forward_map
        self.family = family
        self.mu = float(mu)
        self.dimension = int(dimension)
        self.name = name
        self.solution_tol = float(solution_tol)
        self.known_solution: Optional[Vec] = None
        if known_solution is not None:
            self.known_solution = self._check_solution(known_solution)

    def _check_solution(self, candidate: Any) -> Vec:
        """Validate a claimed solution and freeze it."""
        x_star = as_vec(candidate, "known_solution", self.dimension)
        residual = self.residual_norm(x_star)
        if residual > self.solution_tol:
            raise ContractViolationError(
                f"known_solution has residual {residual:.3e} above "
                f"tolerance {self.solution_tol:.1e}"
            )
        x_star = x_star.copy()
        x_star.flags.writeable = False
        return x_star

    def with_known_solution(self, x_star: Any) -> "IqvipProblemBase":
        """Return a copy of this problem carrying ``x_star``."""
        clone = copy.copy(self)
        clone.known_solution = self._check_solution(x_star)
        return clone

    def _natural_map(self, x: Vec) -> Vec:
        """B(x) without argument checks (x must be a valid vector)."""
        v = self.forward_map(x)
        return v - self.family.project(x, v - self.mu * x)

    def natural_map(self, x: Any) -> Vec:
        """
        Evaluate the natural map.

        Args:
            x: Point of dimension ``self.dimension``.

        Returns:
            ``V(x) - P_{psi(x)}(V(x) - mu x)``.

        Raises:
            ContractViolationError: If x has the wrong dimension or is
                not finite.
        """
        x = as_vec(x, "x", self.dimension)
        b = self._natural_map(x)
        check_dimension(b, self.dimension, "natural map value")
        return b

    def residual_norm(self, x: Any) -> float:
        """Euclidean norm of the natural map at x."""
        return float(np.linalg.norm(self.natural_map(x)))

    def is_solution(self, x: Any, tol: float = SOLUTION_TOL) -> bool:
        """
        Check whether x solves the problem.

        Raises:
            ContractViolationError: If tol is not positive.
        """
        if not tol > 0:
            raise ContractViolationError(f"tol must be positive, got {tol}")
        return self.residual_norm(x) <= tol

    def distance_to_solution(self, x: Any) -> Optional[float]:
        """``|x - x*|`` when a known solution is attached, else None."""
        if self.known_solution is None:
            return None
        x = as_vec(x, "x", self.dimension)
        return float(np.linalg.norm(x - self.known_solution))

    def __repr__(self) -> str:
        return (
            f"{type(self).__name__}(name={self.name!r}, "
            f"dimension={self.dimension}, mu={self.mu}, "
            f"family={self.family.name!r})"
        )
