"""Certificates for a concrete problem."""

from typing import Any, NamedTuple, Optional

import numpy as np

from .certificates import CertifiedConstants, compute_constants
from .errors import ContractViolationError, InvalidConstantsError
from .problem_base import IqvipProblemBase
from .vectors import as_vec


class ErrorBounds(NamedTuple):
    """
    Both sides of the two error-bound inequalities at a point w.

    ``theta1 |B(w)|^2 <= <B(w), w - x*>`` and
    ``theta |w - x*| <= |B(w)|``.
    """

    lhs1: float
    rhs1: float
    lhs2: float
    rhs2: float

    def holds(self, slack: float = 1e-9) -> bool:
        return self.lhs1 <= self.rhs1 + slack and self.lhs2 <= self.rhs2 + slack


class IqvipProblemCertify(IqvipProblemBase):
    """Extension of IqvipProblemBase with certificate helpers."""

    def certify(self) -> CertifiedConstants:
        """
        Compute the certificate bundle from the problem's constants.

        Returns:
            CertifiedConstants for (L, eta) of V, rho of psi and mu.

        Raises:
            InvalidConstantsError: If V lacks L or eta, or they are
                inconsistent.
        """
        V = self.forward_map
        if not V.certified:
            raise InvalidConstantsError(
                f"Forward map '{V.name}' has no declared Lipschitz and "
                "strong monotonicity constants"
            )
        return compute_constants(
            V.lipschitz, V.strong_monotonicity, self.family.rho, self.mu
        )

    def error_bounds(
        self, w: Any, constants: Optional[CertifiedConstants] = None
    ) -> ErrorBounds:
        """
        Evaluate the error-bound inequalities at w.

        Args:
            w: Test point.
            constants: Bundle to use; defaults to ``certify()``.

        Returns:
            ErrorBounds with both sides of each inequality.

        Raises:
            ContractViolationError: If the problem has no known solution.
        """
        if self.known_solution is None:
            raise ContractViolationError(
                "error_bounds requires a problem with a known solution"
            )
        if constants is None:
            constants = self.certify()
        w = as_vec(w, "w", self.dimension)
        b = self._natural_map(w)
        diff = w - self.known_solution
        b_norm = float(np.linalg.norm(b))
        return ErrorBounds(
            lhs1=constants.theta1 * b_norm**2,
            rhs1=float(b @ diff),
            lhs2=constants.theta * float(np.linalg.norm(diff)),
            rhs2=b_norm,
        )
