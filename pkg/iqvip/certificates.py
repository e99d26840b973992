"""
Convergence constants and parameter conditions.

``compute_constants`` derives theta, theta1 and the existence margin from
(L, eta, rho, mu). The ``check_*`` helpers evaluate the parameter
conditions for the discrete schemes and for the second-order dynamics.
A nonpositive theta is a reported state, never an exception.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .defaults import MONOTONE_TOL
from .errors import (
    ContractViolationError,
    InvalidConstantsError,
    OutOfDomainError,
)

TimeFunction = Callable[[float], float]

# Tolerance for the recompute check in CertifiedConstants.verify
RECOMPUTE_TOL = 1e-12


def _theta(L: float, eta: float, rho: float, mu: float) -> float:
    return eta - rho - 0.5 - 0.5 * L**2 - 0.5 * mu**2 + mu * eta


def _lipschitz_b(L: float, rho: float, mu: float) -> float:
    return 2.0 * L + rho + mu


def _existence_margin(L: float, eta: float, rho: float, mu: float) -> float:
    return mu - math.sqrt(L**2 - 2.0 * eta * mu + mu**2) - rho


@dataclass(frozen=True)
class CertifiedConstants:
    """
    Constants certifying existence and convergence.

    Attributes:
        L: Lipschitz constant of V.
        eta: Strong monotonicity constant of V.
        rho: Lipschitz modulus of the projector family.
        mu: Regularization parameter.
        theta: ``eta - rho - 1/2 - L^2/2 - mu^2/2 + mu*eta``.
        theta1: ``theta / (2L + rho + mu)^2``.
        existence_margin: ``mu - sqrt(L^2 - 2 eta mu + mu^2) - rho``.
    """

    L: float
    eta: float
    rho: float
    mu: float
    theta: float
    theta1: float
    existence_margin: float

    @property
    def theta_positive(self) -> bool:
        return self.theta > 0

    @property
    def existence_ok(self) -> bool:
        return self.existence_margin > 0

    @property
    def lipschitz_b(self) -> float:
        """Lipschitz modulus ``2L + rho + mu`` of the natural map."""
        return _lipschitz_b(self.L, self.rho, self.mu)

    def verify(self, tol: float = RECOMPUTE_TOL) -> None:
        """
        Recompute the derived constants and compare.

        Raises:
            InvalidConstantsError: If any derived field is off by more
                than tol.
        """
        expected = {
            "theta": _theta(self.L, self.eta, self.rho, self.mu),
            "theta1": _theta(self.L, self.eta, self.rho, self.mu)
            / _lipschitz_b(self.L, self.rho, self.mu) ** 2,
            "existence_margin": _existence_margin(
                self.L, self.eta, self.rho, self.mu
            ),
        }
        for field_name, value in expected.items():
            actual = getattr(self, field_name)
            if abs(actual - value) > tol:
                raise InvalidConstantsError(
                    f"{field_name}={actual!r} does not match recomputed "
                    f"value {value!r}"
                )

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["theta_positive"] = self.theta_positive
        data["existence_ok"] = self.existence_ok
        return data


def compute_constants(
    L: float, eta: float, rho: float, mu: float
) -> CertifiedConstants:
    """
    Compute the certificate bundle for (L, eta, rho, mu).

    Args:
        L: Lipschitz constant of V.
        eta: Strong monotonicity constant of V, ``0 < eta <= L``.
        rho: Projector family modulus, nonnegative.
        mu: Regularization parameter, positive.

    Returns:
        The populated CertifiedConstants. theta may be nonpositive.

    Raises:
        InvalidConstantsError: If eta > L or any constant is out of range.

    Example:
        >>> c = compute_constants(2.2, 2.0, 1.0, 2.0)
        >>> round(c.theta, 12)
        0.08
    """
    if not eta > 0:
        raise InvalidConstantsError(f"eta must be positive, got {eta}")
    if eta > L:
        raise InvalidConstantsError(
            f"eta={eta} exceeds L={L}; strong monotonicity cannot exceed "
            "the Lipschitz constant"
        )
    if not rho >= 0:
        raise InvalidConstantsError(f"rho must be nonnegative, got {rho}")
    if not mu > 0:
        raise InvalidConstantsError(f"mu must be positive, got {mu}")

    theta = _theta(L, eta, rho, mu)
    constants = CertifiedConstants(
        L=float(L),
        eta=float(eta),
        rho=float(rho),
        mu=float(mu),
        theta=theta,
        theta1=theta / _lipschitz_b(L, rho, mu) ** 2,
        existence_margin=_existence_margin(L, eta, rho, mu),
    )
    constants.verify()
    return constants


def tau_max(theta1: float, sigma: float) -> float:
    """
    Upper bound on tau for the discrete schemes.

    Returns ``theta1 * min((1 - sigma)/4, sigma^2/(4 - sigma))`` for
    sigma in (0, 1) and 0.0 elsewhere.
    """
    if not 0 < sigma < 1:
        return 0.0
    return theta1 * min((1.0 - sigma) / 4.0, sigma**2 / (4.0 - sigma))


@dataclass(frozen=True)
class StepCertificate:
    """Result of checking (sigma, tau) against the convergence conditions."""

    sigma: float
    tau: float
    tau_max: float
    discrete_ok: bool
    continuous_ok: bool
    reason: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def check_discrete(
    constants: CertifiedConstants, sigma: float, tau: float
) -> StepCertificate:
    """
    Check (sigma, tau) for the inertial and first-order schemes.

    Requires ``0 < sigma < 1`` and ``0 < tau < tau_max`` (both strict).
    The continuous-time conditions are evaluated too, for reporting.

    Args:
        constants: Certificate bundle.
        sigma: Damping parameter.
        tau: Relaxation parameter.

    Returns:
        StepCertificate; ``reason`` explains a failed discrete check.
    """
    bound = tau_max(constants.theta1, sigma)
    reason = None
    if not constants.theta_positive:
        reason = f"theta={constants.theta:.6g} is not positive"
    elif not 0 < sigma < 1:
        reason = f"sigma={sigma} is outside the open interval (0, 1)"
    elif not 0 < tau < bound:
        reason = f"tau={tau} is outside the open interval (0, {bound:.6g})"

    try:
        continuous_ok = check_continuous(constants, sigma, tau)
    except OutOfDomainError:
        continuous_ok = False

    return StepCertificate(
        sigma=float(sigma),
        tau=float(tau),
        tau_max=bound,
        discrete_ok=reason is None,
        continuous_ok=continuous_ok,
        reason=reason,
    )


def continuous_sigma_bounds(
    constants: CertifiedConstants, tau: float
) -> Tuple[float, float]:
    """
    Interval of constant sigma admissible for the dynamics at ``tau``.

    Raises:
        OutOfDomainError: If tau <= 1.
    """
    if not tau > 1:
        raise OutOfDomainError(
            f"tau must exceed 1 for the continuous-time conditions, "
            f"got {tau}"
        )
    lower = 0.5 + 0.5 * math.sqrt(1.0 + 8.0 * tau / constants.theta1)
    upper = constants.theta**2 * constants.theta1 * (tau - 1.0)
    return lower, upper


def check_continuous(
    constants: CertifiedConstants, sigma: float, tau: float
) -> bool:
    """
    Check constant (sigma, tau) against the dynamics conditions.

    True iff ``1/2 + sqrt(1 + 8 tau/theta1)/2 <= sigma <=
    theta^2 theta1 (tau - 1)``.

    Raises:
        OutOfDomainError: If tau <= 1.
    """
    if not tau > 1:
        raise OutOfDomainError(
            f"tau must exceed 1 for the continuous-time conditions, "
            f"got {tau}"
        )
    if not constants.theta_positive:
        return False
    lower, upper = continuous_sigma_bounds(constants, tau)
    return lower <= sigma <= upper


@dataclass(frozen=True)
class ShiftedCoefficient:
    """``t -> base + sign / (t + 1)``."""

    base: float
    sign: float

    def __call__(self, t: float) -> float:
        return self.base + self.sign / (t + 1.0)

    def derivative(self, t: float) -> float:
        return -self.sign / (t + 1.0) ** 2


def time_varying_coefficients(
    sigma: float, tau: float
) -> Tuple[ShiftedCoefficient, ShiftedCoefficient]:
    """
    Build ``sigma(t) = sigma + 1/(t+1)`` and ``tau(t) = tau - 1/(t+1)``.

    Raises:
        ContractViolationError: Unless sigma > 1 and tau > 1.
    """
    if not (sigma > 1 and tau > 1):
        raise ContractViolationError(
            f"sigma and tau must both exceed 1, got sigma={sigma}, "
            f"tau={tau}"
        )
    return (
        ShiftedCoefficient(float(sigma), 1.0),
        ShiftedCoefficient(float(tau), -1.0),
    )


def _validate_grid(t_grid: Sequence[float]) -> np.ndarray:
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ContractViolationError("t_grid must be a nonempty 1-D grid")
    if grid[0] != 0.0:
        raise ContractViolationError(
            f"t_grid must start at 0, got {grid[0]}"
        )
    if np.any(np.diff(grid) <= 0):
        raise ContractViolationError("t_grid must be strictly increasing")
    return grid


def _is_shifted_family(sigma_fn: Any, tau_fn: Any) -> bool:
    return (
        isinstance(sigma_fn, ShiftedCoefficient)
        and isinstance(tau_fn, ShiftedCoefficient)
        and sigma_fn.sign >= 0
        and tau_fn.sign <= 0
    )


def check_conditions_i_iii(
    constants: CertifiedConstants,
    sigma_fn: TimeFunction,
    tau_fn: TimeFunction,
    t_grid: Sequence[float],
    tol: float = MONOTONE_TOL,
) -> bool:
    """
    Check the time-varying conditions on a grid.

    (i) ``1 < sigma(t) <= theta^2 theta1 tau(t) + 1``;
    (ii) sigma(t) and sigma(t)/tau(t) are nonincreasing;
    (iii) ``sigma(t)^2 - sigma(t) - 2 tau(t)/theta1 >= 0``.

    Monotonicity is tested by finite differences between consecutive grid
    points with slack ``tol``. For coefficients from
    ``time_varying_coefficients`` (ii) holds in closed form as long as
    tau(t) stays positive.

    Args:
        constants: Certificate bundle (theta, theta1 may be synthetic).
        sigma_fn: Damping coefficient as a function of time.
        tau_fn: Relaxation coefficient as a function of time.
        t_grid: Increasing grid starting at 0.
        tol: Slack for the monotonicity checks.

    Returns:
        True iff all three conditions hold on the grid.

    Raises:
        ContractViolationError: If the grid is empty, unsorted or does
            not start at 0.
    """
    grid = _validate_grid(t_grid)
    if not constants.theta_positive or not constants.theta1 > 0:
        return False

    sigmas = np.array([sigma_fn(float(t)) for t in grid])
    taus = np.array([tau_fn(float(t)) for t in grid])
    if not (np.all(np.isfinite(sigmas)) and np.all(np.isfinite(taus))):
        return False
    if np.any(taus <= 0):
        return False

    theta, theta1 = constants.theta, constants.theta1
    cond_i = np.all(sigmas > 1) and np.all(
        sigmas <= theta**2 * theta1 * taus + 1.0
    )
    cond_iii = np.all(sigmas**2 - sigmas - 2.0 * taus / theta1 >= 0)
    if not (cond_i and cond_iii):
        return False

    if _is_shifted_family(sigma_fn, tau_fn):
        return True
    if grid.size < 2:
        return True
    sigma_slopes = np.diff(sigmas) / np.diff(grid)
    ratio_slopes = np.diff(sigmas / taus) / np.diff(grid)
    return bool(np.all(sigma_slopes <= tol) and np.all(ratio_slopes <= tol))


def _branch_gap(sigma: float) -> float:
    return (1.0 - sigma) / 4.0 - sigma**2 / (4.0 - sigma)


def tau_max_crossing() -> Tuple[float, float]:
    """
    Locate the sigma where the two tau_max branches meet.

    Returns:
        ``(sigma, value)`` with ``(1 - sigma)/4 = sigma^2/(4 - sigma) =
        value``; sigma is about 0.5907.
    """
    sigma = brentq(_branch_gap, 0.0, 1.0, xtol=1e-15)
    return float(sigma), (1.0 - sigma) / 4.0


def best_discrete_step(
    constants: CertifiedConstants, safety: float = 0.9
) -> Tuple[float, float]:
    """
    Pick (sigma, tau) maximizing the admissible tau.

    Args:
        constants: Certificate bundle with positive theta.
        safety: Fraction of tau_max to use, in (0, 1).

    Returns:
        ``(sigma, safety * tau_max)`` at the crossing sigma.

    Raises:
        ContractViolationError: If safety is outside (0, 1).
        InvalidConstantsError: If theta is not positive.
    """
    if not 0 < safety < 1:
        raise ContractViolationError(
            f"safety must lie in (0, 1), got {safety}"
        )
    if not constants.theta_positive:
        raise InvalidConstantsError(
            f"theta={constants.theta:.6g} is not positive; no step size "
            "is certified"
        )
    sigma, _ = tau_max_crossing()
    return sigma, safety * tau_max(constants.theta1, sigma)
