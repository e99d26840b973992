"""Unified IQVIP problem combining all capabilities."""

from .certify_method import IqvipProblemCertify
from .dynamics_method import IqvipProblemDynamics
from .solve_method import IqvipProblemSolve


class IqvipProblem(
    IqvipProblemCertify,
    IqvipProblemSolve,
    IqvipProblemDynamics,
):
    """
    IQVIP problem with the full toolset.

    Features:
    - Natural map, residual and solution checks
    - Convergence certificates and error-bound evaluation
    - General, inertial and first-order projection schemes
    - RK4 simulation of the second-order dynamics

    Example:
        >>> from iqvip import ForwardMap, IqvipProblem, spanned_box_family
        >>> V = ForwardMap.affine([[3.4, -0.64], [2.375, 0.8]], None, 2.2, 2.0)
        >>> problem = IqvipProblem(V, spanned_box_family(), 2.0, 2)
        >>> problem.natural_map([7.0, 5.0])
        array([14.   , 15.625])
    """

    pass
