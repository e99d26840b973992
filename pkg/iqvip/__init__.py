"""
IQVIP: inertial projection methods for inverse quasi-variational
inequalities.

Solvers for problems of the form: find x* with V(x*) in psi(x*) and
<x*, z - V(x*)> >= 0 for every z in psi(x*). The package provides the
natural map and its certificates, discrete inertial and first-order
schemes, an RK4 simulator of the underlying second-order dynamics, and a
toll-setting application on BPR traffic networks.
"""

from .builtins import load_builtin
from .certificates import (
    CertifiedConstants,
    StepCertificate,
    best_discrete_step,
    check_conditions_i_iii,
    check_continuous,
    check_discrete,
    compute_constants,
    tau_max,
    tau_max_crossing,
    time_varying_coefficients,
)
from .dynamics_method import DynamicsConfig, TrajectoryTrace
from .equilibrium_method import UeParams, UeResult
from .errors import (
    ContractViolationError,
    DivergenceError,
    InfeasibleNetworkError,
    InsufficientSamplesError,
    InvalidConstantsError,
    IqvipError,
    NetworkFormatError,
    OutOfDomainError,
    UnsupportedVerificationError,
)
from .network_base import (
    ControlledLink,
    Link,
    OdPair,
    TrafficNetworkBase,
    bpr_time,
)
from .problem import IqvipProblem
from .problem_base import ForwardMap, IqvipProblemBase
from .projections import (
    Ball,
    BoxSpec,
    MovingSetSpec,
    ProjectorFamily,
    Singleton,
    WholeSpace,
    constant_family,
    estimate_rho,
    moving_family,
    negated_family,
    project_box,
    project_moving,
    spanned_box_family,
    verify_projection,
    whole_space_family,
)
from .rates import (
    LinearRate,
    RateEstimate,
    estimate_linear_rate,
    estimate_rate,
)
from .solve_method import (
    IterTrace,
    SolverConfig,
    StopReason,
    check_eventual_decrease,
    sweep,
)
from .tolling_method import TollTrace
from .traffic_network import TrafficNetwork

__version__ = "0.1.0"
__description__ = "Inertial projection solvers for IQVIPs"

__all__ = [
    "Ball",
    "BoxSpec",
    "CertifiedConstants",
    "ContractViolationError",
    "ControlledLink",
    "DivergenceError",
    "DynamicsConfig",
    "ForwardMap",
    "InfeasibleNetworkError",
    "InsufficientSamplesError",
    "InvalidConstantsError",
    "IqvipError",
    "IqvipProblem",
    "IqvipProblemBase",
    "IterTrace",
    "LinearRate",
    "Link",
    "MovingSetSpec",
    "NetworkFormatError",
    "OdPair",
    "OutOfDomainError",
    "ProjectorFamily",
    "RateEstimate",
    "Singleton",
    "SolverConfig",
    "StepCertificate",
    "StopReason",
    "TollTrace",
    "TrafficNetwork",
    "TrafficNetworkBase",
    "TrajectoryTrace",
    "UeParams",
    "UeResult",
    "UnsupportedVerificationError",
    "WholeSpace",
    "best_discrete_step",
    "bpr_time",
    "check_conditions_i_iii",
    "check_continuous",
    "check_discrete",
    "check_eventual_decrease",
    "compute_constants",
    "constant_family",
    "estimate_linear_rate",
    "estimate_rate",
    "estimate_rho",
    "load_builtin",
    "moving_family",
    "negated_family",
    "project_box",
    "project_moving",
    "spanned_box_family",
    "sweep",
    "tau_max",
    "tau_max_crossing",
    "time_varying_coefficients",
    "verify_projection",
    "whole_space_family",
    "__version__",
    "__description__",
]
