"""
Library-wide numerical defaults and environment configuration.

Tolerances and guards used across the solvers live here so that tests and
the command line agree on them. Change a value here rather than
hard-coding it in a module.
"""

import logging
import os
from typing import Optional

# Residual below which a point counts as an IQVIP solution
SOLUTION_TOL = 1e-9

# Slack for the projection characterization checks
VERIFY_TOL = 1e-9

# Any state coordinate above this magnitude is treated as divergence
DIVERGENCE_BOUND = 1e12

# Fixed RK4 step for trajectory simulation (time units)
DEFAULT_DT = 1e-3

# Finite-difference slack when checking monotonicity of sigma(t), tau(t)
MONOTONE_TOL = 1e-9

# Minimum number of samples required for a rate fit
MIN_FIT_SAMPLES = 10

# Frank-Wolfe user equilibrium
UE_GAP_TOL = 1e-8
UE_MAX_ITER = 2000
LINE_SEARCH_XATOL = 1e-10
VALUE_OF_TIME = 1.0

# Emit a DEBUG line every this many iterations
LOG_EVERY = 1000

# Environment variable holding the log level for the command line
LOG_ENV_VAR = "IQVIP_LOG"
DEFAULT_LOG_LEVEL = logging.WARNING


def parse_log_level(value: str) -> int:
    """
    Parse a log level given as a name or an integer.

    Args:
        value: Level name (DEBUG, info, ...) or integer string.

    Returns:
        Numeric logging level.

    Raises:
        ValueError: If the value is neither a known name nor an integer.
    """
    text = value.strip()
    if text.lstrip("-").isdigit():
        return int(text)
    level = logging.getLevelName(text.upper())
    if not isinstance(level, int):
        raise ValueError(f"Invalid log level: {value!r}")
    return level


def get_log_level(environ: Optional[dict] = None) -> int:
    """
    Get the log level requested through ``IQVIP_LOG``.

    Args:
        environ: Mapping to read from; defaults to ``os.environ``.

    Returns:
        Numeric logging level, WARNING when the variable is unset.

    Raises:
        ValueError: If the variable holds an invalid level.
    """
    env = os.environ if environ is None else environ
    raw = env.get(LOG_ENV_VAR)
    if raw is None or not raw.strip():
        return DEFAULT_LOG_LEVEL
    return parse_log_level(raw)
