"""Vector type alias and boundary checks shared by every module."""

from typing import Any, Optional

import numpy as np
import numpy.typing as npt

from .errors import ContractViolationError

Vec = npt.NDArray[np.float64]


def as_vec(
    value: Any, name: str = "x", dimension: Optional[int] = None
) -> Vec:
    """
    Convert a value to a finite 1-D float64 array.

    Args:
        value: Sequence or array of reals.
        name: Argument name used in error messages.
        dimension: Expected length, if known.

    Returns:
        The value as a 1-D float64 array.

    Raises:
        ContractViolationError: If the value is not 1-D, has the wrong
            length or contains NaN/Inf.
    """
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ContractViolationError(
            f"{name} must be a vector of reals: {exc}"
        ) from exc
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ContractViolationError(
            f"{name} must be 1-D, got shape {arr.shape}"
        )
    if dimension is not None and arr.shape[0] != dimension:
        raise ContractViolationError(
            f"{name} has dimension {arr.shape[0]}, expected {dimension}"
        )
    if not np.all(np.isfinite(arr)):
        raise ContractViolationError(f"{name} contains NaN or Inf")
    return arr


def check_dimension(x: Vec, dimension: int, name: str = "x") -> None:
    """Raise ContractViolationError unless ``x`` has length ``dimension``."""
    if x.shape != (dimension,):
        raise ContractViolationError(
            f"{name} has shape {x.shape}, expected ({dimension},)"
        )
