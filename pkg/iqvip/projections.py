"""
Projector families and verification oracles.

A projector family maps a base point ``x`` and a target ``y`` to the
metric projection of ``y`` onto the convex set ``psi(x)``. Boxes, balls,
singletons and translated ("moving") sets are first-class; anything else
can be wrapped as long as it supplies a projection callable.
"""

from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Optional

import numpy as np

from .defaults import VERIFY_TOL
from .errors import (
    ContractViolationError,
    InsufficientSamplesError,
    UnsupportedVerificationError,
)
from .vectors import Vec, as_vec

# Box corners are added to the sampler only up to this dimension
_MAX_CORNER_DIM = 10


class ConvexSet(ABC):
    """Closed convex set with a metric projection."""

    dimension: Optional[int] = None

    @abstractmethod
    def project(self, y: Vec) -> Vec:
        """Return the point of the set nearest to ``y``."""

    @abstractmethod
    def contains(self, y: Vec, tol: float = VERIFY_TOL) -> bool:
        """Return True if ``y`` lies in the set up to ``tol``."""

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """
        Draw ``count`` points of the set as rows of an array.

        Raises:
            UnsupportedVerificationError: If the set has no sampler.
        """
        raise UnsupportedVerificationError(
            f"{type(self).__name__} does not provide a point sampler"
        )


@dataclass(frozen=True, eq=False)
class BoxSpec(ConvexSet):
    """Axis-aligned box ``[lower, upper]``."""

    lower: Vec
    upper: Vec

    def __post_init__(self) -> None:
        lower = as_vec(self.lower, "lower")
        upper = as_vec(self.upper, "upper", dimension=lower.shape[0])
        bad = np.flatnonzero(lower > upper)
        if bad.size:
            i = int(bad[0])
            raise ContractViolationError(
                f"Invalid box: lower[{i}]={lower[i]} > upper[{i}]={upper[i]}"
            )
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "dimension", lower.shape[0])

    def project(self, y: Vec) -> Vec:
        return project_box(self, y)

    def contains(self, y: Vec, tol: float = VERIFY_TOL) -> bool:
        y = as_vec(y, "y", dimension=self.dimension)
        return bool(
            np.all(y >= self.lower - tol) and np.all(y <= self.upper + tol)
        )

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        points = rng.uniform(
            self.lower, self.upper, size=(count, self.lower.shape[0])
        )
        if self.lower.shape[0] <= _MAX_CORNER_DIM:
            corners = np.array(
                list(itertools.product(*zip(self.lower, self.upper)))
            )
            points = np.vstack([points, corners])
        return points


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    """Closed Euclidean ball."""

    center: Vec
    radius: float

    def __post_init__(self) -> None:
        center = as_vec(self.center, "center")
        if not self.radius >= 0:
            raise ContractViolationError(
                f"Ball radius must be nonnegative, got {self.radius}"
            )
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "dimension", center.shape[0])

    def project(self, y: Vec) -> Vec:
        y = as_vec(y, "y", dimension=self.dimension)
        offset = y - self.center
        norm = float(np.linalg.norm(offset))
        if norm <= self.radius:
            return y
        return self.center + offset * (self.radius / norm)

    def contains(self, y: Vec, tol: float = VERIFY_TOL) -> bool:
        y = as_vec(y, "y", dimension=self.dimension)
        return bool(np.linalg.norm(y - self.center) <= self.radius + tol)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        n = self.center.shape[0]
        direction = rng.standard_normal((count, n))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        # uniform in volume
        scale = self.radius * rng.uniform(size=(count, 1)) ** (1.0 / n)
        boundary = self.center + self.radius * direction
        return np.vstack([self.center + scale * direction, boundary])


@dataclass(frozen=True, eq=False)
class Singleton(ConvexSet):
    """The one-point set ``{point}``."""

    point: Vec

    def __post_init__(self) -> None:
        point = as_vec(self.point, "point")
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "dimension", point.shape[0])

    def project(self, y: Vec) -> Vec:
        as_vec(y, "y", dimension=self.dimension)
        return self.point.copy()

    def contains(self, y: Vec, tol: float = VERIFY_TOL) -> bool:
        y = as_vec(y, "y", dimension=self.dimension)
        return bool(np.linalg.norm(y - self.point) <= tol)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return np.tile(self.point, (count, 1))


@dataclass(frozen=True, eq=False)
class WholeSpace(ConvexSet):
    """All of R^n. Projection is the identity; there is no sampler."""

    dimension: Optional[int] = None

    def project(self, y: Vec) -> Vec:
        return as_vec(y, "y", dimension=self.dimension)

    def contains(self, y: Vec, tol: float = VERIFY_TOL) -> bool:
        as_vec(y, "y", dimension=self.dimension)
        return True


@dataclass(frozen=True, eq=False)
class NegatedSet(ConvexSet):
    """The reflected set ``-C``; ``P_{-C}(y) = -P_C(-y)``."""

    inner: ConvexSet

    def __post_init__(self) -> None:
        object.__setattr__(self, "dimension", self.inner.dimension)

    def project(self, y: Vec) -> Vec:
        return -self.inner.project(-as_vec(y, "y"))

    def contains(self, y: Vec, tol: float = VERIFY_TOL) -> bool:
        return self.inner.contains(-as_vec(y, "y"), tol)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return -self.inner.sample(rng, count)


def project_box(box: BoxSpec, y: Vec) -> Vec:
    """
    Project onto a box by componentwise clamping.

    Args:
        box: Target box.
        y: Point to project.

    Returns:
        ``y`` clamped into ``[box.lower, box.upper]``.

    Raises:
        ContractViolationError: If dimensions differ.
    """
    y = as_vec(y, "y", dimension=box.lower.shape[0])
    return np.clip(y, box.lower, box.upper)


@dataclass(frozen=True)
class MovingSetSpec:
    """
    Translated set ``psi(x) = h(x) + Psi``.

    Attributes:
        base_projector: Projection onto the fixed set ``Psi``.
        shift: The translation ``h``.
        shift_lipschitz: Lipschitz constant ``l`` of ``h``.
        base_set: ``Psi`` itself, when available for verification.
    """

    base_projector: Callable[[Vec], Vec]
    shift: Callable[[Vec], Vec]
    shift_lipschitz: float
    base_set: Optional[ConvexSet] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not self.shift_lipschitz >= 0:
            raise ContractViolationError(
                "shift_lipschitz must be nonnegative, "
                f"got {self.shift_lipschitz}"
            )

    @classmethod
    def from_set(
        cls,
        base_set: ConvexSet,
        shift: Callable[[Vec], Vec],
        shift_lipschitz: float,
    ) -> "MovingSetSpec":
        """Build a moving set from a concrete base set."""
        return cls(base_set.project, shift, shift_lipschitz, base_set)


def project_moving(spec: MovingSetSpec, base_point: Vec, y: Vec) -> Vec:
    """
    Project onto the translated set at ``base_point``.

    Returns:
        ``h(base_point) + P_Psi(y - h(base_point))``.
    """
    base_point = as_vec(base_point, "base_point")
    y = as_vec(y, "y", dimension=base_point.shape[0])
    offset = as_vec(
        spec.shift(base_point), "shift", dimension=base_point.shape[0]
    )
    return offset + spec.base_projector(y - offset)


@dataclass(frozen=True, eq=False)
class _TranslatedSet(ConvexSet):
    base: ConvexSet
    offset: Vec

    def project(self, y: Vec) -> Vec:
        return self.offset + self.base.project(as_vec(y, "y") - self.offset)

    def contains(self, y: Vec, tol: float = VERIFY_TOL) -> bool:
        return self.base.contains(as_vec(y, "y") - self.offset, tol)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.offset + self.base.sample(rng, count)


@dataclass(frozen=True)
class ProjectorFamily:
    """
    The map ``(x, y) -> P_{psi(x)}(y)`` with its Lipschitz modulus rho.

    Attributes:
        project: Projection callable taking ``(base_point, target)``.
        rho: Constant in ``|P_{psi(r)}y - P_{psi(s)}y| <= rho |r - s|``.
        image: Optional map from a base point to the set ``psi(x)``,
            needed only for verification.
        name: Label used in logs and summaries.
    """

    project: Callable[[Vec, Vec], Vec]
    rho: float
    image: Optional[Callable[[Vec], ConvexSet]] = field(
        default=None, compare=False
    )
    name: str = "family"

    def __post_init__(self) -> None:
        if not self.rho >= 0:
            raise ContractViolationError(
                f"rho must be nonnegative, got {self.rho}"
            )

    def __call__(self, base_point: Vec, target: Vec) -> Vec:
        return self.project(base_point, target)

    def set_at(self, base_point: Vec) -> ConvexSet:
        """
        Return ``psi(base_point)`` as a concrete set.

        Raises:
            UnsupportedVerificationError: If the family has no image map.
        """
        if self.image is None:
            raise UnsupportedVerificationError(
                f"Projector family '{self.name}' exposes no set images"
            )
        return self.image(as_vec(base_point, "base_point"))


def constant_family(base_set: ConvexSet) -> ProjectorFamily:
    """Family with ``psi(x) = C`` for every x (rho = 0)."""
    return ProjectorFamily(
        project=lambda _x, y: base_set.project(y),
        rho=0.0,
        image=lambda _x: base_set,
        name=f"constant {type(base_set).__name__}",
    )


def whole_space_family() -> ProjectorFamily:
    """Family with ``psi(x) = R^n``; the projection is the identity."""
    return constant_family(WholeSpace())


def _spanned_bounds(x: Vec) -> tuple:
    return np.minimum(0.0, x), np.maximum(0.0, x)


def _project_spanned(x: Vec, y: Vec) -> Vec:
    lower, upper = _spanned_bounds(x)
    return np.clip(y, lower, upper)


def spanned_box_family() -> ProjectorFamily:
    """
    Family whose image at x is the box spanned by the origin and x.

    Coordinates of x may be negative, so the box is
    ``[min(0, x_i), max(0, x_i)]`` per coordinate. Clamping bounds move
    1-Lipschitz in x, hence rho = 1.
    """
    return ProjectorFamily(
        project=_project_spanned,
        rho=1.0,
        image=lambda x: BoxSpec(*_spanned_bounds(x)),
        name="spanned box",
    )


def moving_family(spec: MovingSetSpec) -> ProjectorFamily:
    """Family for ``psi(x) = h(x) + Psi``; rho equals the shift constant."""
    image = None
    if spec.base_set is not None:
        base = spec.base_set

        def image(x: Vec) -> ConvexSet:
            return _TranslatedSet(base, as_vec(spec.shift(x), "shift"))

    return ProjectorFamily(
        project=partial(project_moving, spec),
        rho=float(spec.shift_lipschitz),
        image=image,
        name="moving set",
    )


def negated_family(family: ProjectorFamily) -> ProjectorFamily:
    """Family for ``-psi(x)`` with the same rho."""
    inner_image = family.image
    image = None
    if inner_image is not None:

        def image(x: Vec) -> ConvexSet:
            return NegatedSet(inner_image(x))

    return ProjectorFamily(
        project=lambda x, y: -family.project(x, -np.asarray(y, dtype=float)),
        rho=family.rho,
        image=image,
        name=f"negated {family.name}",
    )


def verify_projection(
    projector: ConvexSet,
    y: Vec,
    sample_count: int,
    seed: int = 0,
    tol: float = VERIFY_TOL,
) -> bool:
    """
    Check the variational characterization of a projection.

    Tests ``<y - P(y), a - P(y)> <= tol`` for sampled points ``a`` of the
    set, which holds for every ``a`` exactly when ``P(y)`` is the metric
    projection.

    Args:
        projector: Set whose ``project`` is under test.
        y: Point to project.
        sample_count: Number of random points of the set to test.
        seed: Seed for the sampler.
        tol: Absolute slack on the inner product.

    Returns:
        True if no sampled point violates the inequality.

    Raises:
        ContractViolationError: If sample_count < 1.
        UnsupportedVerificationError: If the projector has no sampler.
    """
    if sample_count < 1:
        raise ContractViolationError(
            f"sample_count must be >= 1, got {sample_count}"
        )
    if not isinstance(projector, ConvexSet):
        raise UnsupportedVerificationError(
            f"Cannot verify {type(projector).__name__}: no set sampler"
        )
    y = as_vec(y, "y", dimension=projector.dimension)
    rng = np.random.default_rng(seed)
    points = projector.sample(rng, sample_count)
    p = projector.project(y)
    values = (points - p) @ (y - p)
    return bool(np.all(values <= tol))


def estimate_rho(
    family: ProjectorFamily,
    sample_count: int,
    seed: int = 0,
    dimension: int = 2,
    scale: float = 10.0,
) -> float:
    """
    Empirical lower bound on the family's Lipschitz modulus rho.

    Draws ``(y, r, s)`` uniformly from ``[-scale, scale]^dimension`` and
    returns the largest ``|P_{psi(r)}y - P_{psi(s)}y| / |r - s|``. This is
    a diagnostic only and never a certificate.

    Raises:
        ContractViolationError: If sample_count < 1.
        InsufficientSamplesError: If every sample had ``r == s``.
    """
    if sample_count < 1:
        raise ContractViolationError(
            f"sample_count must be >= 1, got {sample_count}"
        )
    rng = np.random.default_rng(seed)
    draws = rng.uniform(-scale, scale, size=(sample_count, 3, dimension))
    best = 0.0
    used = 0
    for y, r, s in draws:
        gap = float(np.linalg.norm(r - s))
        if gap == 0.0:
            continue
        used += 1
        moved = np.linalg.norm(family.project(r, y) - family.project(s, y))
        best = max(best, float(moved) / gap)
    if used == 0:
        raise InsufficientSamplesError(
            "All sampled base points coincided; cannot estimate rho"
        )
    return best
