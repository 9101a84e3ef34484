"""Discrete ambient spaces and their weighted inner products.

Two backends share one tiny protocol: ``.x`` (sample coordinates), ``.dim``
(number of degrees of freedom) and ``.weight`` (quadrature weight carried by
every inner product).  A ``Grid`` models functions on an interval with
homogeneous walls; an ``IndexSpace`` is the coordinate space of a synthetic
operator, where the weight is 1 and "coordinates" are just indices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidSpecError


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-half_width, half_width] with Dirichlet walls.

    The stored points are the interior nodes; wall values are identically
    zero and never represented.  The spacing is h = 2X/(n_points - 1), and
    every inner product carries the weight h so that <u, v> approximates
    the integral of u*v over the interval.
    """

    half_width: float
    n_points: int

    def __post_init__(self) -> None:
        if self.n_points < 3:
            raise InvalidSpecError(f"n_points must be >= 3, got {self.n_points}")
        if not (np.isfinite(self.half_width) and self.half_width > 0):
            raise InvalidSpecError(f"half_width must be positive, got {self.half_width}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    @property
    def weight(self) -> float:
        return self.spacing

    @property
    def dim(self) -> int:
        return self.n_points - 2

    @cached_property
    def x(self) -> np.ndarray:
        pts = np.linspace(-self.half_width, self.half_width, self.n_points)[1:-1]
        pts.setflags(write=False)
        return pts

    def doubled(self) -> "Grid":
        """Grid with twice the point count on the same interval."""
        return Grid(self.half_width, 2 * self.n_points)


@dataclass(frozen=True)
class IndexSpace:
    """Coordinate space of a synthetic operator; weight 1, x = indices."""

    dim: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InvalidSpecError(f"dim must be >= 1, got {self.dim}")

    @property
    def weight(self) -> float:
        return 1.0

    @cached_property
    def x(self) -> np.ndarray:
        pts = np.arange(self.dim, dtype=float)
        pts.setflags(write=False)
        return pts


Space = Grid | IndexSpace


def inner(space: Space, u: np.ndarray, v: np.ndarray) -> float:
    """Weighted inner product <u, v>."""
    return space.weight * float(np.dot(u, v))


def norm(space: Space, u: np.ndarray) -> float:
    """Weighted 2-norm ||u||."""
    return float(np.sqrt(space.weight) * np.linalg.norm(u))


def one_norm(space: Space, u: np.ndarray) -> float:
    """Weighted 1-norm, approximating the integral of |u|."""
    return space.weight * float(np.abs(u).sum())


def sup_norm(u: np.ndarray) -> float:
    """Max norm; quadrature-weight free."""
    return float(np.abs(u).max()) if u.size else 0.0
