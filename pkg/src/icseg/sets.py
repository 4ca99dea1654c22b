"""Feasible sets with exact metric projections and normal-cone tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .hilbert import Vector, as_vector, check_dims

DEFAULT_CONE_TOL = 1e-9


class NotInSetError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box ``{x : lower <= x <= upper}``."""

    lower: Vector
    upper: Vector

    def __post_init__(self):
        lo, hi = as_vector(self.lower), as_vector(self.upper)
        check_dims(lo, hi)
        if np.any(lo > hi):
            raise ValueError("box needs lower <= upper componentwise")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, dim: int, lo: float, hi: float) -> "Box":
        return cls(np.full(dim, float(lo)), np.full(dim, float(hi)))

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def project(self, p: Vector) -> Vector:
        return project_box(self, p)

    def contains(self, p: Vector, tol: float = 0.0) -> bool:
        check_dims(self.lower, p)
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.lower, self.upper, size=(size, self.dim))

    def in_normal_cone(self, point: Vector, direction: Vector,
                       tol: float = DEFAULT_CONE_TOL) -> bool:
        check_dims(self.lower, point, direction)
        if not self.contains(point, tol):
            raise NotInSetError("point is not in the box")
        at_hi = np.abs(point - self.upper) <= tol
        at_lo = np.abs(point - self.lower) <= tol
        # a degenerate coordinate (lower == upper) admits any sign
        ok = (at_hi & at_lo) | (at_hi & (direction >= -tol)) | (at_lo & (direction <= tol))
        ok |= np.abs(direction) <= tol
        return bool(np.all(ok))


@dataclass(frozen=True, eq=False)
class Ball:
    """Closed Euclidean ball of positive radius."""

    center: Vector
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", as_vector(self.center))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def project(self, p: Vector) -> Vector:
        return project_ball(self, p)

    def contains(self, p: Vector, tol: float = 0.0) -> bool:
        check_dims(self.center, p)
        return bool(np.linalg.norm(p - self.center) <= self.radius + tol)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        # uniform in volume: Gaussian direction, radius ~ U^(1/d)
        d = rng.standard_normal((size, self.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = self.radius * rng.uniform(size=(size, 1)) ** (1.0 / self.dim)
        return self.center + r * d

    def sample_boundary(self, rng: np.random.Generator, size: int) -> np.ndarray:
        d = rng.standard_normal((size, self.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return self.center + self.radius * d

    def in_normal_cone(self, point: Vector, direction: Vector,
                       tol: float = DEFAULT_CONE_TOL) -> bool:
        check_dims(self.center, point, direction)
        if not self.contains(point, tol):
            raise NotInSetError("point is not in the ball")
        off = point - self.center
        dist = np.linalg.norm(off)
        if dist < self.radius - tol:
            return bool(np.linalg.norm(direction) <= tol)
        # boundary: direction must be a nonnegative multiple of the outward normal
        u = off / dist
        along = float(direction @ u)
        return bool(along >= -tol and np.linalg.norm(direction - along * u) <= tol)


@dataclass(frozen=True, eq=False)
class Halfspace:
    """``{x : <normal, x - anchor> <= 0}``; a zero normal is the whole space."""

    normal: Vector
    anchor: Vector

    def __post_init__(self):
        a, z = as_vector(self.normal), as_vector(self.anchor)
        check_dims(a, z)
        object.__setattr__(self, "normal", a)
        object.__setattr__(self, "anchor", z)

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    @property
    def is_whole_space(self) -> bool:
        return not np.any(self.normal)

    def slack(self, p: Vector) -> float:
        """Signed value ``<normal, p - anchor>``; feasible iff <= 0."""
        return float(self.normal @ (p - self.anchor))

    def project(self, p: Vector) -> Vector:
        return project_halfspace(self, p)

    def contains(self, p: Vector, tol: float = 0.0) -> bool:
        check_dims(self.normal, p)
        return self.slack(p) <= tol

    def in_normal_cone(self, point: Vector, direction: Vector,
                       tol: float = DEFAULT_CONE_TOL) -> bool:
        check_dims(self.normal, point, direction)
        if not self.contains(point, tol):
            raise NotInSetError("point is not in the halfspace")
        if self.is_whole_space or self.slack(point) < -tol:
            return bool(np.linalg.norm(direction) <= tol)
        a = self.normal / np.linalg.norm(self.normal)
        along = float(direction @ a)
        return bool(along >= -tol and np.linalg.norm(direction - along * a) <= tol)


FeasibleSet = Union[Box, Ball, Halfspace]


def project_box(b: Box, p: Vector) -> Vector:
    check_dims(b.lower, p)
    return np.minimum(np.maximum(p, b.lower), b.upper)


def project_ball(b: Ball, p: Vector) -> Vector:
    check_dims(b.center, p)
    off = p - b.center
    dist = np.linalg.norm(off)
    if dist <= b.radius:
        return np.array(p, dtype=float)
    return b.center + (b.radius / dist) * off


def project_halfspace(h: Halfspace, p: Vector) -> Vector:
    check_dims(h.normal, p)
    s = h.slack(p)
    if s <= 0.0 or h.is_whole_space:
        return np.array(p, dtype=float)
    return p - (s / float(h.normal @ h.normal)) * h.normal


def project(s: FeasibleSet, p: Vector) -> Vector:
    return s.project(p)


def in_normal_cone(s: FeasibleSet, point: Vector, direction: Vector,
                   tol: float = DEFAULT_CONE_TOL) -> bool:
    return s.in_normal_cone(point, direction, tol)
