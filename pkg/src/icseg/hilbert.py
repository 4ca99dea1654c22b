"""Dense real vectors with the Euclidean inner product.

Vectors are plain 1-D float64 numpy arrays. :func:`as_vector` produces a
read-only copy so an iterate can be shared without being mutated later.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

Vector = NDArray[np.float64]


class DimensionError(ValueError):
    """Raised when two vectors (or a vector and a set) disagree in length."""


def as_vector(x: ArrayLike, *, copy: bool = True) -> Vector:
    """Convert ``x`` to a finite, read-only 1-D float64 vector."""
    v = np.array(x, dtype=np.float64, copy=copy, ndmin=1)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if v.size == 0:
        raise ValueError("vector must have positive dimension")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    v.setflags(write=False)
    return v


def check_dims(*vectors: NDArray) -> int:
    dims = {v.shape[0] for v in vectors}
    if len(dims) != 1:
        raise DimensionError(f"dimension mismatch: {sorted(dims)}")
    return dims.pop()


def inner(a: Vector, b: Vector) -> float:
    check_dims(a, b)
    return float(np.dot(a, b))


def norm(a: Vector) -> float:
    return float(np.sqrt(np.dot(a, a)))


def axpy_combine(coeffs: Sequence[float], vectors: Sequence[Vector]) -> Vector:
    """Return ``sum(c * v for c, v in zip(coeffs, vectors))``.

    The sum is accumulated left to right, so the rounding pattern is fixed
    by the order of the arguments.
    """
    if len(coeffs) != len(vectors):
        raise ValueError(f"{len(coeffs)} coefficients for {len(vectors)} vectors")
    if not vectors:
        raise ValueError("need at least one vector")
    check_dims(*vectors)
    out = coeffs[0] * vectors[0]
    for c, v in zip(coeffs[1:], vectors[1:]):
        out = out + c * v
    return out
