"""Bifunctions ``f(x, y)`` for equilibrium problems.

An equilibrium problem over a closed convex set ``C`` asks for ``x*`` in
``C`` with ``f(x*, y) >= 0`` for every ``y`` in ``C``. Solvers only need
three things from ``f``: its value, one subgradient in the second argument,
and optionally the constants ``(k1, k2)`` of the Lipschitz-type bound

    f(s, z) - f(s, w) - f(w, z) <= k1 ||s - w||^2 + k2 ||w - z||^2.
"""

from __future__ import annotations

from functools import cached_property
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .hilbert import Vector, as_vector, check_dims
from .linalg import spectral_norm


class Bifunction:
    """Base class; subclasses implement :meth:`evaluate` and :meth:`grad2`."""

    dim: int
    lipschitz: Optional[tuple[float, float]] = None

    def evaluate(self, x: Vector, y: Vector) -> float:
        raise NotImplementedError

    def grad2(self, x: Vector, y: Vector) -> Vector:
        """An element of the subdifferential of ``f(x, .)`` at ``y``."""
        raise NotImplementedError

    def __call__(self, x: Vector, y: Vector) -> float:
        return self.evaluate(x, y)


class LinearOpBifunction(Bifunction):
    """``f(x, y) = <A(x) + offset, y - x>``.

    ``op`` is a dense array, a scipy sparse matrix, or a callable. The
    callable form may be nonlinear in ``x``; ``f(x, .)`` stays affine in
    ``y`` either way, so its gradient in ``y`` is ``A(x) + offset``.
    """

    def __init__(self, op, dim: int | None = None, offset: Vector | None = None,
                 lipschitz: tuple[float, float] | None = None):
        if hasattr(op, "shape"):
            if op.shape[0] != op.shape[1]:
                raise ValueError(f"operator must be square, got {op.shape}")
            if dim is not None and dim != op.shape[0]:
                raise ValueError(f"dim={dim} does not match operator shape {op.shape}")
            dim = op.shape[0]
            self._apply: Callable[[Vector], Vector] = lambda x: op @ x
        elif callable(op):
            if dim is None:
                raise ValueError("dim is required for a callable operator")
            self._apply = op
        else:
            raise TypeError(f"unsupported operator type {type(op).__name__}")
        self.op = op
        self.dim = int(dim)
        self.offset = None if offset is None else as_vector(offset)
        if self.offset is not None and self.offset.shape[0] != self.dim:
            raise ValueError("offset has the wrong dimension")
        self.lipschitz = lipschitz

    @property
    def matrix(self):
        """The operator as a matrix, or ``None`` for the callable form."""
        return self.op if hasattr(self.op, "shape") else None

    def apply(self, x: Vector) -> Vector:
        out = np.asarray(self._apply(x), dtype=float)
        return out if self.offset is None else out + self.offset

    def evaluate(self, x: Vector, y: Vector) -> float:
        check_dims(x, y)
        if x.shape[0] != self.dim:
            raise ValueError(f"expected dimension {self.dim}, got {x.shape[0]}")
        return float(self.apply(x) @ (y - x))

    def grad2(self, x: Vector, y: Vector) -> Vector:
        check_dims(x, y)
        if x.shape[0] != self.dim:
            raise ValueError(f"expected dimension {self.dim}, got {x.shape[0]}")
        return self.apply(x)


class QuadraticBifunction(Bifunction):
    """``f(x, y) = <P x + Q y + r, y - x>`` with ``P``, ``Q`` symmetric PSD.

    ``P - Q`` must be positive semidefinite, which makes ``f`` monotone.
    """

    def __init__(self, P, Q, r, check: bool = True):
        P = np.array(P, dtype=float)
        Q = np.array(Q, dtype=float)
        r = as_vector(r)
        m = r.shape[0]
        if P.shape != (m, m) or Q.shape != (m, m):
            raise ValueError(f"P {P.shape} and Q {Q.shape} must both be {m}x{m}")
        if check:
            for name, M in (("P", P), ("Q", Q)):
                if np.max(np.abs(M - M.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(M))):
                    raise ValueError(f"{name} is not symmetric")
            lo = float(np.linalg.eigvalsh(P - Q)[0])
            if lo < -1e-8:
                raise ValueError(f"P - Q is not PSD (smallest eigenvalue {lo:.3e})")
        P.setflags(write=False)
        Q.setflags(write=False)
        self.P, self.Q, self.r = P, Q, r
        self.dim = m

    def evaluate(self, x: Vector, y: Vector) -> float:
        check_dims(x, y, self.r)
        return float((self.P @ x + self.Q @ y + self.r) @ (y - x))

    def grad2(self, x: Vector, y: Vector) -> Vector:
        check_dims(x, y, self.r)
        return self.P @ x + self.r + 2.0 * (self.Q @ y) - self.Q @ x

    def linear_term(self, x: Vector) -> Vector:
        """``P x + r - Q x``: the part of ``grad2(x, .)`` that does not depend on y."""
        return self.P @ x + self.r - self.Q @ x

    @cached_property
    def q_norm(self) -> float:
        """Spectral norm of ``Q``, computed once."""
        return spectral_norm(self.Q)

    @cached_property
    def lipschitz(self) -> tuple[float, float]:
        return lipschitz_constants(self)


def lipschitz_constants(f: QuadraticBifunction) -> tuple[float, float]:
    """``k1 = k2 = ||P - Q||_2 / 2`` for the quadratic family."""
    k = 0.5 * spectral_norm(f.P - f.Q)
    return k, k


def check_lipschitz_type(f: Bifunction, k1: float, k2: float, samples: int,
                         sampler, rng: np.random.Generator | None = None,
                         tol: float = 1e-8) -> bool:
    """Test the Lipschitz-type inequality on random triples.

    ``sampler(rng, n)`` must return ``n`` feasible points as rows, e.g.
    ``C.sample``. The tolerance is scaled by the magnitude of the three
    bifunction values so that large-valued problems are not failed on
    rounding alone.
    """
    if k1 < 0 or k2 < 0:
        raise ValueError("Lipschitz-type constants must be nonnegative")
    rng = np.random.default_rng(0) if rng is None else rng
    pts = sampler(rng, 3 * samples)
    for s, w, z in zip(pts[0::3], pts[1::3], pts[2::3]):
        a, b, c = f.evaluate(s, z), f.evaluate(s, w), f.evaluate(w, z)
        lhs = a - b - c
        rhs = k1 * float((s - w) @ (s - w)) + k2 * float((w - z) @ (w - z))
        if lhs > rhs + tol * max(1.0, abs(a) + abs(b) + abs(c)):
            return False
    return True


def zero_bifunction(dim: int) -> LinearOpBifunction:
    """``f = 0``; every feasible point solves the equilibrium problem."""
    return LinearOpBifunction(sp.csr_matrix((dim, dim)), lipschitz=(0.0, 0.0))
