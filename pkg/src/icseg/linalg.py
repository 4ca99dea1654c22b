"""Power iteration and conjugate gradient on dense or matrix-free operators."""

from __future__ import annotations

from typing import Callable, Union

import numpy as np

Operator = Union[np.ndarray, Callable[[np.ndarray], np.ndarray]]


class ConvergenceError(RuntimeError):
    """An iterative routine stopped before meeting its tolerance.

    ``estimate`` holds the last iterate (or scalar estimate) and
    ``residual`` the last convergence measure.
    """

    def __init__(self, message, estimate=None, residual=None):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual


def as_apply(op: Operator) -> Callable[[np.ndarray], np.ndarray]:
    if callable(op) and not hasattr(op, "shape"):
        return op
    return lambda x: op @ x


def spectral_norm(op: Operator, dim: int | None = None, adjoint: Operator | None = None,
                  tol: float = 1e-8, max_iter: int = 10_000, seed: int = 0) -> float:
    """Largest singular value of ``op`` by power iteration on ``op^T op``.

    ``op`` may be an array (anything supporting ``@`` and ``.T``) or a
    callable; a callable needs ``dim`` and, unless it is symmetric, an
    ``adjoint``. Iteration stops once the relative change of the estimate
    drops below ``tol``.
    """
    if hasattr(op, "shape"):
        dim = op.shape[1]
        fwd = as_apply(op)
        adj = as_apply(op.T)
    else:
        if dim is None:
            raise ValueError("dim is required for a matrix-free operator")
        fwd = op
        adj = fwd if adjoint is None else as_apply(adjoint)

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max_iter):
        y = adj(fwd(x))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            # x landed in the null space; a zero operator has norm 0
            if not np.any(fwd(rng.standard_normal(dim))):
                return 0.0
            x = rng.standard_normal(dim)
            x /= np.linalg.norm(x)
            continue
        new = float(np.sqrt(x @ y))
        x = y / ny
        if abs(new - est) <= tol * new:
            return new
        est = new
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(last estimate {est:.10g})", estimate=est)


def conjugate_gradient(op: Operator, b: np.ndarray, tol: float = 1e-10,
                       max_iter: int | None = None, x0: np.ndarray | None = None,
                       stall_window: int = 50) -> tuple[np.ndarray, int]:
    """Solve ``op x = b`` for symmetric positive definite ``op``.

    Stops when ``||b - op x|| <= tol * ||b||``. Raises ConvergenceError when
    the best residual has not improved for ``stall_window`` iterations.
    Returns the solution and the number of iterations used.
    """
    apply = as_apply(op)
    n = b.shape[0]
    if max_iter is None:
        max_iter = 10 * n + 100
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    r = b - apply(x) if x0 is not None else b.copy()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0
    target = tol * bnorm
    p = r.copy()
    rr = r @ r
    best, since_best = np.sqrt(rr), 0
    for k in range(max_iter):
        if np.sqrt(rr) <= target:
            return x, k
        Ap = apply(p)
        pAp = p @ Ap
        if pAp <= 0.0:
            raise ConvergenceError("operator is not positive definite", x, np.sqrt(rr))
        step = rr / pAp
        x = x + step * p
        r = r - step * Ap
        rr_new = r @ r
        p = r + (rr_new / rr) * p
        rr = rr_new
        res = np.sqrt(rr)
        if res < best:
            best, since_best = res, 0
        else:
            since_best += 1
            if since_best >= stall_window:
                raise ConvergenceError(
                    f"CG stagnated at relative residual {res / bnorm:.3e}", x, res / bnorm)
    if np.sqrt(rr) <= target:
        return x, max_iter
    raise ConvergenceError(f"CG hit max_iter={max_iter}", x, np.sqrt(rr) / bnorm)
