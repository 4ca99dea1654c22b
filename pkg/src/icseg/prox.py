"""Proximal subproblems ``argmin_{z in S} lam * f(anchor_f, z) + 1/2 ||anchor_q - z||^2``.

Both bifunction families are convex quadratic (or affine) in ``z``, so the
subproblems are solved by structure-specific routines instead of a generic
NLP solver:

* affine in ``z``: closed form, a projection of a gradient step;
* quadratic over a box: accelerated projected gradient with restart;
* quadratic over a halfspace: one or two CG solves plus one multiplier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bifunctions import Bifunction, LinearOpBifunction, QuadraticBifunction
from .hilbert import Vector, check_dims
from .linalg import ConvergenceError, conjugate_gradient
from .sets import Box, FeasibleSet, Halfspace, project_box

DEFAULT_INNER_TOL = 1e-10
DEFAULT_INNER_MAX_ITER = 100_000


class InnerSolverError(ConvergenceError):
    pass


@dataclass(frozen=True)
class ProxRequest:
    f: Bifunction
    anchor_f: Vector
    anchor_q: Vector
    lam: float
    set: FeasibleSet

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"prox parameter must be positive, got {self.lam}")
        check_dims(self.anchor_f, self.anchor_q)
        if self.anchor_f.shape[0] != self.f.dim or self.set.dim != self.f.dim:
            raise ValueError("request dimensions are inconsistent")

    def objective(self, z: Vector) -> float:
        d = self.anchor_q - z
        return self.lam * self.f.evaluate(self.anchor_f, z) + 0.5 * float(d @ d)

    def gradient(self, z: Vector) -> Vector:
        return self.lam * self.f.grad2(self.anchor_f, z) + z - self.anchor_q


@dataclass
class InnerSolveReport:
    solution: Vector
    iterations: int
    kkt_residual: float
    history: list[float] | None = field(default=None, repr=False)


def prox_linear(req: ProxRequest) -> Vector:
    """Closed form for ``f`` affine in its second argument."""
    g0 = req.f.grad2(req.anchor_f, req.anchor_f)
    return req.set.project(req.anchor_q - req.lam * g0)


def prox_quadratic_box(req: ProxRequest, tol: float = DEFAULT_INNER_TOL,
                       max_iter: int = DEFAULT_INNER_MAX_ITER,
                       record_history: bool = False) -> InnerSolveReport:
    """Box-constrained strongly convex QP by FISTA with monotone restart.

    The objective is ``lam * (<c, z> + z^T Q z) + 1/2 ||z - anchor_q||^2``
    with ``c = P anchor_f + r - Q anchor_f``; its Hessian ``2 lam Q + I`` has
    norm ``L = 2 lam ||Q|| + 1``, which fixes the step ``1/L``. Whenever the
    accelerated candidate would raise the objective, the momentum is reset
    and a plain projected-gradient step is taken instead, so the objective
    never increases.
    """
    f, box = req.f, req.set
    if not isinstance(f, QuadraticBifunction) or not isinstance(box, Box):
        raise TypeError("prox_quadratic_box needs a QuadraticBifunction and a Box")
    lam, Q = req.lam, f.Q
    c = f.linear_term(req.anchor_f)
    q = req.anchor_q
    step = 1.0 / (2.0 * lam * f.q_norm + 1.0)

    def grad(z):
        return lam * (c + 2.0 * (Q @ z)) + z - q

    def obj(z):
        d = z - q
        return lam * (c @ z + z @ (Q @ z)) + 0.5 * (d @ d)

    x = project_box(box, q)
    fx = obj(x)
    yk, t = x, 1.0
    history = [fx] if record_history else None
    for k in range(1, max_iter + 1):
        cand = project_box(box, yk - step * grad(yk))
        fc = obj(cand)
        if fc > fx:
            cand = project_box(box, x - step * grad(x))
            fc = obj(cand)
            t_next = 1.0
            yk = cand
        else:
            t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
            yk = cand + ((t - 1.0) / t_next) * (cand - x)
        x, fx, t = cand, min(fc, fx), t_next
        if record_history:
            history.append(fx)
        res = float(np.linalg.norm(x - project_box(box, x - grad(x))))
        if res <= tol:
            return InnerSolveReport(x, k, res, history)
    raise InnerSolverError(
        f"box QP did not reach residual {tol:g} in {max_iter} iterations "
        f"(residual {res:.3e})", estimate=x, residual=res)


def prox_quadratic_halfspace(req: ProxRequest, tol: float = DEFAULT_INNER_TOL) -> InnerSolveReport:
    """Halfspace-constrained QP through its KKT system.

    With ``H = 2 lam Q + I`` the unconstrained minimizer solves
    ``H z = anchor_q - lam c``. If it violates ``<a, z - anchor> <= 0``
    the single multiplier is ``nu = <a, z - anchor> / <a, H^{-1} a>`` and
    the solution is ``z - nu H^{-1} a``.
    """
    f, hs = req.f, req.set
    if not isinstance(f, QuadraticBifunction) or not isinstance(hs, Halfspace):
        raise TypeError("prox_quadratic_halfspace needs a QuadraticBifunction and a Halfspace")
    lam, Q = req.lam, f.Q

    def H(v):
        return 2.0 * lam * (Q @ v) + v

    rhs = req.anchor_q - lam * f.linear_term(req.anchor_f)
    try:
        z, its = conjugate_gradient(H, rhs, tol=tol)
        nu = 0.0
        s = hs.slack(z)
        if s > 0.0 and not hs.is_whole_space:
            Ha, its2 = conjugate_gradient(H, hs.normal, tol=tol)
            its += its2
            nu = s / float(hs.normal @ Ha)
            z = z - nu * Ha
    except ConvergenceError as exc:
        raise InnerSolverError(f"halfspace prox: {exc}", exc.estimate, exc.residual) from exc
    stat = req.gradient(z) + nu * hs.normal
    res = max(float(np.linalg.norm(stat)), max(hs.slack(z), 0.0))
    return InnerSolveReport(z, its, res)


def solve_prox(req: ProxRequest, tol: float = DEFAULT_INNER_TOL,
               max_iter: int = DEFAULT_INNER_MAX_ITER) -> InnerSolveReport:
    """Pick the inner solver matching the bifunction family and set kind."""
    if isinstance(req.f, LinearOpBifunction):
        return InnerSolveReport(prox_linear(req), 0, 0.0)
    if isinstance(req.f, QuadraticBifunction):
        if isinstance(req.set, Box):
            return prox_quadratic_box(req, tol, max_iter)
        if isinstance(req.set, Halfspace):
            return prox_quadratic_halfspace(req, tol)
    raise TypeError(f"no prox solver for {type(req.f).__name__} over {type(req.set).__name__}")


def prox_certificate(req: ProxRequest, p: Vector, tol: float = 1e-6) -> bool:
    """Optimality test: ``anchor_q - lam * grad2(anchor_f, p) - p`` lies in N_S(p)."""
    b = req.anchor_q - req.lam * req.f.grad2(req.anchor_f, p) - p
    return req.set.in_normal_cone(p, b, tol)
