"""Inertial subgradient extragradient method with two correction terms.

One iteration, given ``y_n, y_{n-1}, w_{n-1}, w_{n-2}`` and stepsize ``lam_n``:

1. ``w_n = y_n + a (y_n - y_{n-1}) + d (1 + a)(w_{n-1} - y_n) - a d (w_{n-2} - y_{n-1})``
   and ``z_n = prox over C of lam_n f(w_n, .)`` anchored at ``w_n``.
   If ``z_n == w_n`` then ``z_n`` solves the problem.
2. With ``v_n = grad2 f(w_n, z_n)`` build the halfspace
   ``T_n = {x : <w_n - lam_n v_n - z_n, x - z_n> <= 0}`` (it contains C)
   and take ``y_{n+1} = prox over T_n of lam_n f(z_n, .)`` anchored at ``w_n``.
3. Shrink the stepsize when the Lipschitz-type gap is positive.

With ``a = d = 0`` this is the plain subgradient extragradient method.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .bifunctions import Bifunction
from .hilbert import Vector, as_vector, axpy_combine, check_dims, norm
from .prox import DEFAULT_INNER_MAX_ITER, DEFAULT_INNER_TOL, ProxRequest, solve_prox
from .sets import FeasibleSet, Halfspace

CONVERGED = "converged"
MAX_ITER = "max_iter"
EXACT = "exact_solution"


class ParameterError(ValueError):
    """Solver parameters outside the admissible region.

    ``lower_bound`` carries the computed lower bound for delta when the
    violation concerns delta.
    """

    def __init__(self, message: str, lower_bound: float | None = None):
        super().__init__(message)
        self.lower_bound = lower_bound


@dataclass(frozen=True)
class SolverParams:
    alpha: float = 0.1
    delta: float = 0.9
    mu: float = 1e-5
    lambda0: float = 0.1
    max_iter: int = 5001
    eps_stop: float = 1e-6
    eps_exact: Optional[float] = None

    @property
    def exact_tol(self) -> float:
        """Tolerance for ``z_n == w_n``; ``eps_stop`` by default, exact equality if that is infinite."""
        if self.eps_exact is not None:
            return self.eps_exact
        return self.eps_stop if math.isfinite(self.eps_stop) else 0.0


def _radicand(alpha: float) -> float:
    return alpha**4 - 8 * alpha**3 - 8 * alpha**2 + 4


def delta_lower_bound(alpha: float) -> float:
    """Lower bound on delta for inertial weight ``0 < alpha <= 1/2``.

    Returns ``max(2a/(1+a), ((a^2+2) - sqrt(a^4-8a^3-8a^2+4)) / (2a))``.
    The second branch is evaluated in the cancellation-free form
    ``(6a + 4a^2) / ((a^2+2) + sqrt(...))``, which is algebraically equal
    and tends to 0 as ``a -> 0``.
    """
    if not 0.0 < alpha <= 0.5:
        raise ParameterError(f"delta_lower_bound needs 0 < alpha <= 1/2, got {alpha}")
    disc = _radicand(alpha)
    if disc < 0:
        raise ParameterError(f"radicand a^4-8a^3-8a^2+4 = {disc:.6g} is negative")
    second = (6 * alpha + 4 * alpha**2) / ((alpha**2 + 2) + math.sqrt(disc))
    return max(2 * alpha / (1 + alpha), second)


def admissible_delta_interval(alpha: float) -> tuple[float, float] | None:
    """Open interval of admissible delta for ``alpha``, or None when empty."""
    if alpha == 0.0:
        return (0.0, 1.0)
    if not 0.0 < alpha <= 0.5:
        return None
    lo = delta_lower_bound(alpha)
    return (lo, 1.0) if lo < 1.0 else None


def validate_params(p: SolverParams, allow_plain: bool = False) -> SolverParams:
    """Check ``p`` against the admissible parameter region.

    ``allow_plain`` additionally admits ``alpha == delta == 0`` (the plain
    subgradient extragradient method), which lies outside the region.
    """
    a, d = p.alpha, p.delta
    if not p.mu > 0 or not p.mu < 1:
        raise ParameterError(f"mu must lie in (0, 1), got {p.mu}")
    if not p.lambda0 > 0 or not math.isfinite(p.lambda0):
        raise ParameterError(f"lambda0 must be positive, got {p.lambda0}")
    if int(p.max_iter) != p.max_iter or p.max_iter < 1:
        raise ParameterError(f"max_iter must be a positive integer, got {p.max_iter}")
    if not p.eps_stop > 0:
        raise ParameterError(f"eps_stop must be positive, got {p.eps_stop}")
    if allow_plain and a == 0.0 and d == 0.0:
        return p
    if not 0.0 <= a < 1.0:
        raise ParameterError(f"alpha must lie in [0, 1), got {a}")
    if a > 0.5:
        raise ParameterError(f"alpha must be at most 1/2, got {a}")
    if not 0.0 < d < 1.0:
        raise ParameterError(f"delta must lie in (0, 1), got {d}", 0.0 if a == 0 else None)
    if a > 0.0:
        lo = delta_lower_bound(a)
        if not d > lo:
            raise ParameterError(
                f"delta = {d} must exceed max(2a/(1+a), ((a^2+2)-sqrt(a^4-8a^3-8a^2+4))/(2a)) "
                f"= {lo:.10g} for alpha = {a}", lo)
    return p


# --- single steps -------------------------------------------------------

@dataclass
class IterState:
    y_prev: Vector
    y_cur: Vector
    w_prev: Vector
    w_prev2: Vector
    lam: float
    n: int = 0


def extrapolate(s: IterState, alpha: float, delta: float) -> Vector:
    """Inertial point ``w_n`` from the two previous ``y`` and ``w`` iterates."""
    return axpy_combine(
        [1.0, alpha, -alpha, delta * (1 + alpha), -delta * (1 + alpha), -alpha * delta, alpha * delta],
        [s.y_cur, s.y_cur, s.y_prev, s.w_prev, s.y_cur, s.w_prev2, s.y_prev],
    )


def stepsize_update(lam: float, mu: float, w: Vector, z: Vector, y_next: Vector,
                    f: Bifunction) -> float:
    gap = f.evaluate(w, y_next) - f.evaluate(w, z) - f.evaluate(z, y_next)
    if gap > 0:
        dw, dy = w - z, y_next - z
        cand = 0.5 * mu * (float(dw @ dw) + float(dy @ dy)) / gap
        return min(cand, lam)
    return lam


# --- trajectories ---------------------------------------------------------

@dataclass(frozen=True)
class IterRecord:
    n: int
    E: float            # ||y_{n+1} - y_n||
    lam: float          # stepsize used in iteration n
    residual: float     # ||w_n - z_n||; zero exactly at a solution
    elapsed: float      # seconds since the start of the run
    dw: float = math.nan  # ||w_n - w_{n-1}||
    dz: float = math.nan  # ||z_n - z_{n-1}||


@dataclass
class Trajectory:
    records: list[IterRecord] = field(default_factory=list)
    terminal: str = MAX_ITER
    final_lambda: float = math.nan

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def residuals(self) -> np.ndarray:
        return np.array([r.E for r in self.records])

    @property
    def stepsizes(self) -> np.ndarray:
        return np.array([r.lam for r in self.records])

    @property
    def final_E(self) -> float:
        return self.records[-1].E if self.records else 0.0


@dataclass(frozen=True)
class IterInfo:
    """Everything one iteration produced; handed to the ``callback`` of :func:`solve`."""

    n: int
    w: Vector
    z: Vector
    y_next: Vector
    lam: float
    lam_next: float
    halfspace: Halfspace


def _prox(f, anchor_f, anchor_q, lam, S, tol, max_iter):
    return solve_prox(ProxRequest(f, anchor_f, anchor_q, lam, S), tol, max_iter).solution


def solve(f: Bifunction, C: FeasibleSet, p: SolverParams, y0, y_m1, w_m1, w_m2, *,
          inner_tol: float = DEFAULT_INNER_TOL, inner_max_iter: int = DEFAULT_INNER_MAX_ITER,
          callback: Callable[[IterInfo], None] | None = None) -> tuple[Vector, Trajectory]:
    """Run the method from seeds ``y_0, y_{-1}, w_{-1}, w_{-2}``.

    Stops when ``||y_{n+1} - y_n|| <= eps_stop``, when ``||z_n - w_n|| <=
    eps_exact`` (then ``z_n`` is returned), or after ``max_iter``
    iterations. Returns the last iterate and the trajectory.
    """
    validate_params(p, allow_plain=True)
    seeds = [as_vector(v) for v in (y0, y_m1, w_m1, w_m2)]
    check_dims(*seeds)
    if seeds[0].shape[0] != f.dim or C.dim != f.dim:
        raise ValueError("seed, set and bifunction dimensions disagree")
    state = IterState(y_prev=seeds[1], y_cur=seeds[0], w_prev=seeds[2], w_prev2=seeds[3],
                      lam=float(p.lambda0))
    traj = Trajectory()
    z_prev = None
    t0 = time.perf_counter()
    for n in range(int(p.max_iter)):
        state.n = n
        lam = state.lam
        w = extrapolate(state, p.alpha, p.delta)
        z = _prox(f, w, w, lam, C, inner_tol, inner_max_iter)
        res = norm(z - w)
        if res <= p.exact_tol:
            traj.terminal = EXACT
            traj.final_lambda = lam
            return z, traj
        v = f.grad2(w, z)
        T = Halfspace(w - lam * v - z, z)
        y_next = _prox(f, z, w, lam, T, inner_tol, inner_max_iter)
        lam_next = stepsize_update(lam, p.mu, w, z, y_next, f)
        E = norm(y_next - state.y_cur)
        traj.records.append(IterRecord(
            n=n, E=E, lam=lam, residual=res, elapsed=time.perf_counter() - t0,
            dw=norm(w - state.w_prev) if n > 0 else math.nan,
            dz=norm(z - z_prev) if z_prev is not None else math.nan))
        if callback is not None:
            callback(IterInfo(n, w, z, y_next, lam, lam_next, T))
        state.y_prev, state.y_cur = state.y_cur, y_next
        state.w_prev2, state.w_prev = state.w_prev, w
        state.lam = lam_next
        z_prev = z
        if E <= p.eps_stop:
            traj.terminal = CONVERGED
            break
    traj.final_lambda = state.lam
    return state.y_cur, traj


def solve_egm(f: Bifunction, C: FeasibleSet, lam: float, x0, max_iter: int = 5001,
              eps_stop: float = 1e-6, *, inner_tol: float = DEFAULT_INNER_TOL,
              inner_max_iter: int = DEFAULT_INNER_MAX_ITER) -> tuple[Vector, Trajectory]:
    """Extragradient method: two prox steps over C per iteration, fixed ``lam``."""
    if not lam > 0:
        raise ValueError(f"stepsize must be positive, got {lam}")
    x = as_vector(x0)
    if not C.contains(x, 1e-12):
        raise ValueError("x0 must lie in C")
    traj = Trajectory(final_lambda=float(lam))
    t0 = time.perf_counter()
    for n in range(int(max_iter)):
        y = _prox(f, x, x, lam, C, inner_tol, inner_max_iter)
        x_next = _prox(f, y, x, lam, C, inner_tol, inner_max_iter)
        E = norm(x_next - x)
        traj.records.append(IterRecord(n=n, E=E, lam=float(lam), residual=norm(x - y),
                                       elapsed=time.perf_counter() - t0))
        x = x_next
        if E <= eps_stop:
            traj.terminal = CONVERGED
            break
    return x, traj


# --- linear rate ------------------------------------------------------------

@dataclass(frozen=True)
class RateEstimate:
    gamma: float
    omega: float
    rho: float
    rho_empirical: float
    r_squared: float


def theoretical_rate(gamma: float, delta: float) -> tuple[float, float]:
    """``(omega, rho)`` with ``omega = (1 - g/2)/(1 + g/2)`` and ``rho = omega (1 - d) + d``."""
    omega = (1 - gamma / 2) / (1 + gamma / 2)
    return omega, omega * (1 - delta) + delta


def estimate_linear_rate(trajectory: Trajectory, beta: float, mu: float, delta: float,
                         lam_limit: float | None = None) -> RateEstimate:
    """Theoretical and fitted linear rates for a run with ``alpha = 0``.

    The fitted rate is ``exp(slope)`` of a least-squares line through
    ``(n, log E_n)`` over the second half of the recorded residuals.
    ``lam_limit`` defaults to the final stepsize of the run.
    """
    E = trajectory.residuals
    if E.size < 10:
        raise ValueError(f"need at least 10 residuals, got {E.size}")
    lam = trajectory.final_lambda if lam_limit is None else lam_limit
    gamma = min(1 - mu, lam * beta)
    omega, rho = theoretical_rate(gamma, delta)
    n = np.array([r.n for r in trajectory.records], dtype=float)
    tail = slice(E.size // 2, None)
    nt, Et = n[tail], E[tail]
    keep = Et > 0
    nt, logE = nt[keep], np.log(Et[keep])
    if nt.size < 2:
        raise ValueError("not enough positive residuals in the tail to fit a rate")
    slope, intercept = np.polyfit(nt, logE, 1)
    fit = slope * nt + intercept
    ss_res = float(np.sum((logE - fit) ** 2))
    ss_tot = float(np.sum((logE - logE.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return RateEstimate(gamma, omega, rho, float(np.exp(slope)), r2)
