"""Seeded generators for the benchmark families and a JSON instance format.

Families:

``nash_cournot``  ``f(x,y) = <Px + Qy + r, y - x>`` on ``[-10, 10]^m``
``skew``          ``f(x,y) = <Ax, y - x>`` with an antisymmetric anti-diagonal
                  sign matrix on ``[-1, 1]^m``
``volterra``      ``f(x,y) = <A(x), y - x>``, ``A(x) = exp(-||x||) * int_0^t x``
                  on a uniform grid, over the ball of radius 2
``strongly_pm``   ``f(x,y) = <Mx + r, y - x>`` with ``M >= beta I`` on ``[-5, 5]^m``

All randomness comes from ``numpy.random.default_rng(rng_seed)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np
import scipy.sparse as sp

from .bifunctions import Bifunction, LinearOpBifunction, QuadraticBifunction
from .hilbert import Vector, as_vector
from .linalg import spectral_norm
from .sets import Ball, Box, FeasibleSet

FORMAT_VERSION = 1
VOLTERRA_CASES = ("I", "II", "III", "IV")


@dataclass
class ProblemInstance:
    name: str
    f: Bifunction
    C: FeasibleSet
    seeds: tuple[Vector, Vector, Vector, Vector]  # y_0, y_{-1}, w_{-1}, w_{-2}
    known_solution: Optional[Vector] = None
    rng_seed: Optional[int] = None
    family: str = ""
    params: dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.f.dim


def _cube_seeds(C: Box, rng: np.random.Generator):
    y0, y_m1, w_m1 = (as_vector(p) for p in C.sample(rng, 3))
    # the method starts from w_{-1} = w_{-2}
    return y0, y_m1, w_m1, w_m1


def nash_cournot_seeds(m: int) -> tuple[Vector, Vector]:
    """``y_{-1}[i] = i/(10i+1)`` and ``w_{-2}[i] = (i+5)/(i^2+1)`` for i = 1..m."""
    i = np.arange(1, m + 1, dtype=float)
    return as_vector(i / (10 * i + 1)), as_vector((i + 5) / (i**2 + 1))


def gen_nash_cournot(m: int, rng_seed: int = 0) -> ProblemInstance:
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    rng = np.random.default_rng(rng_seed)
    AP = rng.uniform(-1.0, 1.0, (m, m))
    AQ = rng.uniform(-1.0, 1.0, (m, m))
    r = rng.uniform(-1.0, 1.0, m)
    Q = AQ.T @ AQ
    P = AP.T @ AP + Q
    P, Q = 0.5 * (P + P.T), 0.5 * (Q + Q.T)
    y_m1, w_m2 = nash_cournot_seeds(m)
    return ProblemInstance(
        name=f"nash_cournot-m{m}-s{rng_seed}", f=QuadraticBifunction(P, Q, r),
        C=Box.cube(m, -10, 10), seeds=(y_m1, y_m1, w_m2, w_m2),
        rng_seed=rng_seed, family="nash_cournot", params={"m": m})


def skew_matrix(m: int) -> sp.csr_matrix:
    """``a_ij = -1`` if ``j = m+1-i`` and ``j > i``; ``+1`` if ``j = m+1-i`` and ``j < i``.

    Indices are 1-based in that rule; the centre entry of odd ``m`` is 0.
    """
    i = np.arange(1, m + 1)
    j = m + 1 - i
    vals = np.where(j > i, -1.0, np.where(j < i, 1.0, 0.0))
    keep = vals != 0
    return sp.csr_matrix((vals[keep], (i[keep] - 1, j[keep] - 1)), shape=(m, m))


def gen_skew(m: int, rng_seed: int = 0) -> ProblemInstance:
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    A = skew_matrix(m)
    C = Box.cube(m, -1, 1)
    # ||A||_2 = 1, so k1 = k2 = 1/2
    f = LinearOpBifunction(A, lipschitz=(0.5, 0.5))
    return ProblemInstance(
        name=f"skew-m{m}-s{rng_seed}", f=f, C=C, seeds=_cube_seeds(C, np.random.default_rng(rng_seed)),
        known_solution=as_vector(np.zeros(m)), rng_seed=rng_seed, family="skew",
        params={"m": m})


class VolterraOperator:
    """``x -> exp(-||x||) * h * cumsum(x)`` with ``h = 1/(n_grid - 1)``.

    The cumulative sum is the left-endpoint-inclusive rectangle rule for
    ``int_0^t x(s) ds`` on the grid ``t_k = k h``.
    """

    def __init__(self, n_grid: int):
        self.n_grid = int(n_grid)
        self.h = 1.0 / (self.n_grid - 1)

    def integrate(self, x: Vector) -> Vector:
        return self.h * np.cumsum(x)

    def __call__(self, x: Vector) -> Vector:
        return np.exp(-np.linalg.norm(x)) * self.integrate(x)

    @property
    def integration_norm(self) -> float:
        # the cumulative sum is its own "lower triangular ones" matrix; the
        # adjoint is the reversed cumulative sum
        return spectral_norm(self.integrate, dim=self.n_grid,
                             adjoint=lambda y: self.h * np.cumsum(y[::-1])[::-1])


def volterra_seeds(t: np.ndarray, case: str) -> tuple[Vector, Vector]:
    """``(y_{-1}, w_{-2})`` sampled on the grid ``t`` for the four named cases."""
    w_m2 = 2 * np.sin(t + 1)
    if case == "I":
        y_m1 = 1 - 0.5 * t + np.abs(t - 0.5)
    elif case == "II":
        y_m1 = t**2 + 1
    elif case == "III":
        y_m1 = np.exp(t) + 2 * t - 1
    elif case == "IV":
        y_m1 = np.sin(2 * t + 1) + 5
    else:
        raise ValueError(f"unknown case {case!r}; expected one of {VOLTERRA_CASES}")
    return as_vector(y_m1), as_vector(w_m2)


def gen_volterra(n_grid: int = 500, case: str = "I", metric: str = "euclidean",
                 rng_seed: int = 0) -> ProblemInstance:
    """Discretized integral-operator problem over the ball of radius 2.

    ``metric="euclidean"`` uses the plain inner product of grid values.
    ``metric="weighted"`` uses ``<x, y> = (1/n) sum x_i y_i``; it is realized
    by the isometry ``x -> x / sqrt(n)``, under which the operator keeps its
    form and only the initial points are rescaled, so all iterates are
    reported in the scaled coordinates.
    """
    if n_grid < 10:
        raise ValueError(f"n_grid must be at least 10, got {n_grid}")
    if metric not in ("euclidean", "weighted"):
        raise ValueError(f"unknown metric {metric!r}")
    t = np.linspace(0.0, 1.0, n_grid)
    y_m1, w_m2 = volterra_seeds(t, case)
    if metric == "weighted":
        s = 1.0 / np.sqrt(n_grid)
        y_m1, w_m2 = as_vector(s * y_m1), as_vector(s * w_m2)
    op = VolterraOperator(n_grid)
    radius = 2.0
    # on the ball: ||A(s) - A(w)|| <= ||V|| (1 + radius) ||s - w||
    k = 0.5 * op.integration_norm * (1 + radius)
    f = LinearOpBifunction(op, dim=n_grid, lipschitz=(k, k))
    return ProblemInstance(
        name=f"volterra-n{n_grid}-{case}", f=f, C=Ball(np.zeros(n_grid), radius),
        seeds=(y_m1, y_m1, w_m2, w_m2), known_solution=as_vector(np.zeros(n_grid)),
        rng_seed=rng_seed, family="volterra",
        params={"n_grid": n_grid, "case": case, "metric": metric})


def gen_strongly_pseudomonotone(m: int, beta: float = 1.0, rng_seed: int = 0,
                                coupled: bool = True) -> ProblemInstance:
    """``f(x,y) = <Mx + r, y - x>`` with ``M = beta I + S^T S / ||S^T S||``.

    ``M - beta I`` is PSD, so f is beta-strongly monotone and hence
    beta-strongly pseudomonotone. ``coupled=False`` drops the ``S`` term.
    """
    if m < 2:
        raise ValueError(f"m must be at least 2, got {m}")
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    rng = np.random.default_rng(rng_seed)
    S = rng.uniform(-1.0, 1.0, (m, m))
    r = rng.uniform(-1.0, 1.0, m)
    M = beta * np.eye(m)
    if coupled:
        G = S.T @ S
        M = M + 0.5 * (G + G.T) / spectral_norm(G)
    k = 0.5 * spectral_norm(M)
    C = Box.cube(m, -5, 5)
    f = LinearOpBifunction(M, offset=r, lipschitz=(k, k))
    return ProblemInstance(
        name=f"strongly_pm-m{m}-b{beta:g}-s{rng_seed}", f=f, C=C,
        seeds=_cube_seeds(C, rng), rng_seed=rng_seed, family="strongly_pm",
        params={"m": m, "beta": beta, "coupled": coupled})


def generate(family: str, **kw) -> ProblemInstance:
    gens = {"nash_cournot": gen_nash_cournot, "skew": gen_skew, "volterra": gen_volterra,
            "strongly_pm": gen_strongly_pseudomonotone}
    try:
        gen = gens[family]
    except KeyError:
        raise ValueError(f"unknown problem family {family!r}; choose from {sorted(gens)}") from None
    return gen(**kw)


# --- serialization ------------------------------------------------------------

def _set_to_dict(C: FeasibleSet) -> dict:
    if isinstance(C, Box):
        return {"kind": "box", "lower": C.lower.tolist(), "upper": C.upper.tolist()}
    if isinstance(C, Ball):
        return {"kind": "ball", "center": C.center.tolist(), "radius": C.radius}
    raise TypeError(f"cannot serialize set {type(C).__name__}")


def _set_from_dict(d: dict) -> FeasibleSet:
    if d["kind"] == "box":
        return Box(np.array(d["lower"]), np.array(d["upper"]))
    if d["kind"] == "ball":
        return Ball(np.array(d["center"]), d["radius"])
    raise ValueError(f"unknown set kind {d['kind']!r}")


def _bifunction_to_dict(f: Bifunction) -> dict:
    if isinstance(f, QuadraticBifunction):
        return {"kind": "quadratic", "dim": f.dim, "P": f.P.tolist(), "Q": f.Q.tolist(),
                "r": f.r.tolist()}
    if isinstance(f, LinearOpBifunction):
        d: dict[str, Any] = {"kind": "linear", "dim": f.dim,
                             "offset": None if f.offset is None else f.offset.tolist(),
                             "lipschitz": None if f.lipschitz is None else list(f.lipschitz)}
        if isinstance(f.op, VolterraOperator):
            d["operator"] = {"kind": "volterra", "n_grid": f.op.n_grid}
        elif sp.issparse(f.op):
            coo = f.op.tocoo()
            d["operator"] = {"kind": "sparse", "shape": list(coo.shape),
                             "rows": coo.row.tolist(), "cols": coo.col.tolist(),
                             "vals": coo.data.tolist()}
        elif isinstance(f.op, np.ndarray):
            d["operator"] = {"kind": "dense", "entries": f.op.tolist()}
        else:
            raise TypeError("cannot serialize an arbitrary callable operator")
        return d
    raise TypeError(f"cannot serialize bifunction {type(f).__name__}")


def _bifunction_from_dict(d: dict) -> Bifunction:
    if d["kind"] == "quadratic":
        return QuadraticBifunction(np.array(d["P"]), np.array(d["Q"]), np.array(d["r"]))
    if d["kind"] != "linear":
        raise ValueError(f"unknown bifunction kind {d['kind']!r}")
    o = d["operator"]
    if o["kind"] == "volterra":
        op = VolterraOperator(o["n_grid"])
    elif o["kind"] == "sparse":
        op = sp.csr_matrix((o["vals"], (o["rows"], o["cols"])), shape=tuple(o["shape"]))
    elif o["kind"] == "dense":
        op = np.array(o["entries"], dtype=float)
    else:
        raise ValueError(f"unknown operator kind {o['kind']!r}")
    lip = d.get("lipschitz")
    return LinearOpBifunction(op, dim=d["dim"], offset=d.get("offset"),
                              lipschitz=None if lip is None else tuple(lip))


def instance_to_dict(inst: ProblemInstance) -> dict:
    y0, y_m1, w_m1, w_m2 = inst.seeds
    return {
        "format": "icseg-instance", "version": FORMAT_VERSION,
        "name": inst.name, "family": inst.family, "params": inst.params,
        "rng_seed": inst.rng_seed, "dim": inst.dim,
        "bifunction": _bifunction_to_dict(inst.f),
        "set": _set_to_dict(inst.C),
        "seeds": {"y0": y0.tolist(), "y_m1": y_m1.tolist(), "w_m1": w_m1.tolist(),
                  "w_m2": w_m2.tolist()},
        "known_solution": None if inst.known_solution is None else inst.known_solution.tolist(),
    }


def instance_from_dict(d: dict) -> ProblemInstance:
    if d.get("format") != "icseg-instance":
        raise ValueError("not an icseg instance file")
    if d.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported instance format version {d.get('version')}")
    s = d["seeds"]
    ks = d.get("known_solution")
    return ProblemInstance(
        name=d["name"], f=_bifunction_from_dict(d["bifunction"]), C=_set_from_dict(d["set"]),
        seeds=tuple(as_vector(s[k]) for k in ("y0", "y_m1", "w_m1", "w_m2")),
        known_solution=None if ks is None else as_vector(ks), rng_seed=d.get("rng_seed"),
        family=d.get("family", ""), params=d.get("params", {}))


def save_instance(inst: ProblemInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(inst)) + "\n")


def load_instance(path: str | Path) -> ProblemInstance:
    return instance_from_dict(json.loads(Path(path).read_text()))
