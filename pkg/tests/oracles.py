"""Independent brute-force oracles shared by the test modules."""

import numpy as np

from icseg.sets import Ball, Box, Halfspace


def objective_2d(req, pts):
    """``lam f(anchor_f, z) + 1/2 ||anchor_q - z||^2`` for each row of pts, one call at a time."""
    vals = np.array([req.f.evaluate(req.anchor_f, z) for z in pts])
    d = pts - req.anchor_q
    return req.lam * vals + 0.5 * np.sum(d * d, axis=1)


def _quad_obj(req, pts):
    """Batch objective; cross-checked against ``objective_2d`` in test_prox."""
    f, af = req.f, req.anchor_f
    if hasattr(f, "Q"):
        # f(af, z) = <P af + r, z - af> + z^T Q z - z^T Q af   (Q symmetric)
        lin = f.P @ af + f.r
        vals = (pts - af) @ lin + np.einsum("ij,jk,ik->i", pts, f.Q, pts) - pts @ (f.Q @ af)
    else:
        vals = (pts - af) @ f.apply(af)
    d = pts - req.anchor_q
    return req.lam * vals + 0.5 * np.sum(d * d, axis=1)


def _two_pass(req, to_xy, a_rng, b_rng, coarse, step, window):
    """Coarse-then-fine grid search over a parameter rectangle mapped into the set.

    ``to_xy`` maps parameter pairs to points; every grid point must be
    feasible by construction. ``coarse``, ``step`` and ``window`` are
    per-axis pairs so that both axes can be measured in arc length.
    """
    def search(a_lo, a_hi, b_lo, b_hi, h):
        A = np.arange(a_lo, a_hi + h[0] / 2, h[0])
        B = np.arange(b_lo, b_hi + h[1] / 2, h[1])
        AA, BB = np.meshgrid(A, B, indexing="ij")
        pts = to_xy(AA.ravel(), BB.ravel())
        k = np.argmin(_quad_obj(req, pts))
        return AA.ravel()[k], BB.ravel()[k], pts[k]

    a, b, _ = search(*a_rng, *b_rng, coarse)
    return search(max(a_rng[0], a - window[0]), min(a_rng[1], a + window[0]),
                  max(b_rng[0], b - window[1]), min(b_rng[1], b + window[1]), step)[2]


def grid_argmin_2d(req, step=1e-3, coarse=0.02, window=0.25, span=30.0):
    """Minimize a 2-D prox objective over set points on a grid of resolution ``step``.

    The grid follows the set's geometry so its boundary consists of grid
    points: axis-aligned for a box (bounds on the grid), boundary-aligned
    for a halfspace, polar for a ball. The objective is 1-strongly convex,
    so the coarse minimizer lies within a few coarse cells of the true one.
    """
    S = req.set
    if isinstance(S, Box):
        lo, hi = S.lower, S.upper
        # offset each axis from its lower bound so both bounds are grid points
        to_xy = lambda a, b: np.stack([lo[0] + a, lo[1] + b], 1)
        return _two_pass(req, to_xy, (0.0, hi[0] - lo[0]), (0.0, hi[1] - lo[1]),
                         (coarse, coarse), (step, step), (window, window))
    if isinstance(S, Halfspace):
        n = S.normal / np.linalg.norm(S.normal)
        t = np.array([-n[1], n[0]])
        c = S.anchor + ((req.anchor_q - S.anchor) @ t) * t
        to_xy = lambda a, b: c + np.outer(a, t) + np.outer(b, n)
        return _two_pass(req, to_xy, (-span, span), (-span, 0.0),
                         (coarse, coarse), (step, step), (window, window))
    if isinstance(S, Ball):
        R = S.radius
        # radius runs down from R so the sphere itself is on the grid
        to_xy = lambda r, th: S.center + np.stack([(R - r) * np.cos(th), (R - r) * np.sin(th)], 1)
        return _two_pass(req, to_xy, (0.0, R), (-np.pi, np.pi),
                         (coarse, coarse / R), (step, step / R), (window, window / R))
    raise TypeError(S)


def feasible_samples(S, rng, k):
    if isinstance(S, Halfspace):
        return np.array([S.project(q) for q in rng.uniform(-10, 10, size=(k, S.dim))])
    return S.sample(rng, k)


def plain_seg(A, C, lam0, mu, y0, iters):
    """Straight-line plain subgradient extragradient for ``f(x, y) = <Ax, y - x>`` on a box.

    Returns the lists of ``z_n`` and ``y_{n+1}``.
    """
    lo, hi = C.lower, C.upper
    y, lam, zs, ys = y0.copy(), lam0, [], []
    for _ in range(iters):
        Ay = A @ y
        z = np.clip(y - lam * Ay, lo, hi)
        a = y - lam * Ay - z
        q = y - lam * (A @ z)
        s = a @ (q - z)
        y_next = q - (s / (a @ a)) * a if s > 0 else q
        gap = (A @ (y - z)) @ (y_next - z)
        if gap > 0:
            lam = min(0.5 * mu * ((y - z) @ (y - z) + (y_next - z) @ (y_next - z)) / gap, lam)
        zs.append(z)
        ys.append(y_next)
        y = y_next
    return zs, ys


def premise_pairs(inst, rng, count):
    """``count`` feasible pairs (s, w) with f(s, w) >= 0, by rejection."""
    M, r = inst.f.matrix, inst.f.offset
    S_acc, W_acc = [], []
    while sum(len(a) for a in S_acc) < count:
        S, W = inst.C.sample(rng, 50000), inst.C.sample(rng, 50000)
        keep = np.einsum("ij,ij->i", S @ M.T + r, W - S) >= 0
        S_acc.append(S[keep])
        W_acc.append(W[keep])
    return np.concatenate(S_acc)[:count], np.concatenate(W_acc)[:count]
