"""Concave maximization over the capped simplex {a >= 0, sum(a) <= cap}.

Projected gradient ascent with Armijo backtracking along the projection arc.
The feasible set is the duty-allocation region; objectives passed in are
concave, so the fixed point of the projection mapping is the global maximum.

Near the optimum, objective differences fall below float resolution long
before the projected-gradient residual reaches a tight tolerance, so the
line search hands over to a polishing phase: projection-mapping iterations
with Barzilai-Borwein steps, steered entirely by the residual (which keeps
resolving down to gradient rounding noise) under a nonmonotone watchdog.
"""

from __future__ import annotations

import numpy as np


def project_capped_simplex(v: np.ndarray, cap: float) -> np.ndarray:
    """Euclidean projection onto {x : x >= 0, sum(x) <= cap}.

    Clipping negatives is the exact projection whenever the clipped point
    already satisfies the sum constraint; otherwise the problem reduces to
    projection onto the scaled probability simplex {x >= 0, sum(x) = cap},
    solved by the standard sort-and-threshold rule.
    """
    if cap <= 0.0:
        raise ValueError(f"simplex cap must be positive, got {cap}")
    v = np.asarray(v, dtype=float)
    w = np.maximum(v, 0.0)
    if w.sum() <= cap:
        return w
    u = np.sort(v)[::-1]
    excess = np.cumsum(u) - cap
    j = np.arange(1, v.size + 1)
    rho = j[u - excess / j > 0][-1]
    theta = excess[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


def maximize_on_capped_simplex(value_grad, n: int, cap: float,
                               tol: float = 1e-10, max_iter: int = 10000,
                               x0=None):
    """Maximize a concave objective over {a >= 0, sum(a) <= cap}.

    Args:
        value_grad: callable a -> (f(a), grad f(a)).
        n: dimension of the allocation vector.
        cap: simplex cap (1/beta).
        tol: termination threshold on ||P(a + g) - a|| with unit base step;
            zero exactly at a maximizer of a concave objective.
        max_iter: total iteration cap across both phases.
        x0: optional feasible start; defaults to a strictly interior point.

    Returns:
        (a, f, converged).  On hitting max_iter the best iterate seen is
        returned with converged = False; ascent steps only, so f is still a
        valid lower bound on the maximum.
    """
    if x0 is None:
        x = np.full(n, 0.5 * cap / n)
    else:
        x = project_capped_simplex(np.asarray(x0, dtype=float), cap)

    def residual(xc, gc):
        return float(np.linalg.norm(project_capped_simplex(xc + gc, cap) - xc))

    f, g = value_grad(x)
    t = 1.0
    # sufficient-increase fraction; large enough that accepted steps cannot
    # sit at the edge where the per-iteration contraction degenerates
    sigma = 0.3
    iters = 0

    # phase 1: Armijo-backtracked ascent while the objective still resolves
    while iters < max_iter:
        iters += 1
        if residual(x, g) < tol:
            return x, f, True
        t = min(t * 2.0, 1e15)
        accepted = False
        while True:
            xn = project_capped_simplex(x + t * g, cap)
            fn, gn = value_grad(xn)
            if fn >= f + sigma * g.dot(xn - x):
                accepted = True
                break
            t *= 0.5
            if t < 1e-18:
                break
        if accepted:
            made_progress = fn > f
            x, f, g = xn, fn, gn
            if made_progress:
                continue
        break

    # phase 2: residual-steered polishing with Barzilai-Borwein steps
    t = min(max(t, 1e-8), 1e8)
    r = residual(x, g)
    best = (r, x, f)
    window = [r]
    while iters < max_iter:
        iters += 1
        if r < tol:
            return x, f, True
        xn = project_capped_simplex(x + t * g, cap)
        fn, gn = value_grad(xn)
        rn = residual(xn, gn)
        if rn < max(window):
            dx = xn - x
            dg = gn - g
            curve = -float(dx.dot(dg))
            if curve > 0.0:
                t = min(max(float(dx.dot(dx)) / curve, 1e-12), 1e12)
            x, f, g, r = xn, fn, gn, rn
            window.append(rn)
            if len(window) > 8:
                window.pop(0)
            if rn < best[0]:
                best = (rn, x, f)
        else:
            t *= 0.5
            if t < 1e-18:
                break
    _, x, f = best
    return x, f, residual(x, value_grad(x)[1]) < tol


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-12):
    """Golden-section search for the maximum of a concave function on [lo, hi].

    Returns (argmax, max).  tol is the final bracket width.
    """
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    invphi2 = invphi * invphi
    a, b = float(lo), float(hi)
    h = b - a
    if h <= tol:
        xm = 0.5 * (a + b)
        return xm, f(xm)
    c = a + invphi2 * h
    d = a + invphi * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + invphi2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + invphi * h
            fd = f(d)
    xm = 0.5 * (a + b)
    return xm, f(xm)
