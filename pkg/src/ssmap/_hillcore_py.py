"""Pure numpy implementation of the numeric kernels.

Mirrors the compiled extension ``ssmap._hillcore``; the active module is
chosen in :mod:`ssmap.backend`. Batch operations vectorize over points;
the sequential loops (integration, fixed-point iteration) run per step.

Numerics: factor values use the overflow-safe form 1/(1 + (k/x)^n) with
x <= 0 mapped to the one-sided limit, so plateaus saturate to exact 0/1
for huge exponents instead of producing 0/0.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"

# derivative of an activating factor at x=0: 0 for n>1, 1/k at n=1
_N1_TOL = 0.0


def _act_values(x: np.ndarray, k: float, n: float) -> np.ndarray:
    out = np.zeros_like(x)
    pos = x > 0.0
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        out[pos] = 1.0 / (1.0 + (k / x[pos]) ** n)
    return out


def _act_derivs(x: np.ndarray, k: float, n: float) -> np.ndarray:
    # d/dx [x^n/(k^n+x^n)] = a(1-a) n/x for x>0
    out = np.zeros_like(x)
    pos = x > 0.0
    a = _act_values(x[pos], k, n)
    with np.errstate(over="ignore", under="ignore"):
        out[pos] = a * (1.0 - a) * n / x[pos]
    if n == 1.0:
        out[~pos] = 1.0 / k
    return out


def eval_many(cs, pts: np.ndarray) -> np.ndarray:
    """Evaluate all expressions at each row of pts; returns (M, N)."""
    pts = np.asarray(pts, dtype=np.float64)
    m = pts.shape[0]
    out = np.zeros((m, cs.n_vars))
    ets, tfs = cs.expr_term_start, cs.term_fac_start
    for i in range(cs.n_vars):
        acc = out[:, i]
        for t in range(ets[i], ets[i + 1]):
            tv = np.full(m, cs.term_coef[t])
            for f in range(tfs[t], tfs[t + 1]):
                a = _act_values(pts[:, cs.fac_var[f]], cs.fac_k[f], cs.fac_n[f])
                tv *= a if cs.fac_sign[f] > 0 else 1.0 - a
            acc += tv
    return out


def jacobian_many(cs, pts: np.ndarray) -> np.ndarray:
    """Analytic Jacobians at each row of pts; returns (M, N, N)."""
    pts = np.asarray(pts, dtype=np.float64)
    m = pts.shape[0]
    n = cs.n_vars
    out = np.zeros((m, n, n))
    ets, tfs = cs.expr_term_start, cs.term_fac_start
    for i in range(n):
        for t in range(ets[i], ets[i + 1]):
            lo, hi = tfs[t], tfs[t + 1]
            vals = []
            ders = []
            for f in range(lo, hi):
                x = pts[:, cs.fac_var[f]]
                a = _act_values(x, cs.fac_k[f], cs.fac_n[f])
                d = _act_derivs(x, cs.fac_k[f], cs.fac_n[f])
                if cs.fac_sign[f] > 0:
                    vals.append(a)
                    ders.append(d)
                else:
                    vals.append(1.0 - a)
                    ders.append(-d)
            for fi, f in enumerate(range(lo, hi)):
                prod = np.full(m, cs.term_coef[t])
                for fj in range(hi - lo):
                    prod = prod * (ders[fj] if fj == fi else vals[fj])
                out[:, i, cs.fac_var[f]] += prod
    return out


def max_jacobian_fro(cs, pts: np.ndarray) -> float:
    """Largest Frobenius norm of the Jacobian over the given points."""
    pts = np.asarray(pts, dtype=np.float64)
    best = 0.0
    for start in range(0, pts.shape[0], 4096):
        jac = jacobian_many(cs, pts[start : start + 4096])
        norms = np.sqrt((jac * jac).sum(axis=(1, 2)))
        if norms.size:
            best = max(best, float(norms.max()))
    return best


def rk4_path(cs, x0: np.ndarray, dt: float, n_steps: int, record_every: int,
             overshoot_cap: float) -> tuple[np.ndarray, int]:
    """Fixed-step RK4 for x' = decay*(F(x) - x), clamped to the cube.

    Returns (path, diverged_step); diverged_step is -1 on success, else the
    1-based step whose overshoot beyond [0,1] reached overshoot_cap. The
    path holds the recorded points up to and including the last valid one.
    """
    d = cs.decay
    p = np.array(x0, dtype=np.float64)
    n_rec = n_steps // record_every + 1
    path = np.empty((n_rec, cs.n_vars))
    path[0] = p
    kept = 1

    def rhs(q):
        return d * (eval_many(cs, q[None, :])[0] - q)

    for step in range(1, n_steps + 1):
        k1 = rhs(p)
        k2 = rhs(p + 0.5 * dt * k1)
        k3 = rhs(p + 0.5 * dt * k2)
        k4 = rhs(p + dt * k3)
        p = p + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        over = max(float((-p).max(initial=0.0)), float((p - 1.0).max(initial=0.0)))
        if over >= overshoot_cap:
            return path[:kept], step
        if over > 0.0:
            p = np.clip(p, 0.0, 1.0)
        if step % record_every == 0:
            path[kept] = p
            kept += 1
    return path[:kept], -1


def project_iterate(cs, lo: np.ndarray, hi: np.ndarray, p0: np.ndarray,
                    tol: float, max_iter: int) -> tuple[np.ndarray, float, int, bool]:
    """Iterate p <- clip(F(p), lo, hi) until the unprojected residual
    ||F(p)-p||_inf drops below tol.

    Returns (p, residual, iterations, converged). Stops early once the
    projected step stalls (three consecutive moves below 0.1*tol) while
    the residual is still large, which signals a boundary pin.
    """
    p = np.clip(np.asarray(p0, dtype=np.float64), lo, hi)
    stalled = 0
    it = 0
    while it < max_iter:
        fp = eval_many(cs, p[None, :])[0]
        res = float(np.abs(fp - p).max())
        if res < tol:
            return p, res, it, True
        q = np.clip(fp, lo, hi)
        move = float(np.abs(q - p).max())
        p = q
        it += 1
        if move < 0.1 * tol:
            stalled += 1
            if stalled >= 3:
                return p, res, it, False
        else:
            stalled = 0
    fp = eval_many(cs, p[None, :])[0]
    return p, float(np.abs(fp - p).max()), max_iter, False
