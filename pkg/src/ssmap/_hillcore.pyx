# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels: batch Hill evaluation, Jacobians, RK4 and
projected fixed-point iteration. Same contract as ssmap._hillcore_py."""

from libc.math cimport pow, fabs, sqrt

import numpy as np

BACKEND_NAME = "compiled"


cdef inline double _act(double x, double k, double n) nogil:
    # overflow-safe x^n/(k^n+x^n); one-sided limit 0 at x<=0
    if x <= 0.0:
        return 0.0
    return 1.0 / (1.0 + pow(k / x, n))


cdef inline double _dact(double x, double k, double n) nogil:
    cdef double a
    if x <= 0.0:
        if n == 1.0:
            return 1.0 / k
        return 0.0
    a = _act(x, k, n)
    return a * (1.0 - a) * n / x


cdef void _eval_into(int n_vars,
                     const int[:] ets, const double[:] coef, const int[:] tfs,
                     const int[:] fvar, const double[:] fsign,
                     const double[:] fk, const double[:] fn,
                     const double[:] p, double[:] out) nogil:
    cdef int i, t, f
    cdef double acc, tv, a
    for i in range(n_vars):
        acc = 0.0
        for t in range(ets[i], ets[i + 1]):
            tv = coef[t]
            for f in range(tfs[t], tfs[t + 1]):
                a = _act(p[fvar[f]], fk[f], fn[f])
                if fsign[f] > 0.0:
                    tv *= a
                else:
                    tv *= 1.0 - a
            acc += tv
        out[i] = acc


cdef void _jac_into(int n_vars,
                    const int[:] ets, const double[:] coef, const int[:] tfs,
                    const int[:] fvar, const double[:] fsign,
                    const double[:] fk, const double[:] fn,
                    const double[:] p, double[:, :] out,
                    double[:] vals, double[:] ders) nogil:
    cdef int i, t, f, fi, fj, nf, lo
    cdef double a, d, prod
    for i in range(n_vars):
        for t in range(ets[i], ets[i + 1]):
            lo = tfs[t]
            nf = tfs[t + 1] - lo
            for f in range(nf):
                a = _act(p[fvar[lo + f]], fk[lo + f], fn[lo + f])
                d = _dact(p[fvar[lo + f]], fk[lo + f], fn[lo + f])
                if fsign[lo + f] > 0.0:
                    vals[f] = a
                    ders[f] = d
                else:
                    vals[f] = 1.0 - a
                    ders[f] = -d
            for fi in range(nf):
                prod = coef[t]
                for fj in range(nf):
                    if fj == fi:
                        prod *= ders[fj]
                    else:
                        prod *= vals[fj]
                out[i, fvar[lo + fi]] += prod


cdef class _Arrays:
    """Contiguous views of a CompiledSystem, shared by the entry points."""
    cdef int n_vars
    cdef int[:] ets
    cdef double[:] coef
    cdef int[:] tfs
    cdef int[:] fvar
    cdef double[:] fsign
    cdef double[:] fk
    cdef double[:] fn
    cdef double[:] decay
    cdef int max_factors

    def __init__(self, cs):
        self.n_vars = cs.n_vars
        self.ets = np.ascontiguousarray(cs.expr_term_start, dtype=np.int32)
        self.coef = np.ascontiguousarray(cs.term_coef, dtype=np.float64)
        self.tfs = np.ascontiguousarray(cs.term_fac_start, dtype=np.int32)
        self.fvar = np.ascontiguousarray(cs.fac_var, dtype=np.int32)
        self.fsign = np.ascontiguousarray(cs.fac_sign, dtype=np.float64)
        self.fk = np.ascontiguousarray(cs.fac_k, dtype=np.float64)
        self.fn = np.ascontiguousarray(cs.fac_n, dtype=np.float64)
        self.decay = np.ascontiguousarray(cs.decay, dtype=np.float64)
        nfac = 1
        tfs = cs.term_fac_start
        for t in range(len(cs.term_coef)):
            nfac = max(nfac, int(tfs[t + 1] - tfs[t]))
        self.max_factors = nfac


def eval_many(cs, pts):
    cdef _Arrays a = _Arrays(cs)
    cdef double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef Py_ssize_t m = p.shape[0]
    out_arr = np.zeros((m, a.n_vars))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t r
    with nogil:
        for r in range(m):
            _eval_into(a.n_vars, a.ets, a.coef, a.tfs, a.fvar, a.fsign,
                       a.fk, a.fn, p[r], out[r])
    return out_arr


def jacobian_many(cs, pts):
    cdef _Arrays a = _Arrays(cs)
    cdef double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef Py_ssize_t m = p.shape[0]
    out_arr = np.zeros((m, a.n_vars, a.n_vars))
    cdef double[:, :, ::1] out = out_arr
    scratch_v = np.empty(a.max_factors)
    scratch_d = np.empty(a.max_factors)
    cdef double[:] sv = scratch_v
    cdef double[:] sd = scratch_d
    cdef Py_ssize_t r
    with nogil:
        for r in range(m):
            _jac_into(a.n_vars, a.ets, a.coef, a.tfs, a.fvar, a.fsign,
                      a.fk, a.fn, p[r], out[r], sv, sd)
    return out_arr


def max_jacobian_fro(cs, pts):
    cdef _Arrays a = _Arrays(cs)
    cdef double[:, ::1] p = np.ascontiguousarray(pts, dtype=np.float64)
    cdef Py_ssize_t m = p.shape[0]
    cdef int n = a.n_vars
    jac_arr = np.zeros((n, n))
    cdef double[:, :] jac = jac_arr
    scratch_v = np.empty(a.max_factors)
    scratch_d = np.empty(a.max_factors)
    cdef double[:] sv = scratch_v
    cdef double[:] sd = scratch_d
    cdef double best = 0.0, s
    cdef Py_ssize_t r
    cdef int i, j
    with nogil:
        for r in range(m):
            for i in range(n):
                for j in range(n):
                    jac[i, j] = 0.0
            _jac_into(n, a.ets, a.coef, a.tfs, a.fvar, a.fsign,
                      a.fk, a.fn, p[r], jac, sv, sd)
            s = 0.0
            for i in range(n):
                for j in range(n):
                    s += jac[i, j] * jac[i, j]
            s = sqrt(s)
            if s > best:
                best = s
    return best


def rk4_path(cs, x0, double dt, long n_steps, long record_every, double overshoot_cap):
    cdef _Arrays a = _Arrays(cs)
    cdef int n = a.n_vars
    cdef double[::1] p = np.array(x0, dtype=np.float64)
    cdef long n_rec = n_steps // record_every + 1
    path_arr = np.empty((n_rec, n))
    cdef double[:, ::1] path = path_arr
    work_arr = np.empty((5, n))
    cdef double[:, ::1] w = work_arr  # rows: stage point, k1..k4
    cdef long step, kept = 1
    cdef long diverged = -1
    cdef int i
    cdef double over, v
    for i in range(n):
        path[0, i] = p[i]
    with nogil:
        for step in range(1, n_steps + 1):
            _eval_into(n, a.ets, a.coef, a.tfs, a.fvar, a.fsign, a.fk, a.fn, p, w[1])
            for i in range(n):
                w[1, i] = a.decay[i] * (w[1, i] - p[i])
                w[0, i] = p[i] + 0.5 * dt * w[1, i]
            _eval_into(n, a.ets, a.coef, a.tfs, a.fvar, a.fsign, a.fk, a.fn, w[0], w[2])
            for i in range(n):
                w[2, i] = a.decay[i] * (w[2, i] - w[0, i])
                w[0, i] = p[i] + 0.5 * dt * w[2, i]
            _eval_into(n, a.ets, a.coef, a.tfs, a.fvar, a.fsign, a.fk, a.fn, w[0], w[3])
            for i in range(n):
                w[3, i] = a.decay[i] * (w[3, i] - w[0, i])
                w[0, i] = p[i] + dt * w[3, i]
            _eval_into(n, a.ets, a.coef, a.tfs, a.fvar, a.fsign, a.fk, a.fn, w[0], w[4])
            for i in range(n):
                w[4, i] = a.decay[i] * (w[4, i] - w[0, i])
            over = 0.0
            for i in range(n):
                p[i] = p[i] + dt / 6.0 * (w[1, i] + 2.0 * w[2, i] + 2.0 * w[3, i] + w[4, i])
                v = -p[i]
                if v > over:
                    over = v
                v = p[i] - 1.0
                if v > over:
                    over = v
            if over >= overshoot_cap:
                diverged = step
                break
            if over > 0.0:
                for i in range(n):
                    if p[i] < 0.0:
                        p[i] = 0.0
                    elif p[i] > 1.0:
                        p[i] = 1.0
            if step % record_every == 0:
                for i in range(n):
                    path[kept, i] = p[i]
                kept += 1
    return path_arr[:kept], diverged


def project_iterate(cs, lo, hi, p0, double tol, long max_iter):
    cdef _Arrays a = _Arrays(cs)
    cdef int n = a.n_vars
    cdef double[::1] lo_v = np.ascontiguousarray(lo, dtype=np.float64)
    cdef double[::1] hi_v = np.ascontiguousarray(hi, dtype=np.float64)
    p_arr = np.clip(np.asarray(p0, dtype=np.float64), lo, hi)
    cdef double[::1] p = np.ascontiguousarray(p_arr)
    fp_arr = np.empty(n)
    cdef double[::1] fp = fp_arr
    cdef long it = 0
    cdef int stalled = 0, converged = 0, gave_up = 0
    cdef int i
    cdef double res = 0.0, move, q, v
    with nogil:
        while it < max_iter:
            _eval_into(n, a.ets, a.coef, a.tfs, a.fvar, a.fsign, a.fk, a.fn, p, fp)
            res = 0.0
            for i in range(n):
                v = fabs(fp[i] - p[i])
                if v > res:
                    res = v
            if res < tol:
                converged = 1
                break
            move = 0.0
            for i in range(n):
                q = fp[i]
                if q < lo_v[i]:
                    q = lo_v[i]
                elif q > hi_v[i]:
                    q = hi_v[i]
                v = fabs(q - p[i])
                if v > move:
                    move = v
                p[i] = q
            it += 1
            if move < 0.1 * tol:
                stalled += 1
                if stalled >= 3:
                    gave_up = 1
                    break
            else:
                stalled = 0
        if not converged and not gave_up:
            # ran out of iterations: report the residual at the final point
            _eval_into(n, a.ets, a.coef, a.tfs, a.fvar, a.fsign, a.fk, a.fn, p, fp)
            res = 0.0
            for i in range(n):
                v = fabs(fp[i] - p[i])
                if v > res:
                    res = v
    return np.asarray(p), res, it, bool(converged)
