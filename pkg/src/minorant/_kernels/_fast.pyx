# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled kernels for the Monte Carlo hot loops.

Same contracts as ``_slow.py``: batched Luxemburg-norm roots, per-path
double-sum functionals, per-path moduli and the per-path chaining-bound
scan.  All loops run without the GIL so callers can thread over disjoint
chunks; every routine is sequential and deterministic for fixed input.
"""

import numpy as np

from libc.math cimport INFINITY, exp, expm1, fabs, isfinite, log, log1p, pow
from libc.stdlib cimport free, malloc

cdef double _CAP = 710.0


cdef inline double phi_eval(double x, int kind, double p) nogil:
    cdef double e
    if kind == 0:
        return pow(x, p)
    e = pow(x, p) / p
    if e > _CAP:
        e = _CAP
    return expm1(e)


cdef inline double phi_inv(double w, int kind, double p) nogil:
    if kind == 0:
        return pow(w, 1.0 / p)
    return pow(p * log1p(w), 1.0 / p)


cdef double _lux_root(double* a, double[::1] w, Py_ssize_t m, int kind, double q) nogil:
    """Root c of sum_s w_s Phi(a_s / c) = 1 for nonnegative a, sum w = 1."""
    cdef Py_ssize_t s, it
    cdef double amax = 0.0, acc, dacc, t, e, ex, u, u_lo, u_hi, f, un
    for s in range(m):
        if a[s] > amax:
            amax = a[s]
    if amax == 0.0:
        return 0.0
    if kind == 0:
        acc = 0.0
        for s in range(m):
            acc += w[s] * pow(a[s], q)
        return pow(acc, 1.0 / q)

    u_lo = pow(q * log(2.0), 1.0 / q) / amax  # Phi^{-1}(1)/amax: modular <= 1 here
    acc = _modular(a, w, m, q, u_lo)
    if acc >= 1.0:
        return 1.0 / u_lo
    u_hi = u_lo
    for it in range(200):
        u_hi = u_hi * 2.0
        acc = _modular(a, w, m, q, u_hi)
        if acc >= 1.0:
            break
        u_lo = u_hi
    # safeguarded Newton in u = 1/c; the modular is convex increasing in u
    u = u_hi
    for it in range(100):
        acc = 0.0
        dacc = 0.0
        for s in range(m):
            if a[s] == 0.0:
                continue
            t = a[s] * u
            e = pow(t, q) / q
            if e > _CAP:
                acc = INFINITY
                dacc = INFINITY
                break
            ex = exp(e)
            acc += w[s] * (ex - 1.0)
            dacc += w[s] * a[s] * pow(t, q - 1.0) * ex
        f = acc - 1.0
        if f > 0.0:
            u_hi = u
        else:
            u_lo = u
        if fabs(f) <= 1e-12:
            break
        if u_hi - u_lo <= 1e-14 * u_hi:
            break
        if dacc > 0.0 and isfinite(dacc) and isfinite(f):
            un = u - f / dacc
        else:
            un = 0.5 * (u_lo + u_hi)
        if not (u_lo < un < u_hi):
            un = 0.5 * (u_lo + u_hi)
        u = un
    return 1.0 / u


cdef double _modular(double* a, double[::1] w, Py_ssize_t m, double q, double u) nogil:
    cdef Py_ssize_t s
    cdef double acc = 0.0, e
    for s in range(m):
        if a[s] == 0.0:
            continue
        e = pow(a[s] * u, q) / q
        if e > _CAP:
            return INFINITY
        acc += w[s] * expm1(e)
    return acc


def lux_norm_cols(double[:, ::1] values, double[::1] weights, int kind, double param):
    cdef Py_ssize_t m = values.shape[0], k = values.shape[1], s, j
    out_arr = np.empty(k)
    cdef double[::1] out = out_arr
    cdef double* buf = <double*> malloc(m * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for j in range(k):
                for s in range(m):
                    buf[s] = fabs(values[s, j])
                out[j] = _lux_root(buf, weights, m, kind, param)
    finally:
        free(buf)
    return out_arr


def lux_norm_pairs(double[:, ::1] values, double[::1] weights,
                   long long[::1] pi, long long[::1] pj, int kind, double param):
    cdef Py_ssize_t m = values.shape[0], np_ = pi.shape[0], s, p
    cdef Py_ssize_t ii, jj
    out_arr = np.empty(np_)
    cdef double[::1] out = out_arr
    cdef double* buf = <double*> malloc(m * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        with nogil:
            for p in range(np_):
                ii = <Py_ssize_t> pi[p]
                jj = <Py_ssize_t> pj[p]
                for s in range(m):
                    buf[s] = fabs(values[s, ii] - values[s, jj])
                out[p] = _lux_root(buf, weights, m, kind, param)
    finally:
        free(buf)
    return out_arr


def v_per_path(double[:, ::1] values, long long[::1] pi, long long[::1] pj,
               double[::1] coeff, double[::1] inv_d, int kind, double param):
    cdef Py_ssize_t n_paths = values.shape[0], np_ = pi.shape[0], k, p
    out_arr = np.zeros(n_paths)
    cdef double[::1] out = out_arr
    cdef double acc, x
    with nogil:
        for k in range(n_paths):
            acc = 0.0
            for p in range(np_):
                x = fabs(values[k, <Py_ssize_t> pi[p]] - values[k, <Py_ssize_t> pj[p]])
                acc += coeff[p] * phi_eval(x * inv_d[p], kind, param)
            out[k] = acc
    return out_arr


def modulus_per_path(double[:, ::1] values, long long[::1] pi, long long[::1] pj):
    cdef Py_ssize_t n_paths = values.shape[0], np_ = pi.shape[0], k, p
    out_arr = np.zeros(n_paths)
    cdef double[::1] out = out_arr
    cdef double best, d
    with nogil:
        for k in range(n_paths):
            best = 0.0
            for p in range(np_):
                d = fabs(values[k, <Py_ssize_t> pi[p]] - values[k, <Py_ssize_t> pj[p]])
                if d > best:
                    best = d
            out[k] = best
    return out_arr


def ai_scan(double[:, ::1] values, double[::1] z,
            double[:, ::1] csq, double[:, ::1] seglen,
            long long[::1] rank_i, long long[::1] rank_j,
            long long[::1] pi, long long[::1] pj,
            int kind, double param, double slack):
    """Per-path chaining-bound scan.

    For each path with functional value V = z[k], builds the per-point
    cumulative integrals of Phi^{-1}(4V / ball_measure^2) over the sorted
    radius segments (csq/seglen tables), then checks every listed pair's
    increment against 6 * (cum_i + cum_j) * (1 + slack).  Returns violation
    counts and the max finite increment/bound ratio per path.
    """
    cdef Py_ssize_t n_paths = values.shape[0], n = values.shape[1], np_ = pi.shape[0]
    cdef Py_ssize_t k, x, seg, p, ii, jj
    viol_arr = np.zeros(n_paths, dtype=np.int64)
    ratio_arr = np.zeros(n_paths)
    cdef long long[::1] viol = viol_arr
    cdef double[::1] ratio = ratio_arr
    cdef double* cumw = <double*> malloc(n * n * sizeof(double))
    if cumw == NULL:
        raise MemoryError()
    cdef double v4, c, sl, g, w6, delta, r
    cdef long long nv
    try:
        with nogil:
            for k in range(n_paths):
                v4 = 4.0 * z[k]
                for x in range(n):
                    c = 0.0
                    for seg in range(n):
                        cumw[x * n + seg] = c
                        sl = seglen[x, seg]
                        if sl > 0.0:
                            if csq[x, seg] > 0.0:
                                g = phi_inv(v4 / csq[x, seg], kind, param)
                            elif v4 > 0.0:
                                g = INFINITY
                            else:
                                g = 0.0
                            c = c + sl * g
                nv = 0
                r = 0.0
                for p in range(np_):
                    ii = <Py_ssize_t> pi[p]
                    jj = <Py_ssize_t> pj[p]
                    w6 = 6.0 * (cumw[ii * n + <Py_ssize_t> rank_i[p]]
                                + cumw[jj * n + <Py_ssize_t> rank_j[p]])
                    delta = fabs(values[k, ii] - values[k, jj])
                    if delta > w6 * (1.0 + slack):
                        nv += 1
                    if w6 > 0.0 and isfinite(w6):
                        if delta / w6 > r:
                            r = delta / w6
                    elif w6 == 0.0 and delta > 0.0:
                        r = INFINITY
                viol[k] = nv
                ratio[k] = r
    finally:
        free(cumw)
    return viol_arr, ratio_arr
