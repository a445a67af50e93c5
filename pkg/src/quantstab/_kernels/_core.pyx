# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled trajectory kernels.

Mirrors quantstab._kernels._pure operation-for-operation; built with
-ffp-contract=off so results are bit-identical to the numpy fallback.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, floor, ldexp, pow

cnp.import_array()

NAME = "compiled"

DIVERGENCE_GUARD = 1e30

cdef double _GUARD = 1e30


cdef inline double _pow2(double e) noexcept nogil:
    cdef double fl = floor(e)
    if e == fl and fabs(e) < 1023.0:
        return ldexp(1.0, <int>fl)
    return pow(2.0, e)


cdef inline double _uq(int K, double delta, double x) noexcept nogil:
    cdef double half = (0.5 * K) * delta
    cdef long j
    if x == half:
        return (0.5 * (K - 1)) * delta
    if x < -half or x > half:
        return 0.0
    j = <long>floor(x / delta + 0.5 * K)
    if j < 0:
        j = 0
    if j > K - 1:
        j = K - 1
    while j > 0 and x < (j - 0.5 * K) * delta:
        j -= 1
    while j < K - 1 and x >= (j + 1 - 0.5 * K) * delta:
        j += 1
    return (j - 0.5 * (K - 1)) * delta


def uniform_quantize_array(int K, delta, x):
    """Vectorized uniform quantizer; delta may vary per element."""
    x_arr = np.ascontiguousarray(x, dtype=np.float64)
    d_arr = np.ascontiguousarray(np.broadcast_to(
        np.asarray(delta, dtype=np.float64), x_arr.shape))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xf = x_arr.ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] df = d_arr.ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(xf)
    cdef Py_ssize_t i, nn = xf.shape[0]
    for i in range(nn):
        out[i] = _uq(K, df[i], xf[i])
    return out.reshape(x_arr.shape)


def ar_paths(w, alpha, init):
    """AR(N) recursion over an ensemble; see the pure backend for the contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] av = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef Py_ssize_t n = wv.shape[0], T = wv.shape[1], N = av.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] hist = \
        np.array(init, dtype=np.float64, copy=True).reshape(n, N)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.empty((n, T))
    cdef Py_ssize_t k, t, i
    cdef double acc
    for k in range(n):
        for t in range(T):
            acc = av[0] * hist[k, 0]
            for i in range(1, N):
                acc = acc + av[i] * hist[k, i]
            acc = acc + wv[k, t]
            x[k, t] = acc
            for i in range(N - 1, 0, -1):
                hist[k, i] = hist[k, i - 1]
            hist[k, 0] = acc
    return x


def delta_mod_paths(x, double m, s0):
    """Delta-modulation tracker over an ensemble; returns (n, T+1) states."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], T = xv.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] s0v = \
        np.array(s0, dtype=np.float64, copy=True).reshape(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] s = np.empty((n, T + 1))
    cdef Py_ssize_t k, t
    cdef double cur
    for k in range(n):
        cur = s0v[k]
        s[k, 0] = cur
        for t in range(T):
            if xv[k, t] - cur >= 0.0:
                cur = cur + m
            else:
                cur = cur + (-m)
            s[k, t + 1] = cur
    return s


def gg_paths(x, thresholds, steps, j0, double log2_b, double ratio):
    """Goodman-Gersho lattice recursion over an ensemble; returns (n, T+1) int64."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] th = np.ascontiguousarray(thresholds, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] st = np.ascontiguousarray(steps, dtype=np.int64)
    cdef Py_ssize_t n = xv.shape[0], T = xv.shape[1], C1 = th.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] j0v = \
        np.array(j0, dtype=np.int64, copy=True).reshape(n)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] j = np.empty((n, T + 1), dtype=np.int64)
    cdef Py_ssize_t k, t, c
    cdef cnp.int64_t cur
    cdef double delta, r
    for k in range(n):
        cur = j0v[k]
        j[k, 0] = cur
        for t in range(T):
            delta = _pow2(log2_b + cur * ratio)
            r = fabs(xv[k, t]) / delta
            c = 0
            while c < C1 and th[c] < r:
                c += 1
            cur = cur + st[c]
            j[k, t + 1] = cur
    return j


def zoom_paths(w, x0, double a, double b, int K, j0, double log2_b,
               double ratio, long step_out, long step_in, double log2_L):
    """Closed loop under the zoom quantizer; see the pure backend for the contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = wv.shape[0], T = wv.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x0v = \
        np.array(x0, dtype=np.float64, copy=True).reshape(n)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] j0v = \
        np.array(j0, dtype=np.int64, copy=True).reshape(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] x = np.empty((n, T + 1))
    cdef cnp.ndarray[cnp.int64_t, ndim=2] j = np.empty((n, T + 1), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] xhat = np.zeros((n, T))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] u = np.zeros((n, T))
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] overflow = np.zeros((n, T), dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] diverged = np.zeros(n, dtype=np.uint8)
    cdef Py_ssize_t k, t
    cdef double gain = -(a / b)
    cdef double curx, e, delta, qx, ut, half, neww
    cdef cnp.int64_t curj
    cdef bint alive, over
    for k in range(n):
        curx = x0v[k]
        curj = j0v[k]
        x[k, 0] = curx
        j[k, 0] = curj
        alive = 1
        for t in range(T):
            if alive:
                e = log2_b + curj * ratio
                delta = _pow2(e)
                qx = _uq(K, delta, curx)
                ut = gain * qx
                half = (0.5 * K) * delta
                over = fabs(curx) > half
                if over:
                    curj = curj + step_out
                elif e >= log2_L:
                    curj = curj + step_in
                neww = a * curx + b * ut + wv[k, t]
                xhat[k, t] = qx
                u[k, t] = ut
                overflow[k, t] = over
                curx = neww
                if fabs(curx) > _GUARD:
                    alive = 0
                    diverged[k] = 1
            else:
                overflow[k, t] = 1
            x[k, t + 1] = curx
            j[k, t + 1] = curj
    return (x, j, xhat, u, overflow.astype(bool), diverged.astype(bool))
