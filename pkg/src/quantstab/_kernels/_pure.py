"""NumPy implementations of the trajectory kernels.

Fallback when the compiled extension is unavailable. Each function mirrors
the Cython backend operation-for-operation (same accumulation order, same
edge handling) so the two backends produce bit-identical trajectories.
"""

import numpy as np

from ..lattice import pow2_array as _pow2

NAME = "pure"

DIVERGENCE_GUARD = 1e30


def uniform_quantize_array(K, delta, x):
    """Vectorized uniform quantizer; delta may vary per element."""
    x = np.asarray(x, dtype=np.float64)
    delta = np.broadcast_to(np.asarray(delta, dtype=np.float64), x.shape)
    half = (0.5 * K) * delta
    out = np.zeros_like(x)

    exact = x == half
    gran = (x >= -half) & (x < half)

    j = np.floor(x / delta + 0.5 * K)
    np.clip(j, 0.0, float(K - 1), out=j)
    # correct the division-based guess against the exact bin edges
    while True:
        down = gran & (j > 0.0) & (x < (j - 0.5 * K) * delta)
        up = gran & (j < K - 1.0) & (x >= (j + 1.0 - 0.5 * K) * delta)
        if not down.any() and not up.any():
            break
        j = j - down + up

    out[gran] = ((j - 0.5 * (K - 1)) * delta)[gran]
    out[exact] = ((0.5 * (K - 1)) * delta)[exact]
    return out


def ar_paths(w, alpha, init):
    """AR(N) recursion x_t = sum_i alpha[i]*x_{t-1-i} + w_t over an ensemble.

    w: (n, T) noise, alpha: (N,), init: (n, N) initial lags, most recent
    first. Returns x: (n, T).
    """
    w = np.ascontiguousarray(w, dtype=np.float64)
    alpha = np.ascontiguousarray(alpha, dtype=np.float64)
    n, T = w.shape
    N = alpha.shape[0]
    hist = np.array(init, dtype=np.float64, copy=True).reshape(n, N)
    x = np.empty((n, T))
    for t in range(T):
        acc = alpha[0] * hist[:, 0]
        for i in range(1, N):
            acc = acc + alpha[i] * hist[:, i]
        acc = acc + w[:, t]
        x[:, t] = acc
        if N > 1:
            hist[:, 1:] = hist[:, :-1]
        hist[:, 0] = acc
    return x


def delta_mod_paths(x, m, s0):
    """Delta-modulation tracker over an ensemble.

    x: (n, T) source samples, s0: (n,) initial levels. Returns s: (n, T+1)
    with s[:, k] the state before consuming x[:, k].
    """
    x = np.asarray(x, dtype=np.float64)
    n, T = x.shape
    s = np.empty((n, T + 1))
    cur = np.array(s0, dtype=np.float64, copy=True).reshape(n)
    s[:, 0] = cur
    m = float(m)
    for t in range(T):
        cur = cur + np.where(x[:, t] - cur >= 0.0, m, -m)
        s[:, t + 1] = cur
    return s


def gg_paths(x, thresholds, steps, j0, log2_b, ratio):
    """Goodman-Gersho log-step-size lattice recursion over an ensemble.

    x: (n, T); thresholds: ascending cell boundaries (C-1,); steps: integer
    log-steps (C,); j0: (n,) initial lattice indices. Cell c covers
    r in (thresholds[c-1], thresholds[c]] with r = |x|/delta. Returns
    j: (n, T+1) int64.
    """
    x = np.asarray(x, dtype=np.float64)
    thresholds = np.ascontiguousarray(thresholds, dtype=np.float64)
    steps = np.ascontiguousarray(steps, dtype=np.int64)
    n, T = x.shape
    j = np.empty((n, T + 1), dtype=np.int64)
    cur = np.array(j0, dtype=np.int64, copy=True).reshape(n)
    j[:, 0] = cur
    for t in range(T):
        delta = _pow2(log2_b + cur * ratio)
        r = np.abs(x[:, t]) / delta
        cells = np.searchsorted(thresholds, r, side="left")
        cur = cur + steps[cells]
        j[:, t + 1] = cur
    return j


def zoom_paths(w, x0, a, b, K, j0, log2_b, ratio, step_out, step_in, log2_L):
    """Closed-loop plant x' = a*x + b*u + w under the zoom quantizer.

    Returns (x, j, xhat, u, overflow, diverged):
      x: (n, T+1) plant state, j: (n, T+1) int64 lattice index of delta,
      xhat/u/overflow: (n, T) per-step records, diverged: (n,) bool.
    A trajectory whose |x| exceeds the divergence guard is frozen in place
    (state held, overflow flagged) but retained.
    """
    w = np.asarray(w, dtype=np.float64)
    n, T = w.shape
    x = np.empty((n, T + 1))
    j = np.empty((n, T + 1), dtype=np.int64)
    xhat = np.zeros((n, T))
    u = np.zeros((n, T))
    overflow = np.zeros((n, T), dtype=bool)
    curx = np.array(x0, dtype=np.float64, copy=True).reshape(n)
    curj = np.array(j0, dtype=np.int64, copy=True).reshape(n)
    x[:, 0] = curx
    j[:, 0] = curj
    alive = np.ones(n, dtype=bool)
    gain = -(a / b)
    for t in range(T):
        e = log2_b + curj * ratio
        delta = _pow2(e)
        qx = uniform_quantize_array(K, delta, curx)
        ut = gain * qx
        half = (0.5 * K) * delta
        over = np.abs(curx) > half
        newj = np.where(over, curj + step_out,
                        np.where(e >= log2_L, curj + step_in, curj))
        neww = a * curx + b * ut + w[:, t]

        xhat[:, t] = np.where(alive, qx, 0.0)
        u[:, t] = np.where(alive, ut, 0.0)
        overflow[:, t] = np.where(alive, over, True)
        curx = np.where(alive, neww, curx)
        curj = np.where(alive, newj, curj)
        alive = alive & (np.abs(curx) <= DIVERGENCE_GUARD)
        x[:, t + 1] = curx
        j[:, t + 1] = curj
    return x, j, xhat, u, overflow, ~alive
