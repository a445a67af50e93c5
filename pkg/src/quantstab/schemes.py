"""Adaptive scheme updates: delta-modulation, Goodman-Gersho step-size
adaptation, and the zoom quantizer used for networked control.

Step sizes of the multiplicative schemes live on an exact integer lattice
(log2(delta) = log2_b + j * p/q); every update moves the integer index j, and
the float delta is materialized only when quantizing.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .errors import DomainError, NonFiniteInputError
from .lattice import LatticeSpacing, pow2, round_log2_to_lattice, steps_coprime
from .quantizers import BinaryQuantizer, UniformQuantizer, binary_quantize, uniform_quantize
from .sources import SourceKind, SourceSpec, sample_paths, validate_spec

# ---------------------------------------------------------------------------
# Delta-modulation


@dataclass(frozen=True)
class DeltaModState:
    """Tracker level; always s0 plus an integer multiple of m."""

    s: float


def delta_mod_step(state: DeltaModState, x: float, m: float) -> DeltaModState:
    """One tracker update s' = s + binary_quantize(m, x - s)."""
    if not math.isfinite(x):
        raise NonFiniteInputError(f"non-finite source sample {x!r}")
    q = BinaryQuantizer(m)
    return DeltaModState(state.s + binary_quantize(q, x - state.s))


def delta_mod_ensemble(source, m, n_trajs, horizon, s0=0.0, master_seed=None,
                       burn_in=None):
    """Run n_trajs seeded tracker trajectories; returns (x, s) with shapes
    (n, T) and (n, T+1)."""
    kwargs = {} if burn_in is None else {"burn_in": burn_in}
    x = sample_paths(source, n_trajs, horizon, master_seed=master_seed, **kwargs)
    s0_arr = np.full(n_trajs, float(s0))
    s = _kernels.delta_mod_paths(x, float(m), s0_arr)
    return x, s


@dataclass(frozen=True)
class StabilityPrecheck:
    """Tail-probability check P(X >= m) < 1/2 and P(X <= -m) < 1/2."""

    m: float
    n_samples: int
    p_upper: float
    p_lower: float
    halfwidth: float
    passed: bool
    analytic_upper: float | None = None
    analytic_lower: float | None = None


def _normal_sf(z):
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def check_delta_mod_stability(source: SourceSpec, m: float, n_samples: int) -> StabilityPrecheck:
    """Monte Carlo estimate of both tail probabilities of the stationary
    source; for iid Gaussian sources the exact normal CDF values are attached.
    Passes iff both estimated tails are below 1/2."""
    if m <= 0.0:
        raise DomainError(f"m must be positive, got {m!r}")
    if n_samples < 10_000:
        raise DomainError("need at least 10^4 samples for the tail estimate")
    source = validate_spec(source)
    x = sample_paths(source, 1, n_samples).ravel()
    p_up = float(np.mean(x >= m))
    p_lo = float(np.mean(x <= -m))
    # 3-sigma binomial half-width at the worst case p = 1/2
    halfwidth = 3.0 * 0.5 / math.sqrt(n_samples)
    analytic_up = analytic_lo = None
    if source.kind is SourceKind.IID:
        analytic_up = _normal_sf((m - source.mean_shift) / source.noise_std)
        analytic_lo = _normal_sf((m + source.mean_shift) / source.noise_std)
        passed = analytic_up < 0.5 and analytic_lo < 0.5
    else:
        passed = p_up < 0.5 and p_lo < 0.5
    return StabilityPrecheck(m=float(m), n_samples=n_samples, p_upper=p_up,
                             p_lower=p_lo, halfwidth=halfwidth, passed=passed,
                             analytic_upper=analytic_up, analytic_lower=analytic_lo)


# ---------------------------------------------------------------------------
# Goodman-Gersho adaptive step size


@dataclass(frozen=True)
class GGPolicy:
    """Staircase Q_2: cell c covers r in (thresholds[c-1], thresholds[c]] and
    multiplies delta by 2^(log_steps[c] * p/q)."""

    thresholds: tuple
    log_steps: tuple
    spacing: LatticeSpacing = LatticeSpacing(1, 1)
    require_coprime: bool = False

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(float(t) for t in self.thresholds))
        object.__setattr__(self, "log_steps", tuple(int(a) for a in self.log_steps))
        th, st = self.thresholds, self.log_steps
        if len(st) != len(th) + 1:
            raise ValueError("need one log step per threshold cell")
        if any(t < 0.0 for t in th) or list(th) != sorted(th) or len(set(th)) != len(th):
            raise ValueError("thresholds must be ascending nonnegative reals")
        if list(st) != sorted(st):
            raise ValueError("Q_2 must be nondecreasing: log steps must be nondecreasing")
        if st[0] >= 0:
            raise ValueError("first cell must contract: Q_2(0) < 1 requires a negative step")
        if st[-1] <= 0:
            raise ValueError("last cell must expand: zeta > 1 requires a positive step")
        if self.require_coprime and not self.coprime:
            raise ValueError(f"log steps {st} share a common divisor; "
                             "ergodicity needs pairwise relatively prime steps")

    @property
    def coprime(self):
        return steps_coprime(self.log_steps)

    def q2_values(self):
        """Realized multipliers per cell."""
        return tuple(pow2(a * self.spacing.ratio) for a in self.log_steps)


@dataclass(frozen=True)
class GGState:
    """Exact lattice position of the bin size: log2(delta) = log2_b + j*p/q."""

    log_index: int
    log2_b: float = 0.0
    spacing: LatticeSpacing = LatticeSpacing(1, 1)

    @property
    def delta(self):
        return pow2(self.log2_b + self.log_index * self.spacing.ratio)


def gg_step(state: GGState, policy: GGPolicy, x: float) -> GGState:
    """One bin-size update delta' = delta * Q_2(|x|/delta), on the lattice."""
    if not math.isfinite(x):
        raise NonFiniteInputError(f"non-finite source sample {x!r}")
    r = abs(x) / state.delta
    cell = 0
    th = policy.thresholds
    while cell < len(th) and th[cell] < r:
        cell += 1
    return replace(state, log_index=state.log_index + policy.log_steps[cell])


def gg_ensemble(source, policy, n_trajs, horizon, j0=0, log2_b=0.0,
                master_seed=None, burn_in=None):
    """Run the lattice recursion over an ensemble; returns (x, j) with j the
    (n, T+1) integer index paths."""
    kwargs = {} if burn_in is None else {"burn_in": burn_in}
    x = sample_paths(source, n_trajs, horizon, master_seed=master_seed, **kwargs)
    j0_arr = np.full(n_trajs, int(j0), dtype=np.int64)
    j = _kernels.gg_paths(x, np.asarray(policy.thresholds),
                          np.asarray(policy.log_steps, dtype=np.int64),
                          j0_arr, float(log2_b), policy.spacing.ratio)
    return x, j


def lattice_reachability(policy_or_steps, horizon) -> set:
    """Breadth-first set of lattice indices reachable with at most ``horizon``
    step additions. With pairwise relatively prime steps this eventually covers
    every integer (Bezout)."""
    if horizon < 1:
        raise DomainError("horizon must be >= 1")
    steps = getattr(policy_or_steps, "log_steps", policy_or_steps)
    reachable = {0}
    frontier = {0}
    for _ in range(horizon):
        frontier = {r + s for r in frontier for s in steps} - reachable
        reachable |= frontier
        if not frontier:
            break
    return reachable


# ---------------------------------------------------------------------------
# Zoom quantizer for networked control


@dataclass(frozen=True)
class ZoomState:
    """Quantized state estimate plus the exact lattice position of delta.

    zoom_out_step / zoom_in_step are the integer log-steps of the multipliers
    |a|+delta_gap and alpha; both are exact powers of 2^(p/q).
    """

    xhat: float
    log_index: int
    a: float
    b: float
    K: int
    zoom_out_step: int
    zoom_in_step: int
    log2_b: float = 0.0
    log2_L: float = 0.0
    spacing: LatticeSpacing = LatticeSpacing(1, 1)

    def __post_init__(self):
        if abs(self.a) < 1.0:
            raise DomainError(f"plant gain must satisfy |a| >= 1, got {self.a!r}")
        if self.b == 0.0:
            raise DomainError("control gain b must be nonzero")
        if self.K < 2:
            raise ValueError("need K >= 2 granular bins")
        if self.zoom_in_step >= 0:
            raise ValueError("zoom-in multiplier alpha must satisfy alpha < 1")
        if self.zoom_out <= abs(self.a):
            raise ValueError("zoom-out multiplier must exceed |a| (delta_gap > 0)")

    @property
    def delta(self):
        return pow2(self.log2_b + self.log_index * self.spacing.ratio)

    @property
    def rprime(self):
        return math.log2(self.K)

    @property
    def alpha(self):
        return pow2(self.zoom_in_step * self.spacing.ratio)

    @property
    def zoom_out(self):
        return pow2(self.zoom_out_step * self.spacing.ratio)

    @property
    def delta_gap(self):
        """The delta of |a| + delta in the zoom-out rule."""
        return self.zoom_out - abs(self.a)

    @property
    def L(self):
        return pow2(self.log2_L)

    @property
    def coprime(self):
        return steps_coprime((self.zoom_out_step, self.zoom_in_step))


def make_zoom_state(a, b, K, alpha, zoom_out, L=1.0, delta0=None,
                    spacing=LatticeSpacing(1, 1), xhat=0.0):
    """Build a ZoomState, rounding alpha and zoom_out to the nearest exact
    lattice powers. Returns (state, notes) where notes report any rounding
    and a non-coprime step warning."""
    notes = []
    in_step, alpha_real = round_log2_to_lattice(alpha, spacing)
    if alpha_real != alpha:
        notes.append(f"alpha rounded {alpha} -> {alpha_real} (lattice index {in_step})")
    out_step, out_real = round_log2_to_lattice(zoom_out, spacing)
    if out_real != zoom_out:
        notes.append(f"zoom-out rounded {zoom_out} -> {out_real} (lattice index {out_step})")
    if L <= 0.0:
        raise ValueError("floor L must be positive")
    log2_L = math.log2(L)
    if delta0 is None:
        delta0 = L
    # place the lattice origin at delta0 so the index starts at 0
    state = ZoomState(xhat=xhat, log_index=0, a=float(a), b=float(b), K=int(K),
                      zoom_out_step=out_step, zoom_in_step=in_step,
                      log2_b=math.log2(delta0), log2_L=log2_L, spacing=spacing)
    if not state.coprime:
        notes.append(f"log steps ({out_step}, {in_step}) are not relatively prime "
                     f"(gcd {math.gcd(abs(out_step), abs(in_step))}); the ergodicity "
                     "hypothesis is violated")
    return state, notes


def zoom_step(state: ZoomState, x: float):
    """One zoom update: quantize, control, and move delta on its lattice.

    Returns (new_state, u). delta'/delta is exactly one of
    {zoom_out, alpha, 1}: zoom out on overflow, zoom in above the floor L,
    hold below it.
    """
    if not math.isfinite(x):
        raise NonFiniteInputError(f"non-finite plant state {x!r}")
    delta = state.delta
    q = UniformQuantizer(state.K, delta)
    xhat = uniform_quantize(q, x)
    u = -(state.a / state.b) * xhat
    # r = |x / (delta * 2^(R'-1))| > 1 is exactly the overflow condition
    half = (0.5 * state.K) * delta
    e = state.log2_b + state.log_index * state.spacing.ratio
    if abs(x) > half:
        j = state.log_index + state.zoom_out_step
    elif e >= state.log2_L:
        j = state.log_index + state.zoom_in_step
    else:
        j = state.log_index
    return replace(state, xhat=xhat, log_index=j), u


def linear_paths(x, c, d, s0):
    """Linear test scheme s' = c*s + d*x over an ensemble; returns (n, T+1).

    Covers the contraction (c < 1, d = 0) and absorbing (c = 1, d = 0) control
    cases used to exercise the diagnostics.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    n, T = x.shape
    s = np.empty((n, T + 1))
    cur = np.broadcast_to(np.asarray(s0, dtype=np.float64), (n,)).copy()
    s[:, 0] = cur
    for t in range(T):
        cur = c * cur + d * x[:, t]
        s[:, t + 1] = cur
    return s


def required_rate(a):
    """Minimum channel rate for stabilizability: R_threshold = log2(ceil|a|+1)
    and the smallest K >= 2 whose rate log2(K+1) exceeds it."""
    if abs(a) < 1.0:
        raise DomainError(f"rate theorem assumes |a| >= 1, got {a!r}")
    threshold = math.log2(math.ceil(abs(a)) + 1)
    k_min = max(2, math.ceil(abs(a)))
    while math.log2(k_min + 1) <= threshold:
        k_min += 1
    return k_min, threshold
