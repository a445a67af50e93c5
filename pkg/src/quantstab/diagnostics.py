"""Empirical stability diagnostics for (x_k, s_k) trajectory ensembles.

Tightness is the Monte Carlo Cesaro average of P(|S_k| >= M); occupation
histograms estimate the expected occupation measure on a fixed bin family
(with unbounded tail bins); the AMS and ergodicity checks test the observable
consequence of the theory, initial-condition and shift indifference of Cesaro
averages, at a statistical tolerance of se_multiplier standard errors plus an
absolute floor.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (BadEdgesError, DomainError, EmptyEnsembleError,
                     UnboundedFunctionalError)

DEFAULT_SE_MULTIPLIER = 3.0
DEFAULT_ABS_FLOOR = 0.01
DEFAULT_BATCHES = 32
# an SE term this many times the floor marks an underpowered (inconclusive) run
UNDERPOWERED_FACTOR = 10.0


@dataclass(frozen=True)
class Verdict:
    status: str  # "pass" | "fail" | "inconclusive"
    statistic: float
    tolerance: float
    reason: str = ""

    @property
    def passed(self):
        return self.status == "pass"


@dataclass(frozen=True)
class Functional:
    """Bounded test functional f(x, s) with its declared bound."""

    name: str
    fn: object
    bound: float

    def __call__(self, x, s):
        return self.fn(np.asarray(x, dtype=np.float64), np.asarray(s, dtype=np.float64))


def make_functional(spec: str) -> Functional:
    """Build a functional from an id like 'tanh', 'indicator_abs_le:5',
    'indicator_nonneg', 'one', or 'clip_abs:B'."""
    name, _, arg = spec.partition(":")
    if name == "one":
        return Functional(spec, lambda x, s: np.ones_like(s), 1.0)
    if name == "tanh":
        return Functional(spec, lambda x, s: np.tanh(s), 1.0)
    if name == "indicator_nonneg":
        return Functional(spec, lambda x, s: (s >= 0.0).astype(np.float64), 1.0)
    if name == "indicator_abs_le":
        m = float(arg)
        return Functional(spec, lambda x, s: (np.abs(s) <= m).astype(np.float64), 1.0)
    if name == "clip_abs":
        b = float(arg)
        return Functional(spec, lambda x, s: np.minimum(np.abs(s), b), b)
    if name == "abs_s":
        # unbounded; callers must declare their own bound instead
        raise DomainError("abs_s has no finite bound; use clip_abs:B")
    raise DomainError(f"unknown functional id {spec!r}")


# ---------------------------------------------------------------------------
# Tightness and time averages


def tightness_statistic(s, M) -> float:
    """(1/T) sum_k fraction of trajectories with |s_k| >= M."""
    s = np.atleast_2d(np.asarray(s, dtype=np.float64))
    if s.size == 0:
        raise EmptyEnsembleError("tightness of an empty ensemble")
    if M <= 0.0:
        raise DomainError("M must be positive")
    return float(np.mean(np.abs(s) >= M))


def tightness_curve(s, m_grid) -> dict:
    """M -> tightness statistic; nonincreasing in M by construction."""
    return {float(M): tightness_statistic(s, M) for M in m_grid}


def time_average(x, s, functional: Functional):
    """Sample-path Cesaro average of f along one trajectory.

    Returns (average, running) where running[k] is the average over the first
    k+1 steps. Raises UnboundedFunctional if |f| exceeds the declared bound.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    s = np.asarray(s, dtype=np.float64).ravel()
    if x.size == 0:
        raise EmptyEnsembleError("time average of an empty trajectory")
    values = np.asarray(functional(x, s), dtype=np.float64)
    observed = float(np.max(np.abs(values)))
    if observed > functional.bound * (1.0 + 1e-12):
        raise UnboundedFunctionalError(
            f"{functional.name}: observed |f| = {observed:.6g} exceeds bound {functional.bound}")
    running = np.cumsum(values) / np.arange(1, values.size + 1)
    return float(running[-1]), running


def batch_means_se(values, n_batches: int = DEFAULT_BATCHES) -> float:
    """Batch-means standard error of the mean of a correlated series."""
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size < 2 * n_batches:
        raise DomainError(f"need at least {2 * n_batches} samples for {n_batches} batches")
    usable = (values.size // n_batches) * n_batches
    batches = values[:usable].reshape(n_batches, -1).mean(axis=1)
    return float(np.std(batches, ddof=1) / math.sqrt(n_batches))


# ---------------------------------------------------------------------------
# Occupation histograms


@dataclass(frozen=True)
class OccupationHistogram:
    """Binned estimate of the expected occupation measure.

    edges is a tuple of per-coordinate interior edge arrays (one entry for a
    marginal histogram, two for a joint (x, s) histogram); mass has one more
    bin than edges per coordinate, the extra two being the unbounded tails.
    """

    edges: tuple
    mass: np.ndarray
    t_samples: int
    n_trajs: int


def _check_edges(edges):
    edges = np.asarray(edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 1 or np.any(np.diff(edges) <= 0.0):
        raise BadEdgesError("bin edges must be a strictly ascending 1-D list")
    return edges


def occupation_histogram(s, edges) -> OccupationHistogram:
    """Marginal occupation histogram of the state over interior ``edges``,
    plus the two unbounded tail bins."""
    s = np.atleast_2d(np.asarray(s, dtype=np.float64))
    if s.size == 0:
        raise EmptyEnsembleError("occupation histogram of an empty ensemble")
    edges = _check_edges(edges)
    counts = np.bincount(np.digitize(s.ravel(), edges), minlength=edges.size + 1)
    return OccupationHistogram(edges=(edges,), mass=counts / s.size,
                               t_samples=s.shape[1], n_trajs=s.shape[0])


def occupation_histogram_joint(x, s, x_edges, s_edges) -> OccupationHistogram:
    """Joint (x, s) occupation histogram on a product bin family."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    s = np.atleast_2d(np.asarray(s, dtype=np.float64))
    if x.size == 0 or s.shape != x.shape:
        raise EmptyEnsembleError("joint histogram needs matching nonempty ensembles")
    x_edges = _check_edges(x_edges)
    s_edges = _check_edges(s_edges)
    nx, ns = x_edges.size + 1, s_edges.size + 1
    codes = np.digitize(x.ravel(), x_edges) * ns + np.digitize(s.ravel(), s_edges)
    counts = np.bincount(codes, minlength=nx * ns).reshape(nx, ns)
    return OccupationHistogram(edges=(x_edges, s_edges), mass=counts / x.size,
                               t_samples=x.shape[1], n_trajs=x.shape[0])


def l1_distance(h1: OccupationHistogram, h2: OccupationHistogram) -> float:
    if h1.mass.shape != h2.mass.shape:
        raise BadEdgesError("histograms live on different bin families")
    return float(np.sum(np.abs(h1.mass - h2.mass)))


def tail_mass(hist: OccupationHistogram, M) -> float:
    """Mass of bins entirely inside {|s| >= M} (marginal histograms only).

    Equals the tightness statistic exactly when M coincides with a bin edge.
    """
    if len(hist.edges) != 1:
        raise BadEdgesError("tail mass is defined for marginal histograms")
    edges = hist.edges[0]
    lo = np.concatenate(([-np.inf], edges))
    hi = np.concatenate((edges, [np.inf]))
    outside = (lo >= M) | (hi <= -M)
    return float(np.sum(hist.mass[outside]))


# ---------------------------------------------------------------------------
# AMS and ergodicity consistency


def _resolve_status(dev, tol, se_term, floor_term):
    if dev > tol:
        return "fail"
    if se_term > UNDERPOWERED_FACTOR * floor_term and dev > floor_term:
        return "inconclusive"
    return "pass"


def ams_consistency(runner, initials, shifts, T, n_trajs=16, window=3,
                    x_edges=(-2.0, -0.5, 0.5, 2.0),
                    s_edges=(-10.0, -5.0, -1.0, 1.0, 5.0, 10.0),
                    se_multiplier=DEFAULT_SE_MULTIPLIER,
                    abs_floor=DEFAULT_ABS_FLOOR, tight_m=None) -> Verdict:
    """Shift/initial-condition indifference of Cesaro-averaged cylinder masses.

    ``runner(initial, n_trajs, length, salt)`` must return aligned (x, s)
    arrays of shape (n_trajs, length). For each initial condition and shift n
    the empirical masses of the cylinder events (x_k..x_{k+window-1}, s_k),
    k = n..n+T-1, are averaged per trajectory; the verdict compares the means
    across all (initial, shift) pairs cell by cell at tolerance
    se_multiplier * pooled SE + abs_floor.

    If ``tight_m`` is given and the ensemble is not tight at that radius, the
    verdict is inconclusive with reason "non-tight" (the AMS theorems assume
    tightness; pass/fail would be meaningless).
    """
    if len(shifts) < 2 or len(initials) < 2:
        raise DomainError("need at least two shifts and two initial conditions")
    shifts = sorted(int(n) for n in shifts)
    length = max(shifts) + T + window
    x_edges = _check_edges(x_edges)
    s_edges = _check_edges(s_edges)
    nx, ns = x_edges.size + 1, s_edges.size + 1
    n_cells = nx ** window * ns

    means, ses, tight_vals = [], [], []
    for salt, initial in enumerate(initials):
        x, s = runner(initial, n_trajs, length, salt)
        x = np.asarray(x, dtype=np.float64)
        s = np.asarray(s, dtype=np.float64)[:, :x.shape[1]]
        dx = np.digitize(x, x_edges)
        ds = np.digitize(s, s_edges)
        if tight_m is not None:
            tight_vals.append(tightness_statistic(s[:, :T], tight_m))
        for shift in shifts:
            codes = np.zeros((n_trajs, T), dtype=np.int64)
            for w in range(window):
                codes = codes * nx + dx[:, shift + w:shift + w + T]
            codes = codes * ns + ds[:, shift:shift + T]
            per_traj = np.stack([
                np.bincount(codes[i], minlength=n_cells) / T
                for i in range(n_trajs)])
            means.append(per_traj.mean(axis=0))
            ses.append(per_traj.std(axis=0, ddof=1) / math.sqrt(n_trajs))

    if tight_vals and max(tight_vals) > 0.5:
        return Verdict(status="inconclusive", statistic=max(tight_vals),
                       tolerance=0.5, reason="non-tight")

    means = np.stack(means)
    pooled_se = np.sqrt(np.mean(np.square(np.stack(ses)), axis=0))
    dev = means.max(axis=0) - means.min(axis=0)
    tol = se_multiplier * pooled_se + abs_floor
    worst = int(np.argmax(dev - tol))
    status = _resolve_status(dev[worst], tol[worst],
                             float(se_multiplier * pooled_se[worst]), abs_floor)
    return Verdict(status=status, statistic=float(dev[worst]),
                   tolerance=float(tol[worst]),
                   reason=f"worst cylinder cell {worst}")


def ergodicity_consistency(runner, initials, functionals, T,
                           se_multiplier=DEFAULT_SE_MULTIPLIER,
                           abs_floor=DEFAULT_ABS_FLOOR,
                           n_batches=DEFAULT_BATCHES):
    """Initial-condition indifference of sample-path time averages.

    ``runner(initial, 1, T, salt)`` provides one independent long trajectory
    per initial condition. Returns (verdict, table) with
    table[(functional, initial)] = (average, batch-means SE). The verdict is
    the worst pairwise comparison over initials, per functional, at tolerance
    se_multiplier * sqrt(se_i^2 + se_j^2) + abs_floor * bound; it is symmetric
    in the order of the initial conditions.
    """
    if len(initials) < 3:
        raise DomainError("need at least three distinct initial conditions")
    if len(functionals) < 3:
        raise DomainError("need at least three bounded functionals")
    table = {}
    for salt, initial in enumerate(initials):
        x, s = runner(initial, 1, T, salt)
        x = np.asarray(x, dtype=np.float64).ravel()
        s = np.asarray(s, dtype=np.float64).ravel()[:x.size]
        for f in functionals:
            avg, _ = time_average(x, s, f)
            table[(f.name, initial)] = (avg, batch_means_se(f(x, s), n_batches))

    worst = Verdict(status="pass", statistic=0.0, tolerance=math.inf)
    for f in functionals:
        floor_term = abs_floor * f.bound
        for i, ini_i in enumerate(initials):
            for ini_j in initials[i + 1:]:
                avg_i, se_i = table[(f.name, ini_i)]
                avg_j, se_j = table[(f.name, ini_j)]
                dev = abs(avg_i - avg_j)
                se_term = se_multiplier * math.sqrt(se_i ** 2 + se_j ** 2)
                tol = se_term + floor_term
                status = _resolve_status(dev, tol, se_term, floor_term)
                candidate = Verdict(status=status, statistic=dev, tolerance=tol,
                                    reason=f"{f.name}: initials {ini_i} vs {ini_j}")
                if _worse(candidate, worst):
                    worst = candidate
    return worst, table


_SEVERITY = {"pass": 0, "inconclusive": 1, "fail": 2}


def _worse(a: Verdict, b: Verdict) -> bool:
    if _SEVERITY[a.status] != _SEVERITY[b.status]:
        return _SEVERITY[a.status] > _SEVERITY[b.status]
    return a.statistic - a.tolerance > b.statistic - b.tolerance


@dataclass
class StabilityReport:
    """Bundle of diagnostics for one experiment run."""

    tightness_curve: dict = field(default_factory=dict)
    time_averages: dict = field(default_factory=dict)
    occupation_l1_deltas: list = field(default_factory=list)
    verdicts: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def worst_status(self):
        ranked = [v.status for v in self.verdicts.values()]
        for status in ("fail", "inconclusive"):
            if status in ranked:
                return status
        return "pass"
