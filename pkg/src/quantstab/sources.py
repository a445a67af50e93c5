"""Stationary scalar source generators (iid / AR(N) / truncated MA).

All randomness flows from integer seeds through numpy's SeedSequence; two
streams built from the same spec emit identical samples. AR streams are
burned in (default 10^4 steps) so consumer-visible samples are approximately
stationary; MA streams pre-draw their noise lags and are exactly stationary
from the first sample.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import EmptyCoefficientsError, NonpositiveNoiseError, UnstableARError

DEFAULT_BURN_IN = 10_000

AR_RADIUS_THRESHOLD = 1.0 - 1e-9


class SourceKind(enum.Enum):
    IID = "iid"
    AR = "ar"
    MA = "ma"


@dataclass(frozen=True)
class SourceSpec:
    """Description of a stationary scalar source with seeded Gaussian noise."""

    kind: SourceKind
    coefficients: tuple = ()
    noise_std: float = 1.0
    mean_shift: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))


def ar_spectral_radius(coefficients):
    """Spectral radius of the companion matrix of 1 - sum alpha_i z^-(i+1)."""
    alpha = np.asarray(coefficients, dtype=np.float64)
    n = alpha.shape[0]
    companion = np.zeros((n, n))
    companion[0, :] = alpha
    if n > 1:
        companion[1:, :-1] = np.eye(n - 1)
    return float(np.max(np.abs(np.linalg.eigvals(companion))))


def validate_spec(spec: SourceSpec) -> SourceSpec:
    """Validate field constraints; for AR, require all roots strictly inside
    the unit circle (companion spectral radius < 1 - 1e-9)."""
    if not (spec.noise_std > 0.0) or not math.isfinite(spec.noise_std):
        raise NonpositiveNoiseError(f"noise_std must be positive, got {spec.noise_std!r}")
    if spec.kind in (SourceKind.AR, SourceKind.MA) and not spec.coefficients:
        raise EmptyCoefficientsError(f"{spec.kind.value} source needs coefficients")
    if spec.kind is SourceKind.AR:
        radius = ar_spectral_radius(spec.coefficients)
        if radius >= AR_RADIUS_THRESHOLD:
            raise UnstableARError(
                f"AR companion spectral radius {radius:.6g} >= {AR_RADIUS_THRESHOLD}")
    return spec


class SourceStream:
    """Scalar sample stream for one source spec.

    ``noise`` injects a deterministic W sequence (a callable count -> array)
    for oracle tests; ``initial_lags`` overrides the AR start state (most
    recent value first). Burn-in happens at construction.
    """

    def __init__(self, spec, burn_in=DEFAULT_BURN_IN, noise=None, initial_lags=None):
        self.spec = validate_spec(spec)
        self.steps = 0
        if noise is None:
            rng = np.random.default_rng(np.random.SeedSequence((spec.seed, 0)))
            std = spec.noise_std
            self._noise = lambda count: std * rng.standard_normal(count)
        else:
            self._noise = noise

        if spec.kind is SourceKind.AR:
            n_lags = len(spec.coefficients)
            if initial_lags is None:
                self._lags = np.zeros(n_lags)
            else:
                self._lags = np.asarray(initial_lags, dtype=np.float64).copy()
                if self._lags.shape != (n_lags,):
                    raise ValueError(f"expected {n_lags} initial lags")
        elif spec.kind is SourceKind.MA:
            n_lags = len(spec.coefficients) - 1
            self._wlags = self._noise(n_lags) if n_lags else np.zeros(0)
        for _ in range(burn_in):
            self.next_sample()

    def next_sample(self) -> float:
        """Emit the next X_t and advance the stream."""
        spec = self.spec
        w = float(self._noise(1)[0])
        if spec.kind is SourceKind.IID:
            value = w
        elif spec.kind is SourceKind.AR:
            alpha = spec.coefficients
            acc = alpha[0] * self._lags[0]
            for i in range(1, len(alpha)):
                acc = acc + alpha[i] * self._lags[i]
            value = acc + w
            self._lags[1:] = self._lags[:-1]
            self._lags[0] = value
        else:  # MA: x_t = sum_i alpha[i] * w_{t-i}, truncated
            alpha = spec.coefficients
            value = alpha[0] * w
            for i in range(1, len(alpha)):
                value += alpha[i] * self._wlags[i - 1]
            if self._wlags.shape[0]:
                self._wlags[1:] = self._wlags[:-1]
                self._wlags[0] = w
        self.steps += 1
        return value + spec.mean_shift

    def take(self, count) -> np.ndarray:
        return np.array([self.next_sample() for _ in range(count)])


def trajectory_seed(master_seed, index):
    """Entropy tuple for trajectory ``index``; master_seed may itself be a
    tuple (used to namespace diagnostic sub-ensembles)."""
    if isinstance(master_seed, tuple):
        return (*master_seed, index)
    return (master_seed, index)


def _trajectory_noise(master_seed, index, count, noise_std):
    rng = np.random.default_rng(np.random.SeedSequence(trajectory_seed(master_seed, index)))
    return noise_std * rng.standard_normal(count)


def sample_paths(spec, n_paths, length, master_seed=None, burn_in=DEFAULT_BURN_IN):
    """Generate an (n_paths, length) ensemble of burned-in sample paths.

    Trajectory i is seeded from (master_seed, i); path 0 with the default
    master (the spec's own seed) reproduces SourceStream exactly.
    """
    spec = validate_spec(spec)
    if master_seed is None:
        master_seed = spec.seed
    total = length + burn_in
    if spec.kind is SourceKind.IID:
        w = np.stack([_trajectory_noise(master_seed, i, total, spec.noise_std)
                      for i in range(n_paths)])
        x = w[:, burn_in:]
    elif spec.kind is SourceKind.AR:
        w = np.stack([_trajectory_noise(master_seed, i, total, spec.noise_std)
                      for i in range(n_paths)])
        alpha = np.asarray(spec.coefficients)
        init = np.zeros((n_paths, alpha.shape[0]))
        x = _kernels.ar_paths(w, alpha, init)[:, burn_in:]
    else:
        alpha = np.asarray(spec.coefficients)
        n_lags = alpha.shape[0] - 1
        w = np.stack([_trajectory_noise(master_seed, i, total + n_lags, spec.noise_std)
                      for i in range(n_paths)])
        # w[:, :n_lags] are the pre-drawn lags; sample t uses w[t+n_lags-i]
        x = alpha[0] * w[:, n_lags:]
        for i in range(1, alpha.shape[0]):
            x = x + alpha[i] * w[:, n_lags - i:total + n_lags - i]
        x = x[:, burn_in:]
    return x + spec.mean_shift
