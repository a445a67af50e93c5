"""Static quantizer maps used by the adaptive schemes.

The uniform quantizer has K granular bins of width delta plus a distinguished
overflow output. Bin membership is half-open [lo, hi), the exact upper edge
x = K*delta/2 maps to the top reconstruction level, and anything outside
[-K*delta/2, K*delta/2] maps to 0 (the overflow symbol). Edge comparisons are
done against the multiplied-out edges (k - K/2)*delta so results are bit-exact
against a brute-force bin scan.
"""

import math
from dataclasses import dataclass

from .errors import NonFiniteInputError


@dataclass(frozen=True)
class UniformQuantizer:
    """K granular bins of width delta, symmetric about 0.

    K may be odd (the networked-control scheme uses K = ceil(|a|+eps), which
    is 3 for a = 2); for even K the reconstruction levels sit at half-integer
    multiples of delta and the overflow symbol 0 is not a granular level.
    """

    K: int
    delta: float

    def __post_init__(self):
        if not isinstance(self.K, int) or self.K < 2:
            raise ValueError(f"K must be an integer >= 2, got {self.K!r}")
        if not (self.delta > 0.0) or not math.isfinite(self.delta):
            raise ValueError(f"delta must be a positive real, got {self.delta!r}")

    @property
    def half_range(self):
        return (0.5 * self.K) * self.delta

    @property
    def levels(self):
        """The K granular reconstruction levels, ascending."""
        return [(k - 0.5 * (self.K + 1)) * self.delta for k in range(1, self.K + 1)]


@dataclass(frozen=True)
class BinaryQuantizer:
    """One-bit quantizer: +m for z >= 0, -m for z < 0."""

    m: float

    def __post_init__(self):
        if not (self.m > 0.0) or not math.isfinite(self.m):
            raise ValueError(f"m must be a positive real, got {self.m!r}")


def uniform_quantize(q: UniformQuantizer, x: float) -> float:
    """Quantize x with the uniform quantizer q.

    Returns the midpoint of the containing bin, the top level for the exact
    edge x = K*delta/2, or 0 outside the granular range.
    """
    if not math.isfinite(x):
        raise NonFiniteInputError(f"cannot quantize {x!r}")
    K, delta = q.K, q.delta
    half = (0.5 * K) * delta
    if x == half:
        return (0.5 * (K - 1)) * delta
    if x < -half or x > half:
        return 0.0
    # initial guess from division, then correct against the exact edges so the
    # result agrees with edgewise interval membership even when x/delta rounds
    # across a boundary
    j = math.floor(x / delta + 0.5 * K)
    j = min(max(j, 0), K - 1)
    while j > 0 and x < (j - 0.5 * K) * delta:
        j -= 1
    while j < K - 1 and x >= (j + 1 - 0.5 * K) * delta:
        j += 1
    return (j - 0.5 * (K - 1)) * delta


def binary_quantize(q: BinaryQuantizer, z: float) -> float:
    """Sign quantizer of the delta-modulation tracker: +m iff z >= 0."""
    if not math.isfinite(z):
        raise NonFiniteInputError(f"cannot quantize {z!r}")
    return q.m if z >= 0.0 else -q.m
