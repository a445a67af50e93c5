"""Exact base-2 lattice arithmetic for adaptive step sizes.

Adaptive bin sizes are kept as integer indices j with
log2(delta) = log2_b + j * (p/q); the float delta is materialized only when
quantizing. Integral exponents are materialized through ldexp so powers of
two are exact.
"""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LatticeSpacing:
    """Spacing p/q (in log2 units) between admissible bin sizes."""

    p: int = 1
    q: int = 1

    def __post_init__(self):
        if self.p <= 0 or self.q <= 0:
            raise ValueError("lattice spacing must be a positive rational")

    @property
    def ratio(self):
        return self.p / self.q


def pow2(e):
    """2**e, exact (via ldexp) when e is integral."""
    if e == math.floor(e) and abs(e) < 1023.0:
        return math.ldexp(1.0, int(e))
    return math.pow(2.0, e)


def pow2_array(e):
    """Elementwise 2**e, exact (ldexp) where e is integral."""
    e = np.asarray(e, dtype=np.float64)
    out = np.empty_like(e)
    fl = np.floor(e)
    integral = (e == fl) & (np.abs(e) < 1023.0)
    out[integral] = np.ldexp(1.0, fl[integral].astype(np.int32))
    out[~integral] = np.power(2.0, e[~integral])
    return out


def round_log2_to_lattice(value, spacing):
    """Nearest lattice point to ``value``: returns (index, realized value).

    ``realized = 2**(index * p/q)`` is the admissible multiplier closest to
    ``value`` in log space.
    """
    if value <= 0.0 or not math.isfinite(value):
        raise ValueError("lattice multiplier must be a positive finite real")
    index = round(math.log2(value) * spacing.q / spacing.p)
    return index, pow2(index * spacing.ratio)


def steps_coprime(steps):
    """True iff the nonzero |steps| have gcd 1 (Bezout lattice coverage)."""
    nonzero = [abs(int(s)) for s in steps if s != 0]
    if not nonzero:
        return False
    return math.gcd(*nonzero) == 1 if len(nonzero) > 1 else nonzero[0] == 1
