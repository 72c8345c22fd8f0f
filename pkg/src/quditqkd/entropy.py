"""Shannon entropy helpers and validated probability vectors.

All entropies are in bits and use the convention 0 * log2(0) = 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Vectors whose sum is within this tolerance of 1 are renormalized;
# anything further off is rejected.
NORM_TOL = 1e-9

# Entries slightly negative from floating-point cancellation are clamped.
NEG_CLAMP = 1e-12


@dataclass(frozen=True)
class ProbVec:
    """Finite probability vector, renormalized on construction.

    Raises ValueError if an entry is negative beyond floating fuzz or the
    sum deviates from 1 by more than NORM_TOL.
    """

    entries: tuple[float, ...]

    def __init__(self, entries: Iterable[float]):
        vals = [float(x) for x in entries]
        if not vals:
            raise ValueError("probability vector must be non-empty")
        for x in vals:
            if not math.isfinite(x):
                raise ValueError(f"non-finite probability entry {x!r}")
            if x < -NEG_CLAMP:
                raise ValueError(f"negative probability entry {x!r}")
        vals = [max(x, 0.0) for x in vals]
        total = math.fsum(vals)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        if total != 1.0:
            vals = [x / total for x in vals]
        object.__setattr__(self, "entries", tuple(vals))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)


def _entropy_bits(p: np.ndarray) -> float:
    """Entropy of an already-validated weight array (zeros allowed)."""
    p = p[p > 0.0]
    if p.size == 0:
        return 0.0
    return float(-np.sum(p * np.log2(p)))


def shannon_entropy_bits(dist: ProbVec | Sequence[float]) -> float:
    """Shannon entropy H(p) = -sum p_i log2 p_i of a probability vector.

    Accepts a ProbVec or any sequence that validates as one.  Invariant
    under permutation and under padding with zero entries; bounded by
    log2(len(dist)).
    """
    if not isinstance(dist, ProbVec):
        dist = ProbVec(dist)
    return _entropy_bits(dist.as_array())


def binary_entropy(p: float) -> float:
    """H2(p), the entropy of the distribution (p, 1 - p)."""
    p = float(p)
    if not -NORM_TOL <= p <= 1.0 + NORM_TOL:
        raise ValueError(f"binary_entropy expects p in [0, 1], got {p!r}")
    p = min(max(p, 0.0), 1.0)
    if p == 0.0 or p == 1.0:
        return 0.0
    return float(-p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p))
