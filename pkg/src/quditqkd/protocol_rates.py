"""Ideal-apparatus key-rate curves for the comparator protocols.

Curves are normalized to secret bits per packet (per channel use) so that
different protocols can share a plot: qubit protocols carry their sifting
factor explicitly, the qudit scheme builds q = 1/3 into its rate already.
Error-rate axes are "ber" (bit error rate) and "der" (dit error rate),
linked for symmetric channels by e = 2 e* / 3.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .entropy import ProbVec, binary_entropy, shannon_entropy_bits
from .cww4 import Q_BASIS_MATCH, rate_cww4_ber, rate_cww4_der

# Sifting factor presets for the four-state two-basis scheme.
SS4_SIFT_UNBIASED = 0.5
SS4_SIFT_EXTREME = 1.0
# Strongly biased basis choice p = 0.9; asymptotic sift p^2 + (1-p)^2.
ISLAM_BIAS_P = 0.9
SS4_SIFT_BIASED = ISLAM_BIAS_P**2 + (1.0 - ISLAM_BIAS_P) ** 2

PROTOCOLS = (
    "six_state",
    "bb84",
    "ss4_unbiased",
    "ss4_biased",
    "ss4_extreme",
    "cww4_der",
    "cww4_ber",
    "reduced_cww4",
)

AXES = ("ber", "der")

# Admissible grid ranges per (protocol, axis); absent axis = unsupported.
_DOMAIN: dict[str, dict[str, tuple[float, float]]] = {
    "six_state": {"ber": (0.0, 2.0 / 3.0), "der": (0.0, 0.75)},
    "bb84": {"ber": (0.0, 0.5)},
    "ss4_unbiased": {"ber": (0.0, 0.5), "der": (0.0, 0.75)},
    "ss4_biased": {"ber": (0.0, 0.5), "der": (0.0, 0.75)},
    "ss4_extreme": {"ber": (0.0, 0.5), "der": (0.0, 0.75)},
    "cww4_der": {"ber": (0.0, 0.5), "der": (0.0, 0.75)},
    "cww4_ber": {"ber": (0.0, 2.0 / 3.0)},
    "reduced_cww4": {"ber": (0.0, 2.0 / 3.0)},
}

# Default comparison curve sets, ordered top to bottom at zero error.
DEFAULT_PROTOCOLS = {
    "der": ("ss4_extreme", "ss4_biased", "ss4_unbiased", "cww4_der", "six_state"),
    "ber": ("ss4_extreme", "ss4_biased", "bb84", "ss4_unbiased", "cww4_ber", "six_state"),
}


def rate_six_state_core(e: float, *, clamp: bool = True) -> float:
    """One-way six-state rate per sifted qubit: 1 - H(1-3e/2, e/2, e/2, e/2)."""
    if not 0.0 <= e <= 2.0 / 3.0:
        raise ValueError(f"bit error rate e = {e!r} outside [0, 2/3]")
    raw = 1.0 - shannon_entropy_bits(ProbVec((1.0 - 1.5 * e, e / 2.0, e / 2.0, e / 2.0)))
    return max(raw, 0.0) if clamp else raw


def rate_bb84(e: float, *, clamp: bool = True) -> float:
    """One-way BB84 rate per sifted qubit: 1 - 2 H2(e)."""
    if not 0.0 <= e <= 0.5:
        raise ValueError(f"bit error rate e = {e!r} outside [0, 1/2]")
    raw = 1.0 - 2.0 * binary_entropy(e)
    return max(raw, 0.0) if clamp else raw


def rate_ss4(e_star: float, sift_factor: float, *, clamp: bool = True) -> float:
    """Two-basis four-state rate per packet at dit error rate e*.

    R = sift_factor * (2 - 2 H(1-e*, e*/3, e*/3, e*/3)) / 2.  The biased
    variants differ only in sift_factor.
    """
    if not 0.0 <= e_star <= 0.75:
        raise ValueError(f"dit error rate e* = {e_star!r} outside [0, 3/4]")
    if not 0.0 < sift_factor <= 1.0:
        raise ValueError(f"sift factor {sift_factor!r} outside (0, 1]")
    t = e_star / 3.0
    spread = shannon_entropy_bits(ProbVec((1.0 - e_star, t, t, t)))
    raw = sift_factor * (2.0 - 2.0 * spread) / 2.0
    return max(raw, 0.0) if clamp else raw


def rate_reduced_cww4(e: float, accept_fraction: float, *, clamp: bool = True) -> float:
    """Two-state-per-basis reduced scheme: accept_fraction * six_state / 2."""
    if not 0.0 <= accept_fraction <= 1.0:
        raise ValueError(f"acceptance fraction {accept_fraction!r} outside [0, 1]")
    raw = accept_fraction * rate_six_state_core(e, clamp=False) / 2.0
    return max(raw, 0.0) if clamp else raw


@dataclass(frozen=True)
class RateCurveSpec:
    """One protocol curve: which rate, on which axis, at which grid points."""

    protocol: str
    axis: str
    grid: tuple[float, ...]
    sift_factor: float = SS4_SIFT_BIASED
    accept_fraction: float = 1.0

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}")
        if self.axis not in _DOMAIN[self.protocol]:
            raise ValueError(f"protocol {self.protocol!r} has no {self.axis} curve")
        grid = tuple(float(x) for x in self.grid)
        lo, hi = _DOMAIN[self.protocol][self.axis]
        for a, b in zip(grid, grid[1:]):
            if not a < b:
                raise ValueError("grid values must be strictly increasing")
        if grid and not (lo <= grid[0] and grid[-1] <= hi):
            raise ValueError(
                f"grid [{grid[0]}, {grid[-1]}] outside {self.protocol} domain [{lo}, {hi}]"
            )
        object.__setattr__(self, "grid", grid)


def curve_value(spec: RateCurveSpec, x: float) -> float:
    """Per-packet rate of spec.protocol at error rate x on spec.axis."""
    der = spec.axis == "der"
    p = spec.protocol
    if p == "six_state":
        e = 2.0 * x / 3.0 if der else x
        return Q_BASIS_MATCH * rate_six_state_core(e)
    if p == "bb84":
        return 0.5 * rate_bb84(x)
    if p in ("ss4_unbiased", "ss4_biased", "ss4_extreme"):
        e_star = x if der else 1.5 * x
        sift = {
            "ss4_unbiased": SS4_SIFT_UNBIASED,
            "ss4_biased": spec.sift_factor,
            "ss4_extreme": SS4_SIFT_EXTREME,
        }[p]
        return rate_ss4(e_star, sift)
    if p == "cww4_der":
        e_star = x if der else 1.5 * x
        return rate_cww4_der(e_star)
    if p == "cww4_ber":
        return rate_cww4_ber(x)
    if p == "reduced_cww4":
        return rate_reduced_cww4(x, spec.accept_fraction)
    raise ValueError(f"unknown protocol {p!r}")


def emit_curve(spec: RateCurveSpec) -> np.ndarray:
    """Evaluate the curve on its grid; returns an (n, 2) array of (x, rate)."""
    points = [(x, curve_value(spec, x)) for x in spec.grid]
    return np.asarray(points, dtype=float).reshape(len(points), 2)


def find_threshold(
    rate: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    tol: float = 1e-9,
) -> float:
    """Smallest error rate at which the curve stops being positive.

    Bisection on the sign of the rate; requires rate(lo) > 0 >= rate(hi),
    which holds for both clamped and raw curves.
    """
    if not rate(lo) > 0.0:
        raise ValueError(f"rate not positive at lo = {lo!r}")
    if rate(hi) > 0.0:
        raise ValueError(f"rate still positive at hi = {hi!r}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rate(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_crossover(
    rate_a: Callable[[float], float],
    rate_b: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    tol: float = 1e-9,
) -> float:
    """Error rate where curve A first exceeds curve B.

    Requires A below B at lo and above at hi; bisection on the difference.
    """
    if not rate_a(lo) < rate_b(lo):
        raise ValueError("curve A not below curve B at the lower bracket")
    if not rate_a(hi) > rate_b(hi):
        raise ValueError("curve A not above curve B at the upper bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rate_a(mid) < rate_b(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
