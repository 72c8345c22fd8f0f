"""Two-decoy single-photon estimation and the Poisson forward model.

A weak coherent source at mean photon number mu emits n photons with
Poisson probability, so the observed gain and error rates are Poisson
mixtures of the per-photon-number yields Y_n and error spectra.  Running
the source at three intensities mu > nu > upsilon lets the receiver bound
the vacuum yield Y_0, the single-photon yield Y_1 (lower bounds), and the
single-photon error-class rates e_1^g (upper bounds) from the observed
records alone.  The bounds are the standard asymptotic two-decoy ones;
statistical-fluctuation terms are out of scope.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from .cww4 import ErrorSpectrum4, EstimateClampWarning
from .entropy import NORM_TOL

# Poisson series truncation: terms with mu^n / n! below this are dropped.
SERIES_TOL = 1e-15


@dataclass(frozen=True)
class IntensityRecord:
    """Observed tally for one source intensity: gain and error rates.

    error_rates are the sifted error-class fractions (E^1, E^2, E^3);
    class 0 is the complement.
    """

    intensity: float
    gain: float
    error_rates: tuple[float, float, float]

    def __post_init__(self):
        if not self.intensity > 0.0:
            raise ValueError(f"intensity {self.intensity!r} must be positive")
        if not 0.0 < self.gain <= 1.0:
            raise ValueError(f"gain {self.gain!r} outside (0, 1]")
        rates = tuple(float(x) for x in self.error_rates)
        if len(rates) != 3:
            raise ValueError("error_rates must have exactly 3 entries")
        for x in rates:
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"error rate {x!r} outside [0, 1]")
        if math.fsum(rates) > 1.0 + NORM_TOL:
            raise ValueError(f"error rates sum to {math.fsum(rates)!r} > 1")
        object.__setattr__(self, "error_rates", rates)
        object.__setattr__(self, "intensity", float(self.intensity))
        object.__setattr__(self, "gain", float(self.gain))

    def error_spectrum(self) -> ErrorSpectrum4:
        e1, e2, e3 = self.error_rates
        return ErrorSpectrum4(1.0 - e1 - e2 - e3, e1, e2, e3)


@dataclass(frozen=True)
class SinglePhotonBounds:
    """Decoy-state bounds: Y_0, Y_1 lower bounds, e_1^g upper bounds."""

    y0: float
    y1: float
    e1: ErrorSpectrum4

    def __post_init__(self):
        for name, val in (("y0", self.y0), ("y1", self.y1)):
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} = {val!r} outside [0, 1]")


def poisson_mix(
    yields: Sequence[float],
    per_n_errors: Sequence[Sequence[float]],
    mu: float,
) -> tuple[float, ErrorSpectrum4]:
    """Forward model: gain Q_mu and error spectrum E_mu from yields Y_n.

    Q_mu = sum_n Y_n mu^n e^-mu / n!, and E_mu^g is the yield-weighted
    mixture of the per-photon-number spectra.  Yields beyond the given
    list are treated as zero; the series stops once mu^n/n! < SERIES_TOL.
    A zero-gain mixture returns spectrum (1, 0, 0, 0) by convention.
    """
    if mu <= 0.0:
        raise ValueError(f"intensity mu = {mu!r} must be positive")
    if len(per_n_errors) != len(yields):
        raise ValueError("yields and per_n_errors must have equal length")
    for y in yields:
        if not 0.0 <= y <= 1.0:
            raise ValueError(f"yield {y!r} outside [0, 1]")
    gain_terms: list[float] = []
    class_terms: list[list[float]] = [[], [], [], []]
    term = 1.0  # mu^n / n! at n = 0
    for n, y in enumerate(yields):
        if n > 0:
            term *= mu / n
        if term < SERIES_TOL:
            break
        weight = term * y
        gain_terms.append(weight)
        spectrum = per_n_errors[n]
        if len(spectrum) != 4:
            raise ValueError("per-photon error spectra must have 4 classes")
        for g in range(4):
            class_terms[g].append(weight * float(spectrum[g]))
    scale = math.exp(-mu)
    gain = scale * math.fsum(gain_terms)
    if gain <= 0.0:
        return 0.0, ErrorSpectrum4(1.0, 0.0, 0.0, 0.0)
    classes = [scale * math.fsum(t) / gain for t in class_terms]
    return gain, ErrorSpectrum4(*classes)


def estimate_y0(rec_nu: IntensityRecord, rec_upsilon: IntensityRecord) -> float:
    """Vacuum-yield lower bound from the two decoy records.

    Y_0 >= (nu Q_u e^u - u Q_nu e^nu) / (nu - u), floored at 0.
    """
    nu, u = rec_nu.intensity, rec_upsilon.intensity
    if not nu > u:
        raise ValueError(f"decoy intensities not ordered: nu = {nu!r} <= upsilon = {u!r}")
    bound = (
        nu * rec_upsilon.gain * math.exp(u) - u * rec_nu.gain * math.exp(nu)
    ) / (nu - u)
    return min(max(bound, 0.0), 1.0)


def estimate_y1(
    rec_mu: IntensityRecord,
    rec_nu: IntensityRecord,
    rec_upsilon: IntensityRecord,
    y0: float,
) -> float:
    """Single-photon-yield lower bound from all three records.

    Y_1 >= mu / (mu (nu - u) - nu^2 + u^2) *
           [Q_nu e^nu - Q_u e^u - (nu^2 - u^2)/mu^2 (Q_mu e^mu - Y_0)]
    """
    mu, nu, u = rec_mu.intensity, rec_nu.intensity, rec_upsilon.intensity
    if not mu > nu > u:
        raise ValueError(f"intensities not strictly ordered: {mu!r}, {nu!r}, {u!r}")
    if not 0.0 <= y0 <= 1.0:
        raise ValueError(f"y0 = {y0!r} outside [0, 1]")
    denom = mu * (nu - u) - nu**2 + u**2
    if denom <= 0.0:
        raise ValueError(f"non-positive estimator denominator {denom!r}")
    bracket = (
        rec_nu.gain * math.exp(nu)
        - rec_upsilon.gain * math.exp(u)
        - (nu**2 - u**2) / mu**2 * (rec_mu.gain * math.exp(mu) - y0)
    )
    return min(max(mu / denom * bracket, 0.0), 1.0)


def estimate_e1_class(
    rec_nu: IntensityRecord,
    rec_upsilon: IntensityRecord,
    g: int,
    y1: float,
) -> float:
    """Upper bound on the single-photon error rate of class g in {1, 2, 3}.

    e_1^g <= (E_nu^g Q_nu e^nu - E_u^g Q_u e^u) / ((nu - u) Y_1),
    clamped to [0, 1].
    """
    if g not in (1, 2, 3):
        raise ValueError(f"error class g = {g!r} not in {{1, 2, 3}}")
    nu, u = rec_nu.intensity, rec_upsilon.intensity
    if not nu > u:
        raise ValueError(f"decoy intensities not ordered: nu = {nu!r} <= upsilon = {u!r}")
    if not y1 > 0.0:
        raise ValueError("cannot bound error rates with y1 = 0")
    num = (
        rec_nu.error_rates[g - 1] * rec_nu.gain * math.exp(nu)
        - rec_upsilon.error_rates[g - 1] * rec_upsilon.gain * math.exp(u)
    )
    return min(max(num / ((nu - u) * y1), 0.0), 1.0)


def estimate_all(records: Sequence[IntensityRecord]) -> SinglePhotonBounds:
    """Compose the decoy bounds from the (signal, decoy, weak-decoy) records.

    Per-class bounds are estimated independently; the class-0 rate is the
    complement.  If the three upper bounds exceed 1 jointly, they are
    scaled back onto the simplex and the clamp is reported.
    """
    if len(records) != 3:
        raise ValueError(f"expected exactly 3 records, got {len(records)}")
    rec_mu, rec_nu, rec_upsilon = records
    if not rec_mu.intensity > rec_nu.intensity > rec_upsilon.intensity:
        raise ValueError("records must be ordered by strictly decreasing intensity")
    y0 = estimate_y0(rec_nu, rec_upsilon)
    y1 = estimate_y1(rec_mu, rec_nu, rec_upsilon, y0)
    if y1 <= 0.0:
        raise ValueError("estimated y1 is 0; error-rate bounds undefined")
    classes = [estimate_e1_class(rec_nu, rec_upsilon, g, y1) for g in (1, 2, 3)]
    total = math.fsum(classes)
    if total > 1.0:
        warnings.warn(
            f"single-photon error bounds sum to {total:.3g}, scaled onto the simplex",
            EstimateClampWarning,
            stacklevel=2,
        )
        classes = [x / total for x in classes]
        e0 = 0.0
    else:
        e0 = 1.0 - total
    return SinglePhotonBounds(y0=y0, y1=y1, e1=ErrorSpectrum4(e0, *classes))
