"""Key-rate mathematics for the four-dimensional time-bin qudit scheme.

The scheme encodes two raw bits per detected dit.  Errors on a sifted dit
fall into four classes g = 0..3, where g is the bitwise XOR of the
transmitted and measured bit pairs: the low bit of g flips when the
pair-index bit is wrong, the high bit when the sign bit is wrong.

The one-way secret key rate per packet is

    R = (q * Q / s) * ( -H({E^g}) + Omega * (s - sum_g e1^g H({delta_p^g})) )

with s = 2 bits per dit, q the basis-match probability (1/3 for uniform
basis choice), Q the signal gain, {E^g} the observed sifted error-class
distribution, Omega the single-photon fraction of the sifted key, e1^g the
single-photon error-class rates, and {delta_p^g} the phase-error spectrum
an eavesdropper could induce within class g.

The adversary's freedom given a single-photon spectrum {e1^g} is captured
by a four-parameter model (A, B, C, D) with

    e1^0 = A + B + C + D      e1^1 = 2 (B + D)
    e1^2 = 2 (C + D)          e1^3 = 4 D
    A + 3 B + 3 C + 9 D = 1

which arranges into a 16-entry joint spin/phase error table containing A
once, B and C three times each, and D nine times.  The per-class phase
spectra then take the closed forms implemented in delta_spectra().
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .entropy import NEG_CLAMP, NORM_TOL, ProbVec, _entropy_bits

# Basis-match (sifting) probability for uniform, unbiased basis choice
# among the three mutually unbiased bases.
Q_BASIS_MATCH = 1.0 / 3.0

# Raw bits carried per dit.
DIT_BITS = 2

# Threshold above which clamping of inconsistent inputs is reported.
CLAMP_REPORT_TOL = 1e-6

# Absolute tolerance for the worst-case table root solve.
ROOT_TOL = 1e-12


class EstimateClampWarning(UserWarning):
    """Inconsistent estimates were clamped by more than CLAMP_REPORT_TOL."""


@dataclass(frozen=True)
class ErrorSpectrum4:
    """Error-class distribution (e^0, e^1, e^2, e^3), summing to 1."""

    e0: float
    e1: float
    e2: float
    e3: float

    def __post_init__(self):
        vals = [self.e0, self.e1, self.e2, self.e3]
        for x in vals:
            if not math.isfinite(x):
                raise ValueError(f"non-finite error rate {x!r}")
            if x < -NEG_CLAMP:
                raise ValueError(f"negative error rate {x!r}")
        vals = [max(float(x), 0.0) for x in vals]
        total = math.fsum(vals)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"error classes sum to {total!r}, not 1")
        if total != 1.0:
            vals = [x / total for x in vals]
        for name, val in zip(("e0", "e1", "e2", "e3"), vals):
            object.__setattr__(self, name, val)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.e0, self.e1, self.e2, self.e3)

    def as_probvec(self) -> ProbVec:
        return ProbVec(self.as_tuple())


@dataclass(frozen=True)
class AbcdModel:
    """Adversary model (A, B, C, D) with A + 3B + 3C + 9D = 1."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        vals = [self.a, self.b, self.c, self.d]
        for x in vals:
            if not math.isfinite(x):
                raise ValueError(f"non-finite model value {x!r}")
            if x < -NEG_CLAMP:
                raise ValueError(f"negative model value {x!r}")
        vals = [max(float(x), 0.0) for x in vals]
        total = vals[0] + 3.0 * vals[1] + 3.0 * vals[2] + 9.0 * vals[3]
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"constraint A+3B+3C+9D = {total!r}, not 1")
        if total != 1.0:
            vals = [x / total for x in vals]
        for name, val in zip(("a", "b", "c", "d"), vals):
            object.__setattr__(self, name, val)

    def single_photon_spectrum(self) -> ErrorSpectrum4:
        """Invert back to the error-class rates (round trip of the fit)."""
        return ErrorSpectrum4(
            e0=self.a + self.b + self.c + self.d,
            e1=2.0 * (self.b + self.d),
            e2=2.0 * (self.c + self.d),
            e3=4.0 * self.d,
        )

    def as_table(self) -> "PauliTable16":
        """16-entry joint table whose both marginals equal the spectrum."""
        a, b, c, d = self.a, self.b, self.c, self.d
        return PauliTable16(entries=(
            (a, b, c, d),
            (b, b, d, d),
            (c, d, c, d),
            (d, d, d, d),
        ))


@dataclass(frozen=True)
class PauliTable16:
    """Joint spin/phase error table e_jk, j = spin class, k = phase class."""

    entries: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self):
        if len(self.entries) != 4 or any(len(r) != 4 for r in self.entries):
            raise ValueError("table must be 4x4")
        flat = [float(x) for row in self.entries for x in row]
        for x in flat:
            if not math.isfinite(x):
                raise ValueError(f"non-finite table entry {x!r}")
            if x < -NEG_CLAMP:
                raise ValueError(f"negative table entry {x!r}")
        flat = [max(x, 0.0) for x in flat]
        total = math.fsum(flat)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"table entries sum to {total!r}, not 1")
        if total != 1.0:
            flat = [x / total for x in flat]
        rows = tuple(tuple(flat[4 * j:4 * j + 4]) for j in range(4))
        object.__setattr__(self, "entries", rows)

    def flat(self) -> tuple[float, ...]:
        return tuple(x for row in self.entries for x in row)

    def spin_marginal(self) -> ErrorSpectrum4:
        sums = [math.fsum(row) for row in self.entries]
        return ErrorSpectrum4(*sums)

    def phase_marginal(self) -> ErrorSpectrum4:
        sums = [math.fsum(self.entries[j][k] for j in range(4)) for k in range(4)]
        return ErrorSpectrum4(*sums)

    def entropy_bits(self) -> float:
        return _entropy_bits(np.asarray(self.flat()))


@dataclass(frozen=True)
class KeyRateReport:
    """Secret key rate with the intermediate quantities that produced it."""

    rate: float
    raw_rate: float
    gain: float
    entropy_observed: float
    omega: float
    delta_entropies: tuple[float, float, float, float]
    single_photon: ErrorSpectrum4
    abcd: AbcdModel


def abcd_from_single_photon(e1: ErrorSpectrum4) -> AbcdModel:
    """Fit the (A, B, C, D) model to a single-photon error spectrum.

    The inversion is exact for consistent spectra:

        D = e1^3 / 4,  B = e1^1 / 2 - D,  C = e1^2 / 2 - D,
        A = e1^0 - B - C - D.

    Decoy-state upper bounds can be mutually inconsistent; negative
    intermediates are clamped to zero and the model renormalized onto the
    constraint surface.  A clamp that moves any value by more than
    CLAMP_REPORT_TOL triggers an EstimateClampWarning.
    """
    d = e1.e3 / 4.0
    b = e1.e1 / 2.0 - d
    c = e1.e2 / 2.0 - d
    a = e1.e0 - b - c - d
    raw = (a, b, c, d)
    clamped = [max(x, 0.0) for x in raw]
    total = clamped[0] + 3.0 * clamped[1] + 3.0 * clamped[2] + 9.0 * clamped[3]
    if total <= 0.0:
        raise ValueError("degenerate single-photon spectrum, all-zero model")
    fitted = [x / total for x in clamped]
    shift = max(abs(f - r) for f, r in zip(fitted, raw))
    if shift > CLAMP_REPORT_TOL:
        warnings.warn(
            f"single-photon spectrum inconsistent, model clamped by {shift:.3g}",
            EstimateClampWarning,
            stacklevel=2,
        )
    return AbcdModel(*fitted)


def delta_spectra(m: AbcdModel) -> tuple[ProbVec, ProbVec, ProbVec, ProbVec]:
    """Worst-case phase-error spectra, one per error class.

        delta^0 = {A, B, C, D} / (A+B+C+D)
        delta^1 = {B, B, D, D} / (2 (B+D))
        delta^2 = {C, C, D, D} / (2 (C+D))
        delta^3 = {D, D, D, D} / (4 D)   (uniform)

    A class with zero total mass contributes nothing to the key rate; its
    spectrum is returned as uniform by convention.
    """

    def _norm(parts: list[float]) -> ProbVec:
        total = math.fsum(parts)
        if total <= 0.0:
            return ProbVec((0.25, 0.25, 0.25, 0.25))
        return ProbVec([x / total for x in parts])

    a, b, c, d = m.a, m.b, m.c, m.d
    return (
        _norm([a, b, c, d]),
        _norm([b, b, d, d]),
        _norm([c, c, d, d]),
        ProbVec((0.25, 0.25, 0.25, 0.25)),
    )


def secret_key_rate(
    q: float,
    s: float,
    gain: float,
    observed: ErrorSpectrum4,
    omega: float,
    single_photon: ErrorSpectrum4,
) -> KeyRateReport:
    """One-way secret key rate per packet.

    q is the sifting (basis-match) probability, s the raw bits per dit,
    gain the signal gain Q, observed the sifted error-class distribution
    {E^g}, omega the single-photon sifted fraction, and single_photon the
    single-photon error-class rates {e1^g} used for the adversary model.

    The public rate is clamped at zero; raw_rate keeps the signed value.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"sifting probability q = {q!r} outside (0, 1]")
    if s <= 0.0:
        raise ValueError(f"bits per dit s = {s!r} must be positive")
    if not 0.0 < gain <= 1.0:
        raise ValueError(f"gain Q = {gain!r} outside (0, 1]")
    if not -NEG_CLAMP <= omega <= 1.0 + NORM_TOL:
        raise ValueError(f"single-photon fraction omega = {omega!r} outside [0, 1]")
    omega = min(max(omega, 0.0), 1.0)

    model = abcd_from_single_photon(single_photon)
    deltas = delta_spectra(model)
    delta_h = tuple(_entropy_bits(dv.as_array()) for dv in deltas)
    e1 = single_photon.as_tuple()
    correction = math.fsum(e1[g] * delta_h[g] for g in range(4))
    entropy_observed = _entropy_bits(observed.as_probvec().as_array())
    raw = (q * gain / s) * (-entropy_observed + omega * (s - correction))
    return KeyRateReport(
        rate=max(raw, 0.0),
        raw_rate=raw,
        gain=gain,
        entropy_observed=entropy_observed,
        omega=omega,
        delta_entropies=delta_h,
        single_photon=single_photon,
        abcd=model,
    )


def _worstcase_f(x: float, e_star: float) -> float:
    """Stationarity function for the dit-error-rate worst case.

    Maximizing the 16-entry table entropy over the symmetric family
    (e00 once, e01 nine times, two classes of three entries each at their
    common optimum t = (e* - 6 e01) / 6) gives the condition
    e00 * t^2 = e01^3, i.e.

        f(e01) = 36 e01^3 - (1 - 3 e01 - e*) (e* - 6 e01)^2 = 0

    f is strictly increasing on [0, e*/6] with f(0) < 0 < f(e*/6).
    """
    return 36.0 * x**3 - (1.0 - 3.0 * x - e_star) * (e_star - 6.0 * x) ** 2


def _worstcase_fprime(x: float, e_star: float) -> float:
    lin = e_star - 6.0 * x
    return 108.0 * x**2 + 3.0 * lin**2 + 12.0 * (1.0 - 3.0 * x - e_star) * lin


def solve_worstcase_e01(e_star: float) -> float:
    """Root of the worst-case stationarity condition on [0, e*/6].

    Bracketed bisection narrows the unique sign change, then Newton steps
    polish to absolute tolerance ROOT_TOL.
    """
    if not 0.0 < e_star < 0.75:
        raise ValueError(f"dit error rate e* = {e_star!r} outside (0, 0.75)")
    lo, hi = 0.0, e_star / 6.0
    flo = _worstcase_f(lo, e_star)
    if flo >= 0.0 or _worstcase_f(hi, e_star) <= 0.0:
        raise ValueError(f"no bracketed root for e* = {e_star!r}")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        fm = _worstcase_f(mid, e_star)
        if fm < 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-9:
            break
    x = 0.5 * (lo + hi)
    for _ in range(12):
        step = _worstcase_f(x, e_star) / _worstcase_fprime(x, e_star)
        x_new = x - step
        if not lo <= x_new <= hi:
            x_new = 0.5 * (lo + hi)
        if _worstcase_f(x_new, e_star) < 0.0:
            lo = x_new
        else:
            hi = x_new
        converged = abs(x_new - x) <= ROOT_TOL
        x = x_new
        if converged:
            break
    return x


def worstcase_table(e_star: float) -> PauliTable16:
    """Entropy-maximizing symmetric error table at dit error rate e*.

    Spin marginals are forced to (1 - e*, e*/3, e*/3, e*/3) by the
    symmetry of the family, independent of the root.
    """
    x = solve_worstcase_e01(e_star)
    t = (e_star - 6.0 * x) / 6.0
    e00 = 1.0 - 3.0 * x - e_star
    return PauliTable16(entries=(
        (e00, x, x, x),
        (x, x, t, t),
        (x, t, t, x),
        (x, t, x, t),
    ))


def rate_cww4_der(e_star: float, *, clamp: bool = True) -> float:
    """Ideal-apparatus key rate per packet as a function of dit error rate.

    R(e*) = (q / s) * (s - H(worst-case table)).  Threshold near 21.6%.
    """
    if not 0.0 <= e_star < 0.75:
        raise ValueError(f"dit error rate e* = {e_star!r} outside [0, 0.75)")
    if e_star == 0.0:
        raw = Q_BASIS_MATCH
    else:
        table = worstcase_table(e_star)
        raw = (Q_BASIS_MATCH / DIT_BITS) * (DIT_BITS - table.entropy_bits())
    return max(raw, 0.0) if clamp else raw


def _ber_table_entropy(e: float, b: float, c: float) -> float:
    d = max((e - b - c) / 6.0, 0.0)
    a = max(1.0 - 3.0 * b - 3.0 * c - 9.0 * d, 0.0)
    w = np.array([a, b, b, b, c, c, c, d, d, d, d, d, d, d, d, d])
    return _entropy_bits(w)


def ber_worstcase_model(e: float) -> AbcdModel:
    """Entropy-maximizing (A, B, C, D) at fixed bit error rate e = B+C+6D.

    Two-variable bounded maximization over (B, C) with D eliminated by the
    BER constraint; multi-start because no symmetry is assumed.  The
    objective is the 16-entry table entropy, concave in (B, C).
    """
    if not 0.0 <= e < 2.0 / 3.0:
        raise ValueError(f"bit error rate e = {e!r} outside [0, 2/3)")
    if e == 0.0:
        return AbcdModel(1.0, 0.0, 0.0, 0.0)
    cap = min(e, 2.0 / 3.0 - e)

    def neg_entropy(uv: np.ndarray) -> float:
        u, v = uv
        bc = u * cap
        return -_ber_table_entropy(e, v * bc, (1.0 - v) * bc)

    # Product-channel candidate B = C = (1 - 3e/2)(e/2) mapped to (u, v).
    u_prod = min(max((2.0 - 3.0 * e) * e / (2.0 * cap), 1e-6), 1.0 - 1e-6)
    starts = [(u_prod, 0.5), (0.5, 0.5), (0.9, 0.5), (0.3, 0.3), (0.7, 0.2)]
    best = None
    for start in starts:
        res = optimize.minimize(
            neg_entropy,
            np.asarray(start),
            method="L-BFGS-B",
            bounds=[(1e-9, 1.0 - 1e-9)] * 2,
            options={"ftol": 1e-14, "gtol": 1e-10, "maxiter": 200},
        )
        if best is None or res.fun < best.fun:
            best = res
    u, v = best.x
    bc = u * cap
    b, c = v * bc, (1.0 - v) * bc
    d = max((e - b - c) / 6.0, 0.0)
    a = max(1.0 - 3.0 * b - 3.0 * c - 9.0 * d, 0.0)
    return AbcdModel(a, b, c, d)


def rate_cww4_ber(e: float, *, clamp: bool = True) -> float:
    """Ideal-apparatus key rate per packet as a function of bit error rate.

    Minimizes the rate over all (A, B, C, D) consistent with BER
    e = B + C + 6D.  Numerically coincides with one third of the
    six-state one-way rate; the optimization does not assume that.
    """
    if e == 0.0:
        raw = Q_BASIS_MATCH
    else:
        model = ber_worstcase_model(e)
        raw = (Q_BASIS_MATCH / DIT_BITS) * (DIT_BITS - model.as_table().entropy_bits())
    return max(raw, 0.0) if clamp else raw
