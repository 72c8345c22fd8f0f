"""End-to-end analysis: decoy records in, key-rate report out.

The experiment input is the three-intensity record set (signal plus two
decoys).  The qudit analysis estimates the single-photon bounds, forms
the single-photon sifted fraction Omega = Y1 mu e^-mu / Q_mu, and feeds
everything to the key-rate formula.  The qubit (BB84) analysis reads the
same records through the sign-bit channel only: the interfering-port
errors (class 2) are the BB84 bit errors.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

from .cww4 import (
    DIT_BITS,
    ErrorSpectrum4,
    KeyRateReport,
    Q_BASIS_MATCH,
    secret_key_rate,
)
from .decoy import (
    IntensityRecord,
    SinglePhotonBounds,
    estimate_all,
    estimate_e1_class,
    estimate_y0,
    estimate_y1,
)
from .entropy import binary_entropy

# The qubit comparator keeps one bit per detection and sifts at 1/2.
BB84_Q = 0.5
BB84_S = 1.0


@dataclass(frozen=True)
class ExperimentInput:
    """Three decoy records plus the protocol constants q and s."""

    records: tuple[IntensityRecord, IntensityRecord, IntensityRecord]
    q: float = Q_BASIS_MATCH
    s: float = float(DIT_BITS)

    def __post_init__(self):
        records = tuple(self.records)
        if len(records) != 3:
            raise ValueError(f"expected 3 records, got {len(records)}")
        mus = [r.intensity for r in records]
        if not mus[0] > mus[1] > mus[2]:
            raise ValueError(f"intensities not strictly decreasing: {mus}")
        if not 0.0 < self.q <= 1.0:
            raise ValueError(f"q = {self.q!r} outside (0, 1]")
        if not self.s > 0.0:
            raise ValueError(f"s = {self.s!r} must be positive")
        object.__setattr__(self, "records", records)

    def to_dict(self) -> dict[str, Any]:
        return {
            "records": [
                {
                    "intensity": r.intensity,
                    "gain": r.gain,
                    "error_rates": list(r.error_rates),
                }
                for r in self.records
            ],
            "q": self.q,
            "s": self.s,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentInput":
        try:
            records = tuple(
                IntensityRecord(
                    intensity=row["intensity"],
                    gain=row["gain"],
                    error_rates=tuple(row["error_rates"]),
                )
                for row in data["records"]
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed experiment input: {exc}") from exc
        return cls(
            records=records,
            q=float(data.get("q", Q_BASIS_MATCH)),
            s=float(data.get("s", DIT_BITS)),
        )


def experiment_input_to_json(inp: ExperimentInput) -> str:
    """Deterministic JSON serialization (stable key order, LF-terminated)."""
    return json.dumps(inp.to_dict(), indent=2, sort_keys=True) + "\n"


def experiment_input_from_json(text: str) -> ExperimentInput:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("experiment input must be a JSON object")
    return ExperimentInput.from_dict(data)


@dataclass(frozen=True)
class Cww4Analysis:
    """Full qudit analysis of one record set."""

    bounds: SinglePhotonBounds
    omega: float
    observed: ErrorSpectrum4
    ber: float
    der: float
    key: KeyRateReport


@dataclass(frozen=True)
class Bb84Analysis:
    """Sign-bit-only analysis of the same records."""

    y0: float
    y1: float
    e1: float
    observed_error: float
    omega: float
    rate: float
    raw_rate: float


def single_photon_fraction(y1: float, intensity: float, gain: float) -> float:
    """Omega = Y1 mu e^-mu / Q_mu, clamped into [0, 1]."""
    omega = y1 * intensity * math.exp(-intensity) / gain
    return min(max(omega, 0.0), 1.0)


def analyze_cww4(inp: ExperimentInput) -> Cww4Analysis:
    bounds = estimate_all(inp.records)
    signal = inp.records[0]
    omega = single_photon_fraction(bounds.y1, signal.intensity, signal.gain)
    observed = signal.error_spectrum()
    key = secret_key_rate(inp.q, inp.s, signal.gain, observed, omega, bounds.e1)
    e1, e2, e3 = signal.error_rates
    return Cww4Analysis(
        bounds=bounds,
        omega=omega,
        observed=observed,
        ber=(e1 + e2) / 2.0 + e3,
        der=e1 + e2 + e3,
        key=key,
    )


def analyze_bb84(inp: ExperimentInput) -> Bb84Analysis:
    rec_mu, rec_nu, rec_up = inp.records
    y0 = estimate_y0(rec_nu, rec_up)
    y1 = estimate_y1(rec_mu, rec_nu, rec_up, y0)
    if y1 <= 0.0:
        raise ValueError("estimated y1 is 0; BB84 analysis undefined")
    e1 = estimate_e1_class(rec_nu, rec_up, 2, y1)
    omega = single_photon_fraction(y1, rec_mu.intensity, rec_mu.gain)
    observed = rec_mu.error_rates[1]
    raw = (BB84_Q * rec_mu.gain / BB84_S) * (
        -binary_entropy(observed) + omega * (1.0 - binary_entropy(e1))
    )
    return Bb84Analysis(
        y0=y0,
        y1=y1,
        e1=e1,
        observed_error=observed,
        omega=omega,
        rate=max(raw, 0.0),
        raw_rate=raw,
    )
