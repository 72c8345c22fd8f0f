"""Monte Carlo model of the time-bin qudit link.

A packet is one 4-slot channel use.  Alice encodes a superposition of two
slots (|j> + (-1)^sign |k>)/sqrt(2); Bob's receiver splits incoming light
passively over three delay interferometers (delays 1, 2, 3 slots) whose
output ports convert the relative phase into a click at one of 7 time
slots x 2 ports.  A click at slot t on interferometer delay D with
D <= t <= 3 is conclusive for the pair (t - D, t); everything else is
inconclusive.  Sifting keeps conclusive events whose measured pair lies
in the same basis (perfect matching) as Alice's pair.

run_campaign is vectorized and chunked: packet chunks draw from
independent substreams keyed by (seed, chunk index), and tallies are
integer sums, so results are reproducible for a fixed seed no matter how
chunks would be scheduled.  Only packets with at least one click are
materialized, which keeps the cost proportional to the detection rate
rather than the packet count.  receive_packet is the scalar reference
path used by the distribution-equivalence tests.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .decoy import IntensityRecord

# Pair table: index -> (j, k) slots, 0 <= j < k <= 3.
PAIRS = ((0, 1), (2, 3), (0, 2), (1, 3), (0, 3), (1, 2))
# The three perfect matchings (bases): {01,23}, {02,13}, {03,12}.
PAIR_BASIS = (0, 0, 1, 1, 2, 2)
# Position of the pair within its basis: the pair-index raw bit.
PAIR_INDEX_IN_BASIS = (0, 1, 0, 1, 0, 1)
# Interferometer delay that interferes the pair's two slots.
DELAY_OF_PAIR = (1, 1, 2, 2, 3, 1)

N_SLOTS = 7  # output time slots 0..6 (input 0..3 plus up to 3 slots of delay)
N_FMI = 3
N_GATES = N_FMI * N_SLOTS * 2  # detector gates per packet, dark-count sites

# Insertion loss of each receiver interferometer, dB.
FMI_INSERTION_DB = 0.80

_CHUNK = 1 << 20

_PAIR_J = np.array([p[0] for p in PAIRS])
_PAIR_K = np.array([p[1] for p in PAIRS])
_PAIR_BASIS = np.array(PAIR_BASIS)
_PAIR_IDXB = np.array(PAIR_INDEX_IN_BASIS)
_PAIR_DELAY = np.array(DELAY_OF_PAIR)
# (j, k) -> pair index, -1 where not a valid pair.
_PAIR_ID = np.full((4, 4), -1)
for _i, (_j, _k) in enumerate(PAIRS):
    _PAIR_ID[_j, _k] = _i


@dataclass(frozen=True)
class QuditKet:
    """Pure state over the 4 input time slots."""

    amplitudes: tuple[complex, complex, complex, complex]

    def __post_init__(self):
        amps = tuple(complex(a) for a in self.amplitudes)
        if len(amps) != 4:
            raise ValueError("a qudit ket has exactly 4 amplitudes")
        norm = math.fsum(abs(a) ** 2 for a in amps)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"ket norm {norm!r} != 1")
        object.__setattr__(self, "amplitudes", amps)


@dataclass(frozen=True)
class SimConfig:
    """Campaign parameters.

    intensities/intensity_probs describe the source mix (typically signal
    plus two decoys); misalignment is one phase offset per interferometer
    (radians); dark_rate is per detector gate; channel_loss_db excludes
    the fixed interferometer insertion loss.
    """

    intensities: tuple[float, ...]
    intensity_probs: tuple[float, ...]
    channel_loss_db: float
    depolarize_p: float
    misalignment: tuple[float, float, float]
    detector_efficiency: float
    dark_rate: float
    packets: int
    seed: int

    def __post_init__(self):
        mus = tuple(float(x) for x in self.intensities)
        probs = tuple(float(x) for x in self.intensity_probs)
        if not mus:
            raise ValueError("at least one source intensity required")
        if len(probs) != len(mus):
            raise ValueError("intensity_probs must match intensities")
        if any(m <= 0.0 for m in mus):
            raise ValueError("intensities must be positive")
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError("selection probabilities must lie in [0, 1]")
        if abs(math.fsum(probs) - 1.0) > 1e-9:
            raise ValueError("selection probabilities must sum to 1")
        if not self.channel_loss_db >= 0.0:
            raise ValueError("channel_loss_db must be nonnegative")
        if not 0.0 <= self.depolarize_p <= 1.0:
            raise ValueError("depolarize_p outside [0, 1]")
        if len(self.misalignment) != 3:
            raise ValueError("misalignment needs one phase per interferometer")
        if not 0.0 < self.detector_efficiency <= 1.0:
            raise ValueError("detector_efficiency outside (0, 1]")
        if not 0.0 <= self.dark_rate < 1.0:
            raise ValueError("dark_rate outside [0, 1)")
        if self.packets < 1:
            raise ValueError("packets must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")
        object.__setattr__(self, "intensities", mus)
        object.__setattr__(self, "intensity_probs", probs)
        object.__setattr__(self, "misalignment", tuple(float(t) for t in self.misalignment))

    def survival_probability(self) -> float:
        """Per-photon detection probability: channel, insertion, detector."""
        loss = 10.0 ** (-(self.channel_loss_db + FMI_INSERTION_DB) / 10.0)
        return loss * self.detector_efficiency


@dataclass(frozen=True)
class ChannelOutcome:
    """Result of the channel acting on one photon."""

    lost: bool
    depolarized: bool
    ket: QuditKet | None


@dataclass(frozen=True)
class PacketOutcome:
    """Squashed detection result for one packet."""

    clicked: bool
    multi: bool
    conclusive: bool
    pair: int | None
    sign: int | None


@dataclass(frozen=True)
class TallySheet:
    """Integer counts per source intensity; merge is elementwise addition."""

    intensities: tuple[float, ...]
    sent: tuple[int, ...]
    detected: tuple[int, ...]
    sifted: tuple[int, ...]
    error_counts: tuple[tuple[int, int, int, int], ...]
    multi_click: tuple[int, ...]

    def __post_init__(self):
        n = len(self.intensities)
        for name in ("sent", "detected", "sifted", "error_counts", "multi_click"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} must have one entry per intensity")
        for i in range(n):
            if not self.sifted[i] <= self.detected[i] <= self.sent[i]:
                raise ValueError(f"counts not nested at intensity index {i}")
            if sum(self.error_counts[i]) != self.sifted[i]:
                raise ValueError(f"error classes do not sum to sifted at index {i}")

    def merge(self, other: "TallySheet") -> "TallySheet":
        if self.intensities != other.intensities:
            raise ValueError("cannot merge sheets with different intensities")
        return TallySheet(
            intensities=self.intensities,
            sent=tuple(a + b for a, b in zip(self.sent, other.sent)),
            detected=tuple(a + b for a, b in zip(self.detected, other.detected)),
            sifted=tuple(a + b for a, b in zip(self.sifted, other.sifted)),
            error_counts=tuple(
                tuple(a + b for a, b in zip(ra, rb))
                for ra, rb in zip(self.error_counts, other.error_counts)
            ),
            multi_click=tuple(a + b for a, b in zip(self.multi_click, other.multi_click)),
        )


def prepare_state(j: int, k: int, sign: int) -> QuditKet:
    """Ket (|j> + sign |k>)/sqrt(2) for 0 <= j < k <= 3, sign in {+1, -1}."""
    if not (isinstance(j, int) and isinstance(k, int) and 0 <= j < k <= 3):
        raise ValueError(f"invalid slot pair ({j!r}, {k!r})")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    amps = [0j, 0j, 0j, 0j]
    amps[j] = complex(1.0 / math.sqrt(2.0))
    amps[k] = complex(sign / math.sqrt(2.0))
    return QuditKet(tuple(amps))


def pair_state(pair: int, sign_bit: int) -> QuditKet:
    """prepare_state by pair index and raw sign bit (0 -> +, 1 -> -)."""
    j, k = PAIRS[pair]
    return prepare_state(j, k, 1 if sign_bit == 0 else -1)


def apply_channel(
    ket: QuditKet,
    depolarize_p: float,
    loss: float,
    rng: np.random.Generator,
) -> ChannelOutcome:
    """Lossy depolarizing channel acting on one photon.

    With probability loss the photon is dropped; otherwise with
    probability depolarize_p it is flagged depolarized (the receiver then
    samples its outcome from the maximally mixed state); otherwise the
    ket passes unchanged.
    """
    if not 0.0 <= depolarize_p <= 1.0:
        raise ValueError("depolarize_p outside [0, 1]")
    if not 0.0 <= loss <= 1.0:
        raise ValueError("loss outside [0, 1]")
    if rng.random() < loss:
        return ChannelOutcome(lost=True, depolarized=False, ket=None)
    if rng.random() < depolarize_p:
        return ChannelOutcome(lost=False, depolarized=True, ket=None)
    return ChannelOutcome(lost=False, depolarized=False, ket=ket)


@dataclass(frozen=True)
class FmiDistribution:
    """Click distribution of one delay interferometer.

    probs[t, p] is the probability of a click in output slot t (0..6) at
    port p (0 = '+', 1 = '-').  interfering[t] marks slots where both the
    short and the long path contribute amplitude.
    """

    probs: np.ndarray
    interfering: np.ndarray


def measure_fmi(ket: QuditKet, delay: int, phase_offset: float) -> FmiDistribution:
    """Propagate a ket through a delay interferometer.

    Input amplitude a_t splits evenly over a short path (slot t) and a
    long path (slot t + delay, extra phase e^{i theta}); the port-+/-
    amplitudes at output slot t are [a_t +/- e^{i theta} a_{t-delay}]/2.
    """
    if delay not in (1, 2, 3):
        raise ValueError(f"delay {delay!r} not in {{1, 2, 3}}")
    a = np.zeros(N_SLOTS, dtype=complex)
    a[:4] = ket.amplitudes
    delayed = np.zeros(N_SLOTS, dtype=complex)
    delayed[delay:delay + 4] = np.asarray(ket.amplitudes) * np.exp(1j * phase_offset)
    plus = (a + delayed) / 2.0
    minus = (a - delayed) / 2.0
    probs = np.stack([np.abs(plus) ** 2, np.abs(minus) ** 2], axis=1)
    interfering = (np.abs(a) > 1e-12) & (np.abs(delayed) > 1e-12)
    return FmiDistribution(probs=probs, interfering=interfering)


def _sample_fmi_click(
    dist: FmiDistribution, rng: np.random.Generator
) -> tuple[int, int]:
    flat = dist.probs.reshape(-1)
    cum = np.cumsum(flat)
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    idx = min(idx, flat.size - 1)
    return idx // 2, idx % 2


def receive_packet(
    ket: QuditKet,
    intensity: float,
    config: SimConfig,
    rng: np.random.Generator,
) -> PacketOutcome:
    """Scalar reference receiver for one packet.

    Samples the Poisson photon number, per-photon loss/depolarization,
    uniform routing to one of the three interferometers, the click slot
    and port from measure_fmi, and independent dark counts on all 42
    gates; multiple click candidates are squashed by a uniform pick.
    """
    if intensity <= 0.0:
        raise ValueError("intensity must be positive")
    p_surv = config.survival_probability()
    clicks: list[tuple[int, int, int]] = []  # (fmi, slot, port)
    for _ in range(rng.poisson(intensity)):
        outcome = apply_channel(ket, config.depolarize_p, 1.0 - p_surv, rng)
        if outcome.lost:
            continue
        fmi = int(rng.integers(0, N_FMI))
        delay = fmi + 1
        theta = config.misalignment[fmi]
        if outcome.depolarized:
            # Maximally mixed input: uniform slot, then the interferometer.
            t = int(rng.integers(0, 4))
            basis = [0j] * 4
            basis[t] = 1.0 + 0j
            dist = measure_fmi(QuditKet(tuple(basis)), delay, theta)
        else:
            dist = measure_fmi(outcome.ket, delay, theta)
        slot, port = _sample_fmi_click(dist, rng)
        clicks.append((fmi, slot, port))
    dark_count = int(rng.binomial(N_GATES, config.dark_rate)) if config.dark_rate else 0
    for gate in rng.integers(0, N_GATES, size=dark_count):
        gate = int(gate)
        clicks.append((gate // (N_SLOTS * 2), (gate % (N_SLOTS * 2)) // 2, gate % 2))
    if not clicks:
        return PacketOutcome(False, False, False, None, None)
    fmi, slot, port = clicks[int(rng.integers(0, len(clicks)))]
    delay = fmi + 1
    if not delay <= slot <= 3:
        return PacketOutcome(True, len(clicks) > 1, False, None, None)
    pair = int(_PAIR_ID[slot - delay, slot])
    return PacketOutcome(True, len(clicks) > 1, True, pair, port)


# --- vectorized campaign engine ---


@dataclass(frozen=True)
class _IntensityPlan:
    lam: float
    p_click: float
    case_cum: np.ndarray  # cumulative (photon-only, dark-only) given a click
    cdf_photon: np.ndarray  # zero-truncated Poisson CDF over m = 1..
    cdf_dark: np.ndarray  # zero-truncated Binomial CDF over k = 1..42


def _plan_intensity(mu: float, config: SimConfig) -> _IntensityPlan:
    lam = mu * config.survival_probability()
    p_no_photon = math.exp(-lam)
    p_no_dark = (1.0 - config.dark_rate) ** N_GATES
    p_click = 1.0 - p_no_photon * p_no_dark
    c_photon = (1.0 - p_no_photon) * p_no_dark
    c_dark = p_no_photon * (1.0 - p_no_dark)
    case_cum = np.array([c_photon, c_photon + c_dark]) / p_click
    # Photon-number CDF given m >= 1, truncated once the tail is negligible.
    pmf = []
    term = p_no_photon
    m = 0
    while m < 200:
        m += 1
        term *= lam / m
        pmf.append(term)
        if term < 1e-18 and m > lam:
            break
    cdf_photon = np.cumsum(pmf) / (1.0 - p_no_photon) if lam > 0 else np.array([1.0])
    cdf_photon[-1] = 1.0
    if config.dark_rate > 0.0:
        ks = np.arange(1, N_GATES + 1)
        dark_pmf = stats.binom.pmf(ks, N_GATES, config.dark_rate)
        cdf_dark = np.cumsum(dark_pmf) / (1.0 - p_no_dark)
        cdf_dark[-1] = 1.0
    else:
        cdf_dark = np.array([1.0])
    return _IntensityPlan(lam, p_click, case_cum, cdf_photon, cdf_dark)


def _detail_clicking(
    n: int,
    plan: _IntensityPlan,
    config: SimConfig,
    rng: np.random.Generator,
) -> tuple[int, np.ndarray, int]:
    """Sample n clicking packets; returns (sifted, error_counts[4], multi)."""
    case = np.searchsorted(plan.case_cum, rng.random(n), side="right")
    m = np.zeros(n, dtype=np.int64)
    k = np.zeros(n, dtype=np.int64)
    has_photon = case != 1
    n_ph = int(has_photon.sum())
    if n_ph:
        m[has_photon] = 1 + np.searchsorted(plan.cdf_photon, rng.random(n_ph), side="right")
    has_dark = case != 0
    n_dk = int(has_dark.sum())
    if n_dk:
        k[has_dark] = 1 + np.searchsorted(plan.cdf_dark, rng.random(n_dk), side="right")
    multi = int(((m + k) >= 2).sum())
    winner_photon = rng.random(n) * (m + k) < m

    pair_a = rng.integers(0, 6, n)
    sign_a = rng.integers(0, 2, n)
    fmi = np.empty(n, dtype=np.int64)
    slot = np.empty(n, dtype=np.int64)
    port = np.empty(n, dtype=np.int64)

    iw = np.flatnonzero(winner_photon)
    if iw.size:
        nw = iw.size
        r = rng.integers(0, N_FMI, nw)
        delay = r + 1
        pa = pair_a[iw]
        s_loc = np.empty(nw, dtype=np.int64)
        p_loc = np.empty(nw, dtype=np.int64)
        dep = rng.random(nw) < config.depolarize_p

        idx = np.flatnonzero(dep)
        if idx.size:
            # Mixed state: uniform input slot, independent path and port.
            t = rng.integers(0, 4, idx.size)
            long_path = rng.integers(0, 2, idx.size)
            s_loc[idx] = t + delay[idx] * long_path
            p_loc[idx] = rng.integers(0, 2, idx.size)

        intact = ~dep
        matched = intact & (_PAIR_DELAY[pa] == delay)
        idx = np.flatnonzero(matched)
        if idx.size:
            interf = rng.random(idx.size) < 0.5
            ii = idx[interf]
            if ii.size:
                # Port statistics carry the interferometer misalignment.
                theta = np.asarray(config.misalignment)[r[ii]]
                sgn = 1.0 - 2.0 * sign_a[iw][ii]
                p_plus = (1.0 + sgn * np.cos(theta)) / 2.0
                s_loc[ii] = _PAIR_K[pa[ii]]
                p_loc[ii] = (rng.random(ii.size) >= p_plus).astype(np.int64)
            ni = idx[~interf]
            if ni.size:
                side = rng.integers(0, 2, ni.size)
                s_loc[ni] = np.where(side == 0, _PAIR_J[pa[ni]], _PAIR_K[pa[ni]] + delay[ni])
                p_loc[ni] = rng.integers(0, 2, ni.size)

        unmatched = intact & ~matched
        idx = np.flatnonzero(unmatched)
        if idx.size:
            jj = _PAIR_J[pa[idx]]
            kk = _PAIR_K[pa[idx]]
            options = np.stack([jj, jj + delay[idx], kk, kk + delay[idx]])
            choice = rng.integers(0, 4, idx.size)
            s_loc[idx] = options[choice, np.arange(idx.size)]
            p_loc[idx] = rng.integers(0, 2, idx.size)

        fmi[iw] = r
        slot[iw] = s_loc
        port[iw] = p_loc

    idark = np.flatnonzero(~winner_photon)
    if idark.size:
        gate = rng.integers(0, N_GATES, idark.size)
        fmi[idark] = gate // (N_SLOTS * 2)
        rem = gate % (N_SLOTS * 2)
        slot[idark] = rem // 2
        port[idark] = rem % 2

    delay_all = fmi + 1
    conclusive = (slot >= delay_all) & (slot <= 3)
    jm = np.where(conclusive, slot - delay_all, 0)
    km = np.where(conclusive, slot, 1)
    pair_m = _PAIR_ID[jm, km]
    sifted = conclusive & (_PAIR_BASIS[pair_m] == _PAIR_BASIS[pair_a])
    bit0 = (_PAIR_IDXB[pair_m] != _PAIR_IDXB[pair_a]).astype(np.int64)
    bit1 = (port != sign_a).astype(np.int64)
    g = (bit0 + 2 * bit1)[sifted]
    err = np.bincount(g, minlength=4)
    return int(sifted.sum()), err, multi


def run_campaign(config: SimConfig) -> TallySheet:
    """Simulate config.packets packets and tally per source intensity.

    Deterministic for a fixed seed: chunk substreams are derived from
    (seed, chunk index) and tallies are exact integer sums, independent
    of any execution schedule.
    """
    n_int = len(config.intensities)
    plans = [_plan_intensity(mu, config) for mu in config.intensities]
    sent = np.zeros(n_int, dtype=np.int64)
    detected = np.zeros(n_int, dtype=np.int64)
    sifted = np.zeros(n_int, dtype=np.int64)
    errors = np.zeros((n_int, 4), dtype=np.int64)
    multi = np.zeros(n_int, dtype=np.int64)
    remaining = config.packets
    chunk_index = 0
    probs = np.asarray(config.intensity_probs)
    while remaining > 0:
        size = min(_CHUNK, remaining)
        remaining -= size
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=config.seed, spawn_key=(chunk_index,))
        )
        chunk_index += 1
        counts = rng.multinomial(size, probs)
        for i in range(n_int):
            sent[i] += counts[i]
            n_click = int(rng.binomial(counts[i], plans[i].p_click))
            if n_click == 0:
                continue
            detected[i] += n_click
            s, err, mc = _detail_clicking(n_click, plans[i], config, rng)
            sifted[i] += s
            errors[i] += err
            multi[i] += mc
    return TallySheet(
        intensities=config.intensities,
        sent=tuple(int(x) for x in sent),
        detected=tuple(int(x) for x in detected),
        sifted=tuple(int(x) for x in sifted),
        error_counts=tuple(tuple(int(x) for x in row) for row in errors),
        multi_click=tuple(int(x) for x in multi),
    )


def load_sim_config(path: str | Path, *, seed_override: int | None = None) -> SimConfig:
    """Parse a campaign config from an INI-style key-value file.

    Schema (all keys required):

        [source]
        intensities   = 0.66, 0.04, 0.0016
        probabilities = 0.5, 0.25, 0.25
        [channel]
        loss_db       = 12.0
        depolarize_p  = 0.01
        [receiver]
        detector_efficiency = 0.2023
        dark_rate           = 2.58e-6
        misalignment        = 0.0, 0.0, 0.0
        [run]
        packets = 1000000
        seed    = 7
    """
    parser = configparser.ConfigParser()
    read = parser.read(str(path))
    if not read:
        raise ValueError(f"cannot read config file {path!r}")

    def floats(section: str, key: str) -> tuple[float, ...]:
        return tuple(float(x) for x in parser.get(section, key).split(","))

    try:
        misalignment = floats("receiver", "misalignment")
        if len(misalignment) != 3:
            raise ValueError("misalignment needs exactly 3 phases")
        return SimConfig(
            intensities=floats("source", "intensities"),
            intensity_probs=floats("source", "probabilities"),
            channel_loss_db=parser.getfloat("channel", "loss_db"),
            depolarize_p=parser.getfloat("channel", "depolarize_p"),
            misalignment=misalignment,  # type: ignore[arg-type]
            detector_efficiency=parser.getfloat("receiver", "detector_efficiency"),
            dark_rate=parser.getfloat("receiver", "dark_rate"),
            packets=parser.getint("run", "packets"),
            seed=parser.getint("run", "seed") if seed_override is None else seed_override,
        )
    except (configparser.Error, ValueError) as exc:
        raise ValueError(f"invalid simulation config: {exc}") from exc


def tally_to_records(sheet: TallySheet) -> list[IntensityRecord]:
    """Convert counts to decoy-pipeline records: Q and sifted E^1..E^3."""
    records = []
    for i, mu in enumerate(sheet.intensities):
        if sheet.sent[i] == 0:
            raise ValueError(f"no packets sent at intensity {mu}")
        if sheet.sifted[i] == 0:
            raise ValueError(f"no sifted events at intensity {mu}")
        gain = sheet.detected[i] / sheet.sent[i]
        s = sheet.sifted[i]
        rates = tuple(sheet.error_counts[i][g] / s for g in (1, 2, 3))
        records.append(IntensityRecord(intensity=mu, gain=gain, error_rates=rates))
    return records
