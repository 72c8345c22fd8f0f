"""Key rates, decoy-state estimation, and Monte Carlo simulation for
four-dimensional time-bin qudit QKD."""

from .entropy import ProbVec, binary_entropy, shannon_entropy_bits
from .cww4 import (
    AbcdModel,
    ErrorSpectrum4,
    EstimateClampWarning,
    KeyRateReport,
    PauliTable16,
    abcd_from_single_photon,
    delta_spectra,
    rate_cww4_ber,
    rate_cww4_der,
    secret_key_rate,
    solve_worstcase_e01,
    worstcase_table,
)
from .protocol_rates import (
    RateCurveSpec,
    emit_curve,
    find_crossover,
    find_threshold,
    rate_bb84,
    rate_reduced_cww4,
    rate_six_state_core,
    rate_ss4,
)
from .decoy import (
    IntensityRecord,
    SinglePhotonBounds,
    estimate_all,
    estimate_e1_class,
    estimate_y0,
    estimate_y1,
    poisson_mix,
)
from .simulator import (
    PacketOutcome,
    QuditKet,
    SimConfig,
    TallySheet,
    apply_channel,
    load_sim_config,
    measure_fmi,
    prepare_state,
    receive_packet,
    run_campaign,
    tally_to_records,
)
from .pipeline import (
    ExperimentInput,
    analyze_bb84,
    analyze_cww4,
    experiment_input_from_json,
    experiment_input_to_json,
)

__all__ = [
    "AbcdModel",
    "ErrorSpectrum4",
    "EstimateClampWarning",
    "ExperimentInput",
    "IntensityRecord",
    "KeyRateReport",
    "PacketOutcome",
    "PauliTable16",
    "ProbVec",
    "QuditKet",
    "RateCurveSpec",
    "SimConfig",
    "SinglePhotonBounds",
    "TallySheet",
    "abcd_from_single_photon",
    "analyze_bb84",
    "analyze_cww4",
    "apply_channel",
    "binary_entropy",
    "delta_spectra",
    "emit_curve",
    "estimate_all",
    "estimate_e1_class",
    "estimate_y0",
    "estimate_y1",
    "experiment_input_from_json",
    "experiment_input_to_json",
    "find_crossover",
    "find_threshold",
    "load_sim_config",
    "measure_fmi",
    "poisson_mix",
    "prepare_state",
    "rate_bb84",
    "rate_cww4_ber",
    "rate_cww4_der",
    "rate_reduced_cww4",
    "rate_six_state_core",
    "rate_ss4",
    "receive_packet",
    "run_campaign",
    "secret_key_rate",
    "shannon_entropy_bits",
    "solve_worstcase_e01",
    "tally_to_records",
    "worstcase_table",
]
