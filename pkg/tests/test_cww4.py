import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

from quditqkd.cww4 import (
    AbcdModel,
    ErrorSpectrum4,
    EstimateClampWarning,
    PauliTable16,
    Q_BASIS_MATCH,
    _worstcase_f,
    _worstcase_fprime,
    abcd_from_single_photon,
    ber_worstcase_model,
    delta_spectra,
    rate_cww4_ber,
    rate_cww4_der,
    secret_key_rate,
    solve_worstcase_e01,
    worstcase_table,
)
from quditqkd.entropy import binary_entropy, shannon_entropy_bits

# Single-photon bounds and matching inversion used throughout, chosen so the
# fit is exactly consistent (no clamping).
SPECTRUM_50KM = ErrorSpectrum4(0.9768, 0.0021, 0.019, 0.0021)
ABCD_50KM = (0.966775, 0.000525, 0.008975, 0.000525)


def abcd_models():
    return (
        st.lists(
            st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
            min_size=4,
            max_size=4,
        )
        .filter(lambda w: w[0] + 3 * w[1] + 3 * w[2] + 9 * w[3] > 1e-6)
        .map(
            lambda w: AbcdModel(
                *(x / (w[0] + 3 * w[1] + 3 * w[2] + 9 * w[3]) for x in w)
            )
        )
    )


def test_error_spectrum_validation():
    with pytest.raises(ValueError, match="negative error rate"):
        ErrorSpectrum4(0.9, 0.2, -0.1, 0.0)
    with pytest.raises(ValueError, match="sum to"):
        ErrorSpectrum4(0.5, 0.1, 0.1, 0.1)
    v = ErrorSpectrum4(0.25, 0.25, 0.25, 0.25 + 4e-10)
    assert math.fsum(v.as_tuple()) == approx(1.0, abs=1e-15)


def test_abcd_constraint_validation():
    AbcdModel(1.0, 0.0, 0.0, 0.0)
    AbcdModel(0.0625, 0.0625, 0.0625, 0.0625)
    with pytest.raises(ValueError, match="constraint"):
        AbcdModel(0.5, 0.1, 0.1, 0.01)
    with pytest.raises(ValueError, match="negative model value"):
        AbcdModel(1.06, -0.02, 0.0, 0.0)


def test_pauli_table_validation():
    with pytest.raises(ValueError, match="4x4"):
        PauliTable16(entries=((1.0,),))
    flat_uniform = tuple((0.0625,) * 4 for _ in range(4))
    t = PauliTable16(entries=flat_uniform)
    assert t.entropy_bits() == approx(4.0, abs=1e-12)
    assert t.spin_marginal().as_tuple() == approx((0.25,) * 4)
    assert t.phase_marginal().as_tuple() == approx((0.25,) * 4)


def test_abcd_inversion_50km():
    m = abcd_from_single_photon(SPECTRUM_50KM)
    assert (m.a, m.b, m.c, m.d) == approx(ABCD_50KM, abs=1e-12)


def test_abcd_inversion_identity_spectrum():
    m = abcd_from_single_photon(ErrorSpectrum4(1.0, 0.0, 0.0, 0.0))
    assert (m.a, m.b, m.c, m.d) == approx((1.0, 0.0, 0.0, 0.0), abs=1e-15)


def test_abcd_inversion_uniform_spectrum():
    # fully depolarized: every one of the 16 joint cells equally likely
    m = abcd_from_single_photon(ErrorSpectrum4(0.25, 0.25, 0.25, 0.25))
    assert (m.a, m.b, m.c, m.d) == approx((0.0625,) * 4, abs=1e-12)


@given(abcd_models())
def test_abcd_round_trip(m):
    back = abcd_from_single_photon(m.single_photon_spectrum())
    assert (back.a, back.b, back.c, back.d) == approx(
        (m.a, m.b, m.c, m.d), abs=1e-9
    )


def test_abcd_clamp_warns_on_inconsistent_spectrum():
    # e^3 > 2 e^1 forces B < 0 in the exact inversion
    with pytest.warns(EstimateClampWarning):
        m = abcd_from_single_photon(ErrorSpectrum4(0.9, 0.0, 0.06, 0.04))
    assert min(m.a, m.b, m.c, m.d) >= 0.0


def test_table_marginals_match_spectrum():
    m = abcd_from_single_photon(SPECTRUM_50KM)
    spect = m.single_photon_spectrum().as_tuple()
    t = m.as_table()
    assert t.spin_marginal().as_tuple() == approx(spect, abs=1e-12)
    assert t.phase_marginal().as_tuple() == approx(spect, abs=1e-12)


def test_delta_spectra_50km_entropies():
    m = abcd_from_single_photon(SPECTRUM_50KM)
    d0, d1, d2, d3 = delta_spectra(m)
    assert shannon_entropy_bits(d0) == approx(0.0885730, abs=1e-6)
    assert shannon_entropy_bits(d1) == approx(2.0, abs=1e-12)  # B = D here
    assert shannon_entropy_bits(d2) == approx(1.3083471, abs=1e-6)
    assert shannon_entropy_bits(d3) == approx(2.0, abs=1e-12)


def test_delta_spectra_closed_forms():
    m = AbcdModel(0.64, 0.04, 0.02, 0.02)
    d0, d1, d2, d3 = delta_spectra(m)
    s0 = m.a + m.b + m.c + m.d
    assert tuple(d0) == approx(
        (m.a / s0, m.b / s0, m.c / s0, m.d / s0), abs=1e-12
    )
    assert shannon_entropy_bits(d1) == approx(
        1.0 + binary_entropy(m.b / (m.b + m.d)), abs=1e-12
    )
    assert shannon_entropy_bits(d2) == approx(
        1.0 + binary_entropy(m.c / (m.c + m.d)), abs=1e-12
    )
    assert tuple(d3) == (0.25, 0.25, 0.25, 0.25)


def test_delta_spectra_zero_mass_uniform_convention():
    m = AbcdModel(1.0, 0.0, 0.0, 0.0)
    _, d1, d2, d3 = delta_spectra(m)
    for d in (d1, d2, d3):
        assert tuple(d) == (0.25, 0.25, 0.25, 0.25)


@settings(max_examples=150)
@given(abcd_models())
def test_chain_rule_identity(m):
    # sum_g e1^g H(delta^g) = H(16-entry table) - H(e1 spectrum)
    spect = m.single_photon_spectrum().as_tuple()
    deltas = delta_spectra(m)
    lhs = sum(
        e * shannon_entropy_bits(d) for e, d in zip(spect, deltas) if e > 0
    )
    rhs = m.as_table().entropy_bits() - shannon_entropy_bits(spect)
    assert lhs == approx(rhs, abs=1e-9)


def test_key_rate_noiseless_limit():
    perfect = ErrorSpectrum4(1.0, 0.0, 0.0, 0.0)
    rep = secret_key_rate(1 / 3, 2.0, 1.0, perfect, 1.0, perfect)
    assert rep.rate == approx(1 / 3, abs=1e-12)
    assert rep.raw_rate == rep.rate
    assert rep.entropy_observed == 0.0


def test_key_rate_50km_point():
    observed = ErrorSpectrum4(0.97757, 0.00216, 0.0181, 0.00217)
    rep = secret_key_rate(
        1 / 3, 2.0, 5.63e-3, observed, 0.5075441846718655, SPECTRUM_50KM
    )
    assert rep.rate == approx(7.311707e-4, rel=1e-5)
    assert rep.gain == 5.63e-3
    assert rep.omega == approx(0.5075442, abs=1e-7)


def test_key_rate_swap_12_invariance():
    # relabeling error classes 1 and 2 consistently leaves the rate unchanged
    observed = ErrorSpectrum4(0.96, 0.008, 0.022, 0.01)
    single = ErrorSpectrum4(0.95, 0.01, 0.03, 0.01)
    rep = secret_key_rate(1 / 3, 2.0, 0.01, observed, 0.6, single)
    swapped = secret_key_rate(
        1 / 3,
        2.0,
        0.01,
        ErrorSpectrum4(0.96, 0.022, 0.008, 0.01),
        0.6,
        ErrorSpectrum4(0.95, 0.03, 0.01, 0.01),
    )
    assert swapped.raw_rate == approx(rep.raw_rate, abs=1e-12)


def test_key_rate_clamps_negative_raw():
    noisy = ErrorSpectrum4(0.4, 0.2, 0.2, 0.2)
    rep = secret_key_rate(1 / 3, 2.0, 0.01, noisy, 0.5, noisy)
    assert rep.raw_rate < 0.0
    assert rep.rate == 0.0


def test_key_rate_rejects_bad_inputs():
    perfect = ErrorSpectrum4(1.0, 0.0, 0.0, 0.0)
    with pytest.raises(ValueError, match="sifting probability"):
        secret_key_rate(0.0, 2.0, 0.5, perfect, 1.0, perfect)
    with pytest.raises(ValueError, match="gain"):
        secret_key_rate(1 / 3, 2.0, 0.0, perfect, 1.0, perfect)
    with pytest.raises(ValueError, match="omega"):
        secret_key_rate(1 / 3, 2.0, 0.5, perfect, 1.2, perfect)


def test_worstcase_f_brackets_and_monotone():
    for e_star in (0.05, 0.1, 0.2, 0.3):
        assert _worstcase_f(0.0, e_star) < 0.0
        assert _worstcase_f(e_star / 6.0, e_star) > 0.0
        xs = np.linspace(0.0, e_star / 6.0, 200)
        fs = [_worstcase_f(x, e_star) for x in xs]
        assert all(b > a for a, b in zip(fs, fs[1:]))
        assert all(_worstcase_fprime(x, e_star) > 0.0 for x in xs[:-1])


def test_solver_matches_grid_argmax():
    # independent oracle: dense scan of the one-parameter table entropy
    for e_star in (0.07, 0.13, 0.216):
        xs = np.linspace(0.0, e_star / 6.0, 100_001)
        t = (e_star - 6.0 * xs) / 6.0
        e00 = 1.0 - 3.0 * xs - e_star

        def plog(v):
            out = np.zeros_like(v)
            mask = v > 0
            out[mask] = v[mask] * np.log2(v[mask])
            return out

        h = -(plog(e00) + 9.0 * plog(xs) + 6.0 * plog(t))
        grid_best = xs[int(np.argmax(h))]
        assert solve_worstcase_e01(e_star) == approx(grid_best, abs=1e-5)


def test_solver_root_is_interior_zero():
    root = solve_worstcase_e01(0.1)
    assert 0.0 < root < 0.1 / 6.0
    assert _worstcase_f(root, 0.1) == approx(0.0, abs=1e-10)


def test_solver_domain():
    with pytest.raises(ValueError, match="outside"):
        solve_worstcase_e01(0.0)
    with pytest.raises(ValueError, match="outside"):
        solve_worstcase_e01(0.75)


def test_worstcase_table_marginals():
    for e_star in (0.05, 0.15, 0.216):
        t = worstcase_table(e_star)
        expected = (1.0 - e_star, e_star / 3.0, e_star / 3.0, e_star / 3.0)
        assert t.spin_marginal().as_tuple() == approx(expected, abs=1e-9)
        assert t.phase_marginal().as_tuple() == approx(expected, abs=1e-9)


def test_worstcase_entropy_near_threshold():
    assert worstcase_table(0.216).entropy_bits() == approx(1.9973736, abs=1e-6)
    assert worstcase_table(0.2163857).entropy_bits() == approx(2.0, abs=1e-5)


def test_rate_der_values():
    assert rate_cww4_der(0.0) == approx(Q_BASIS_MATCH, abs=1e-12)
    assert rate_cww4_der(0.05) == approx(0.2285901, abs=1e-6)
    assert rate_cww4_der(0.216) == approx(0.0, abs=1e-3)
    assert rate_cww4_der(0.3) == 0.0
    assert rate_cww4_der(0.3, clamp=False) < 0.0


def test_rate_der_monotone_nonincreasing():
    es = np.linspace(0.0, 0.4, 80)
    rates = [rate_cww4_der(float(e), clamp=False) for e in es]
    assert all(b <= a + 1e-12 for a, b in zip(rates, rates[1:]))


def test_rate_der_domain():
    with pytest.raises(ValueError, match="outside"):
        rate_cww4_der(0.75)
    with pytest.raises(ValueError, match="outside"):
        rate_cww4_der(-0.01)


def test_rate_ber_values():
    assert rate_cww4_ber(0.0) == approx(Q_BASIS_MATCH, abs=1e-12)
    assert rate_cww4_ber(0.05) == approx(0.1656054, abs=1e-4)
    assert rate_cww4_ber(0.127, clamp=False) < 0.0 < rate_cww4_ber(
        0.125, clamp=False
    )


def test_rate_ber_domain():
    with pytest.raises(ValueError, match="outside"):
        rate_cww4_ber(2.0 / 3.0)


def test_rate_ber_monotone_nonincreasing():
    es = np.linspace(0.0, 0.3, 40)
    rates = [rate_cww4_ber(float(e), clamp=False) for e in es]
    assert all(b <= a + 1e-7 for a, b in zip(rates, rates[1:]))


def test_ber_worstcase_matches_sixstate_structure():
    # entropy of the minimizing table equals twice the binary-channel value
    for e in (0.02, 0.06, 0.1):
        m = ber_worstcase_model(e)
        h = m.as_table().entropy_bits()
        target = 2.0 * shannon_entropy_bits(
            (1.0 - 1.5 * e, 0.5 * e, 0.5 * e, 0.5 * e)
        )
        assert h == approx(target, abs=1e-4)


def test_ber_worstcase_respects_constraint():
    for e in (0.01, 0.08, 0.2):
        m = ber_worstcase_model(e)
        assert m.b + m.c + 6.0 * m.d == approx(e, abs=1e-9)
