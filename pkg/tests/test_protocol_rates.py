import numpy as np
import pytest
from pytest import approx

from quditqkd.protocol_rates import (
    AXES,
    DEFAULT_PROTOCOLS,
    PROTOCOLS,
    RateCurveSpec,
    SS4_SIFT_BIASED,
    SS4_SIFT_EXTREME,
    SS4_SIFT_UNBIASED,
    curve_value,
    emit_curve,
    find_crossover,
    find_threshold,
    rate_bb84,
    rate_reduced_cww4,
    rate_six_state_core,
    rate_ss4,
)
from quditqkd.cww4 import rate_cww4_ber, rate_cww4_der


def test_six_state_values():
    assert rate_six_state_core(0.0) == approx(1.0, abs=1e-12)
    assert rate_six_state_core(0.05) == approx(0.4968163, abs=1e-6)
    assert rate_six_state_core(0.2) == 0.0
    assert rate_six_state_core(0.2, clamp=False) < 0.0


def test_bb84_values():
    assert rate_bb84(0.0) == approx(1.0, abs=1e-12)
    assert rate_bb84(0.05) == approx(0.4272061, abs=1e-6)
    assert rate_bb84(0.2) == 0.0


def test_ss4_values():
    assert rate_ss4(0.0, SS4_SIFT_UNBIASED) == approx(0.5, abs=1e-12)
    assert rate_ss4(0.0, SS4_SIFT_EXTREME) == approx(1.0, abs=1e-12)
    assert rate_ss4(0.0, SS4_SIFT_BIASED) == approx(0.82, abs=1e-12)
    assert rate_ss4(0.075, 0.5) == approx(0.2484081, abs=1e-6)


def test_ss4_sift_factor_is_a_prefactor():
    for e_star in (0.02, 0.1, 0.17):
        base = rate_ss4(e_star, 1.0, clamp=False)
        assert rate_ss4(e_star, 0.5, clamp=False) == approx(0.5 * base, abs=1e-12)
        assert rate_ss4(e_star, 0.82, clamp=False) == approx(0.82 * base, abs=1e-12)


def test_reduced_values():
    assert rate_reduced_cww4(0.0, 1.0) == approx(0.5, abs=1e-12)
    assert rate_reduced_cww4(0.0, 0.8) == approx(0.4, abs=1e-12)
    for e in (0.02, 0.08):
        assert rate_reduced_cww4(e, 1.0) == approx(
            rate_six_state_core(e) / 2.0, abs=1e-12
        )


def test_ss4_is_1p5x_sixstate_per_packet():
    # unbiased two-basis scheme vs the qudit-normalized six-state curve
    for e in np.linspace(0.005, 0.119, 25):
        ratio = rate_ss4(1.5 * e, SS4_SIFT_UNBIASED) / (
            (1.0 / 3.0) * rate_six_state_core(float(e))
        )
        assert ratio == approx(1.5, abs=1e-6)


def test_domain_rejection():
    with pytest.raises(ValueError, match="outside"):
        rate_six_state_core(0.7)
    with pytest.raises(ValueError, match="outside"):
        rate_bb84(0.6)
    with pytest.raises(ValueError, match="outside"):
        rate_ss4(0.8, 0.5)
    with pytest.raises(ValueError, match="sift factor"):
        rate_ss4(0.1, 0.0)
    with pytest.raises(ValueError, match="acceptance fraction"):
        rate_reduced_cww4(0.1, 1.5)


def test_thresholds():
    assert find_threshold(rate_six_state_core, 1e-6, 0.3) == approx(
        0.1261931, abs=1e-6
    )
    assert find_threshold(rate_bb84, 1e-6, 0.3) == approx(0.1100279, abs=1e-6)
    for sift in (SS4_SIFT_UNBIASED, SS4_SIFT_BIASED, SS4_SIFT_EXTREME):
        # prefactors never move the zero
        assert find_threshold(lambda e: rate_ss4(e, sift), 1e-6, 0.4) == approx(
            0.1892896, abs=1e-6
        )
    assert find_threshold(
        lambda e: rate_cww4_der(e, clamp=False), 1e-6, 0.4
    ) == approx(0.2163857, abs=1e-6)


def test_ber_threshold_matches_sixstate():
    thr = find_threshold(lambda e: rate_cww4_ber(e, clamp=False), 1e-4, 0.3)
    assert thr == approx(0.1261931, abs=1e-4)


def test_crossovers():
    cww4 = lambda e: rate_cww4_der(e, clamp=False)
    assert find_crossover(
        cww4, lambda e: rate_ss4(e, SS4_SIFT_UNBIASED, clamp=False), 0.01, 0.18
    ) == approx(0.1442641, abs=1e-6)
    assert find_crossover(
        cww4, lambda e: rate_ss4(e, SS4_SIFT_EXTREME, clamp=False), 0.01, 0.21
    ) == approx(0.1768192, abs=1e-6)


def test_find_threshold_rejects_bad_bracket():
    with pytest.raises(ValueError, match="not positive at lo"):
        find_threshold(lambda e: -1.0, 0.0, 0.3)
    with pytest.raises(ValueError, match="still positive at hi"):
        find_threshold(lambda e: 1.0, 0.0, 0.3)


def test_find_crossover_rejects_bad_bracket():
    with pytest.raises(ValueError, match="not below"):
        find_crossover(lambda e: 1.0, lambda e: 0.0, 0.0, 0.3)
    with pytest.raises(ValueError, match="not above"):
        find_crossover(lambda e: 0.0, lambda e: 1.0, 0.0, 0.3)


def test_curves_nonincreasing():
    for protocol in PROTOCOLS:
        for axis in AXES:
            try:
                spec = RateCurveSpec(protocol, axis, (0.0,))
            except ValueError:
                continue
            n = 60 if protocol == "cww4_ber" else 1000
            lo, hi = 0.0, {"ber": 0.45, "der": 0.7}[axis]
            if protocol in ("six_state", "cww4_ber", "reduced_cww4") and axis == "ber":
                hi = 0.6
            xs = np.linspace(lo, hi, n)
            vals = [curve_value(spec, float(x)) for x in xs]
            assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:])), protocol


def test_der_ordering_matches_figure():
    # above each threshold the clamped curves sit at 0, so restrict below
    for e_star in np.linspace(0.01, 0.12, 12):
        vals = {
            p: curve_value(RateCurveSpec(p, "der", (float(e_star),)), float(e_star))
            for p in DEFAULT_PROTOCOLS["der"]
        }
        assert vals["ss4_extreme"] >= vals["ss4_biased"] >= vals["ss4_unbiased"]
        assert vals["cww4_der"] >= vals["six_state"] - 1e-12


def test_curve_axis_mappings():
    e = 0.04
    six_der = curve_value(RateCurveSpec("six_state", "der", (e,)), e)
    assert six_der == approx(rate_six_state_core(2 * e / 3) / 3.0, abs=1e-12)
    cww4_ber = curve_value(RateCurveSpec("cww4_der", "ber", (e,)), e)
    assert cww4_ber == approx(rate_cww4_der(1.5 * e), abs=1e-12)
    bb84 = curve_value(RateCurveSpec("bb84", "ber", (e,)), e)
    assert bb84 == approx(0.5 * rate_bb84(e), abs=1e-12)


def test_emit_curve_zero_rows():
    der0 = [
        emit_curve(RateCurveSpec(p, "der", (0.0, 0.1)))[0, 1]
        for p in DEFAULT_PROTOCOLS["der"]
    ]
    assert der0 == approx((1.0, 0.82, 0.5, 1 / 3, 1 / 3), abs=1e-9)
    ber0 = [
        emit_curve(RateCurveSpec(p, "ber", (0.0, 0.1)))[0, 1]
        for p in DEFAULT_PROTOCOLS["ber"]
    ]
    assert ber0 == approx((1.0, 0.82, 0.5, 0.5, 1 / 3, 1 / 3), abs=1e-9)


def test_emit_curve_shape():
    grid = (0.0, 0.02, 0.04)
    table = emit_curve(RateCurveSpec("bb84", "ber", grid))
    assert table.shape == (3, 2)
    assert tuple(table[:, 0]) == grid
    empty = emit_curve(RateCurveSpec("bb84", "ber", ()))
    assert empty.shape == (0, 2)


def test_curve_spec_validation():
    with pytest.raises(ValueError, match="unknown protocol"):
        RateCurveSpec("b92", "ber", (0.0,))
    with pytest.raises(ValueError, match="unknown axis"):
        RateCurveSpec("bb84", "qber", (0.0,))
    with pytest.raises(ValueError, match="has no der curve"):
        RateCurveSpec("bb84", "der", (0.0,))
    with pytest.raises(ValueError, match="strictly increasing"):
        RateCurveSpec("bb84", "ber", (0.1, 0.1))
    with pytest.raises(ValueError, match="outside"):
        RateCurveSpec("bb84", "ber", (0.0, 0.6))
