import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qpon_sim.decoy import (
    DecoyParams,
    binary_entropy,
    evaluate_operating_point,
    gain_and_qber,
    secure_key_rate,
    single_photon_bounds,
)
from qpon_sim.detector import DetectorModel
from qpon_sim.errors import ConfigError, DomainError

DET = DetectorModel(efficiency=0.2, pulse_rate_hz=25e6)
PARAMS = DecoyParams()


class TestBinaryEntropy:
    def test_boundaries(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == 1.0

    def test_near_cutoff_value(self):
        assert binary_entropy(0.11) == pytest.approx(0.499916, abs=1e-6)

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_symmetry(self, x):
        assert binary_entropy(x) == pytest.approx(binary_entropy(1.0 - x), abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            binary_entropy(-0.1)
        with pytest.raises(DomainError):
            binary_entropy(1.1)


class TestDecoyParams:
    def test_intensity_ordering(self):
        with pytest.raises(ConfigError):
            DecoyParams(mu=0.1, nu=0.5)

    def test_misalignment_range(self):
        with pytest.raises(ConfigError):
            DecoyParams(misalignment_error=0.5)

    def test_ec_inefficiency(self):
        with pytest.raises(ConfigError):
            DecoyParams(ec_inefficiency=0.9)


class TestGainAndQber:
    def test_clean_channel_has_no_errors(self):
        params = DecoyParams(misalignment_error=0.0)
        for eta_ch, intensity in ((0.5, 0.5), (0.01, 0.1), (1.0, 2.0)):
            _, e = gain_and_qber(eta_ch, DET, 0.0, intensity, params)
            assert e == 0.0

    def test_saturation(self):
        det = DetectorModel(efficiency=1.0)
        q, e = gain_and_qber(1.0, det, 0.0, 1e4, PARAMS)
        assert q == pytest.approx(1.0, abs=1e-12)
        assert e == pytest.approx(PARAMS.misalignment_error, rel=1e-9)

    def test_reference_point(self):
        det = DetectorModel(efficiency=0.2)
        q, e = gain_and_qber(0.5, det, 1e-5, 0.5, PARAMS)  # eta = 0.1
        assert q == pytest.approx(0.0487806, abs=1e-7)
        assert e == pytest.approx(0.010100, abs=1e-5)

    def test_zero_gain_convention(self):
        q, e = gain_and_qber(0.0, DetectorModel(efficiency=0.0, dark_count_prob=0.0),
                             0.0, 0.5, PARAMS)
        assert q == 0.0
        assert e == PARAMS.background_error


def model_observables(eta: float, y0: float, params: DecoyParams):
    """(Q_mu, E_mu, Q_nu, E_nu) of the Poisson channel family."""
    out = []
    for intensity in (params.mu, params.nu):
        signal = -math.expm1(-eta * intensity)
        q = y0 + signal
        e = (params.background_error * y0 + params.misalignment_error * signal) / q
        out.extend([q, e])
    return tuple(out)


class TestSinglePhotonBounds:
    def test_noiseless_perfect_channel(self):
        params = DecoyParams(mu=0.5, nu=0.1, misalignment_error=0.0)
        q_mu, e_mu, q_nu, e_nu = model_observables(1.0, 0.0, params)
        y1, e1 = single_photon_bounds(q_mu, e_mu, q_nu, e_nu, 0.0, params)
        assert 0.0 < y1 <= 1.0
        assert e1 == 0.0

    def test_sound_on_model_family(self):
        # The bounds must bracket the true single-photon yield (y0 + eta)
        # and error of the same channel family, for random draws.
        rng = np.random.default_rng(52_2026)
        for _ in range(100):
            eta = float(rng.uniform(1e-4, 0.3))
            y0 = float(rng.uniform(1e-7, 1e-3))
            params = DecoyParams(
                mu=float(rng.uniform(0.3, 0.8)),
                nu=float(rng.uniform(0.05, 0.2)),
                misalignment_error=float(rng.uniform(0.0, 0.05)),
            )
            q_mu, e_mu, q_nu, e_nu = model_observables(eta, y0, params)
            y1, e1 = single_photon_bounds(q_mu, e_mu, q_nu, e_nu, y0, params)
            true_y1 = y0 + eta
            true_e1 = (
                params.background_error * y0 + params.misalignment_error * eta
            ) / true_y1
            assert y1 <= true_y1 + 1e-12
            assert e1 >= min(true_e1, 0.5) - 1e-12

    def test_collapse_signals_no_single_photon_signal(self):
        # A weak-decoy gain far below the signal gain admits no
        # single-photon yield: the bound collapses to (0, 1/2).
        y1, e1 = single_photon_bounds(0.5, 0.05, 0.01, 0.05, 0.01, PARAMS)
        assert (y1, e1) == (0.0, 0.5)


class TestSecureKeyRate:
    def test_zero_at_high_qber(self):
        point = secure_key_rate(0.01, 0.2, 0.01, 0.2, PARAMS, 25e6)
        assert point.r_bits_per_pulse == 0.0
        assert point.skr_bps == 0.0

    def test_positive_for_clean_channel(self):
        params = DecoyParams(misalignment_error=0.0)
        for eta_ch in (1e-4, 1e-2, 0.5):
            point = evaluate_operating_point(eta_ch, DET, 0.0, params)
            assert point.r_bits_per_pulse > 0.0

    def test_rate_never_negative_and_zero_without_y1(self):
        point = secure_key_rate(0.1, 0.05, 0.0, 0.5, PARAMS, 25e6)
        assert point.r_bits_per_pulse == 0.0

    def test_skr_scales_with_pulse_rate(self):
        point = evaluate_operating_point(3e-3, DET, 1e-5, PARAMS)
        assert point.skr_bps == pytest.approx(point.r_bits_per_pulse * 25e6, rel=1e-12)

    def test_monotone_in_background_and_misalignment(self):
        eta_ch = 3.4e-3
        rates_y0 = [
            evaluate_operating_point(eta_ch, DET, y0, PARAMS).r_bits_per_pulse
            for y0 in np.linspace(0.0, 6e-5, 25)
        ]
        assert all(a >= b for a, b in zip(rates_y0, rates_y0[1:]))
        rates_ed = [
            evaluate_operating_point(
                eta_ch, DET, 1e-5, DecoyParams(misalignment_error=e_d)
            ).r_bits_per_pulse
            for e_d in np.linspace(0.0, 0.05, 25)
        ]
        assert all(a >= b for a, b in zip(rates_ed, rates_ed[1:]))

    def test_q1_lower_definition(self):
        point = secure_key_rate(0.01, 0.01, 0.2, 0.01, PARAMS, 25e6)
        assert point.q1_lower == pytest.approx(0.2 * 0.5 * math.exp(-0.5), rel=1e-12)
