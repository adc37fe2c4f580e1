import math

import numpy as np
import pytest

from qpon_sim.errors import ConfigError
from qpon_sim.decoy import DecoyParams, single_photon_bounds
from qpon_sim.oracle import (
    OracleConfig,
    analytic_gain_and_qber,
    analytic_yield_given_one,
    run_oracle,
)


def three_sigma(p: float, n: int) -> float:
    return 3.0 * math.sqrt(max(p * (1.0 - p), 1e-300) / n)


class TestDeterminism:
    CFG = OracleConfig(
        n_pulses=600_000, seed=987, intensity=0.5, detection_efficiency=0.05,
        dark_count_prob=1e-6, noise_click_prob=2e-5, misalignment_error=0.02,
    )

    def test_same_seed_same_tally(self):
        a = run_oracle(self.CFG)
        b = run_oracle(self.CFG)
        assert a == b

    def test_thread_count_does_not_change_tally(self):
        serial = run_oracle(self.CFG, threads=1)
        for threads in (2, 4, 7):
            assert run_oracle(self.CFG, threads=threads) == serial

    def test_different_seed_different_tally(self):
        other = OracleConfig(
            n_pulses=600_000, seed=988, intensity=0.5, detection_efficiency=0.05,
            dark_count_prob=1e-6, noise_click_prob=2e-5, misalignment_error=0.02,
        )
        assert run_oracle(other) != run_oracle(self.CFG)


class TestTrivialCases:
    def test_dark_silent_source_never_clicks(self):
        cfg = OracleConfig(n_pulses=100_000, seed=1, intensity=0.0,
                           detection_efficiency=0.5)
        tally = run_oracle(cfg)
        assert tally.total_clicks == 0
        assert tally.total_errors == 0

    def test_bucket_counts_sum_to_pulses(self):
        cfg = OracleConfig(n_pulses=250_000, seed=7, intensity=1.3,
                           detection_efficiency=0.3, noise_click_prob=1e-4)
        tally = run_oracle(cfg)
        assert sum(tally.sent) == cfg.n_pulses
        assert all(e <= c <= s for s, c, e in zip(tally.sent, tally.clicks, tally.errors))

    def test_overflow_guard(self):
        with pytest.raises(ConfigError, match="64-bit"):
            OracleConfig(n_pulses=2**63, seed=0, intensity=0.5, detection_efficiency=0.1)


class TestAgainstAnalyticModel:
    def test_bright_source_gain(self):
        cfg = OracleConfig(n_pulses=1_000_000, seed=3, intensity=10.0,
                           detection_efficiency=1.0)
        tally = run_oracle(cfg)
        expected = 1.0 - math.exp(-10.0)
        assert abs(tally.gain - expected) <= three_sigma(expected, cfg.n_pulses)

    def test_reference_operating_point_seed_42(self):
        # mu=0.5, eta=0.1, background 1e-5: the analytic gain is 0.0487806.
        cfg = OracleConfig(n_pulses=10_000_000, seed=42, intensity=0.5,
                           detection_efficiency=0.1, noise_click_prob=1e-5)
        tally = run_oracle(cfg)
        assert abs(tally.gain - 0.0487806) <= three_sigma(0.0487806, cfg.n_pulses)

    def test_gain_and_qber_match(self):
        cfg = OracleConfig(n_pulses=2_000_000, seed=11, intensity=0.4,
                           detection_efficiency=0.02, dark_count_prob=2e-6,
                           noise_click_prob=5e-5, misalignment_error=0.03)
        tally = run_oracle(cfg)
        q_true, e_true = analytic_gain_and_qber(cfg)
        assert abs(tally.gain - q_true) <= three_sigma(q_true, cfg.n_pulses)
        assert abs(tally.qber - e_true) <= three_sigma(e_true, tally.total_clicks)

    def test_single_photon_yield(self):
        cfg = OracleConfig(n_pulses=2_000_000, seed=13, intensity=0.6,
                           detection_efficiency=0.08, dark_count_prob=1e-6,
                           noise_click_prob=3e-5, misalignment_error=0.01)
        tally = run_oracle(cfg)
        y1_true = analytic_yield_given_one(cfg)
        assert abs(tally.yield_given_n(1) - y1_true) <= three_sigma(y1_true, tally.sent[1])


class TestDecoyBoundSoundness:
    def test_bounds_hold_against_empirical_single_photons(self):
        params = DecoyParams(mu=0.5, nu=0.1, misalignment_error=0.015)
        eta = 0.03
        background = dict(dark_count_prob=1e-6, noise_click_prob=2e-5)
        mu_cfg = OracleConfig(n_pulses=4_000_000, seed=21, intensity=params.mu,
                              detection_efficiency=eta,
                              misalignment_error=params.misalignment_error, **background)
        nu_cfg = OracleConfig(n_pulses=4_000_000, seed=22, intensity=params.nu,
                              detection_efficiency=eta,
                              misalignment_error=params.misalignment_error, **background)
        mu_tally = run_oracle(mu_cfg)
        nu_tally = run_oracle(nu_cfg)
        y0 = mu_cfg.background_prob
        y1_lower, e1_upper = single_photon_bounds(
            mu_tally.gain, mu_tally.qber, nu_tally.gain, nu_tally.qber, y0, params
        )
        assert y1_lower <= mu_tally.yield_given_n(1) + 3.0 * mu_tally.yield_se(1) + _bound_se(
            mu_tally, nu_tally, params
        )
        assert e1_upper >= mu_tally.error_given_n(1) - 3.0 * mu_tally.error_se(1)


def _bound_se(mu_tally, nu_tally, params: DecoyParams) -> float:
    """First-order 3-sigma width of the Y1 lower bound from the input gains."""
    mu, nu = params.mu, params.nu
    a = (mu / (mu * nu - nu * nu)) * math.exp(nu)
    b = (mu / (mu * nu - nu * nu)) * math.exp(mu) * nu * nu / (mu * mu)
    var = (a * nu_tally.gain_se) ** 2 + (b * mu_tally.gain_se) ** 2
    return 3.0 * math.sqrt(var)
