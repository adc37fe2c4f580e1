import math
from dataclasses import replace

import pytest

from qpon_sim.errors import CalibrationError, ConfigError
from qpon_sim.raman import RamanEfficiencyTable
from qpon_sim.runner import (
    CalibrationAnchors,
    DEFAULT_RAMAN_ENTRIES,
    Scenario,
    SweepAxis,
    SweepSpec,
    calibrate,
    find_power_threshold,
    rate_at,
    run_sweep,
    verify_anchors,
)

BASE = Scenario()


def quick_sweep(**overrides) -> Scenario:
    # Subset of the shipped sweep lattice (same phase and step).
    sweep = SweepSpec(
        axis=SweepAxis.DS_POWER_DBM, start=-6.0, stop=6.0, step=0.8,
        ds_channels=(13, 34, 60),
    )
    return replace(BASE, sweep=sweep, **overrides)


class TestSweepSpec:
    def test_values_count(self):
        spec = SweepSpec(start=-10.0, stop=9.2, step=0.8)
        values = spec.values()
        assert len(values) == 25
        assert values[0] == -10.0
        assert values[-1] == pytest.approx(9.2, abs=1e-9)

    def test_single_point_grid(self):
        spec = SweepSpec(start=float("-inf"), stop=float("-inf"), step=1.0)
        assert spec.values() == [float("-inf")]

    def test_bad_step(self):
        with pytest.raises(ConfigError, match="step"):
            SweepSpec(start=0.0, stop=1.0, step=0.0)

    def test_reversed_range(self):
        with pytest.raises(ConfigError, match="start"):
            SweepSpec(start=5.0, stop=1.0, step=1.0)


class TestRunSweep:
    def test_row_ordering_and_shape(self):
        result = run_sweep(quick_sweep())
        assert len(result.rows) == 7 * 3
        keys = [(row.axis_value, row.ds_channel) for row in result.rows]
        assert keys == sorted(keys)

    def test_off_sweep_gives_dark_baseline(self):
        scenario = replace(
            BASE,
            sweep=SweepSpec(start=float("-inf"), stop=float("-inf"), step=1.0,
                            ds_channels=(13,)),
        )
        result = run_sweep(scenario)
        assert len(result.rows) == 1
        row = result.rows[0]
        assert row.total_noise_mw == 0.0
        assert row.y0 == pytest.approx(BASE.detector.dark_floor, rel=1e-12)
        assert row.skr_bps > 0.0

    def test_determinism_and_thread_independence(self):
        a = run_sweep(quick_sweep(), threads=1)
        b = run_sweep(quick_sweep(), threads=4)
        assert a.rows == b.rows

    def test_qber_up_skr_down_along_power(self):
        result = run_sweep(quick_sweep())
        by_channel: dict[int, list] = {}
        for row in result.rows:
            by_channel.setdefault(row.ds_channel, []).append(row)
        for rows in by_channel.values():
            qber = [r.e_mu for r in rows]
            skr = [r.skr_bps for r in rows]
            assert all(a <= b + 1e-15 for a, b in zip(qber, qber[1:]))
            assert all(a >= b - 1e-12 for a, b in zip(skr, skr[1:]))

    def test_longer_wavelength_performs_no_worse(self):
        scenario = replace(
            BASE,
            sweep=SweepSpec(axis=SweepAxis.DS_CHANNEL, start=1.0, stop=60.0, step=1.0),
            ds_power_dbm=3.2,
        )
        result = run_sweep(scenario)
        # channel index rises with frequency: SKR must be non-increasing.
        skr = [row.skr_bps for row in result.rows]
        assert all(a >= b - 1e-12 for a, b in zip(skr, skr[1:]))

    def test_us_channel_negligible_on_quick_grid(self):
        base_rows = run_sweep(quick_sweep()).rows
        us_rows = run_sweep(quick_sweep(us_power_dbm=3.2)).rows
        for a, b in zip(base_rows, us_rows):
            if a.skr_bps == 0.0:
                assert b.skr_bps == 0.0
            else:
                assert abs(a.skr_bps - b.skr_bps) / a.skr_bps < 0.05

    def test_feeder_axis(self):
        scenario = replace(
            BASE,
            sweep=SweepSpec(axis=SweepAxis.FEEDER_KM, start=5.0, stop=25.0, step=5.0),
            ds_power_dbm=0.0,
        )
        result = run_sweep(scenario)
        assert len(result.rows) == 5
        skr = [row.skr_bps for row in result.rows]
        assert all(a > b for a, b in zip(skr, skr[1:]))

    def test_us_axis(self):
        scenario = replace(
            BASE,
            sweep=SweepSpec(axis=SweepAxis.US_POWER_DBM, start=-10.0, stop=3.2, step=1.2),
            ds_power_dbm=0.0,
        )
        result = run_sweep(scenario)
        assert all(row.ds_channel == 13 for row in result.rows)
        forward = [row.forward_us_mw for row in result.rows]
        assert all(a < b for a, b in zip(forward, forward[1:]))


class TestFindPowerThreshold:
    def test_calibrated_anchor_channels(self):
        anchors = CalibrationAnchors()
        for channel, target in zip(anchors.anchor_channels, anchors.target_thresholds_dbm):
            threshold = find_power_threshold(BASE, ds_channel=channel)
            assert threshold == pytest.approx(target, abs=0.02)

    def test_bracketing_correctness(self):
        threshold = find_power_threshold(BASE, ds_channel=34)
        assert rate_at(BASE, ds_channel=34, ds_power_dbm=threshold - 0.01).r_bits_per_pulse > 0
        assert rate_at(BASE, ds_channel=34, ds_power_dbm=threshold + 0.01).r_bits_per_pulse == 0

    def test_negligible_coupling_never_cuts_off(self):
        # A vanishing Raman table leaves the link dark-count limited.
        tiny = RamanEfficiencyTable(((191.3, 1e-30),), 1.0)
        assert find_power_threshold(replace(BASE, raman=tiny), ds_channel=13) == float("inf")

    def test_no_rate_anywhere(self):
        blind = replace(BASE, detector=replace(BASE.detector, efficiency=0.0))
        assert find_power_threshold(blind, ds_channel=13) == float("-inf")


class TestCalibration:
    def test_fixed_point_of_shipped_table(self):
        table, report = calibrate(BASE)
        assert table.entries == DEFAULT_RAMAN_ENTRIES
        assert report.hard_ok
        assert report.warnings == ()

    def test_table_monotone_toward_longer_wavelength(self):
        table, _ = calibrate(BASE)
        rhos = [rho for _, rho in table.entries]
        assert all(a <= b for a, b in zip(rhos, rhos[1:]))

    def test_loose_anchors_accept_any_positive_monotone_table(self):
        loose = CalibrationAnchors(
            skr_floor_bits_per_pulse=0.0,
            skr_floor_power_dbm=-100.0,
            min_threshold_dbm=-100.0,
            protected_power_dbm=-100.0,
            soft_fail_below_dbm=50.0,
        )
        arbitrary = RamanEfficiencyTable(((191.3, 1e-13), (196.0, 9e-13)), 1.0)
        report = verify_anchors(BASE, arbitrary, loose)
        assert report.hard_ok

    def test_infeasible_floor_names_binding_constraint(self):
        greedy = CalibrationAnchors(skr_floor_bits_per_pulse=1.0)
        with pytest.raises(CalibrationError, match="binding constraint.*floor"):
            calibrate(BASE, greedy)

    def test_target_must_cover_protected_power(self):
        bad = CalibrationAnchors(
            target_thresholds_dbm=(9.0, 8.6, 8.2, 7.4, 6.6, 5.8, 5.0, 4.2)
        )
        with pytest.raises(CalibrationError, match="protected"):
            calibrate(BASE, bad)


class TestBackscatterDominance:
    def test_equal_powers_across_range_and_channels(self):
        from qpon_sim.topology import noise_at_spd
        from qpon_sim.units import WavelengthPlan

        for ds_ch in (13, 34, 60):
            for us_ch in (5, 34, 60):
                plan = WavelengthPlan.from_itu_channels(ds_channel=ds_ch, us_channel=us_ch)
                for power in (-10.0, -4.0, 0.0, 3.2, 6.0, 9.2):
                    budget = noise_at_spd(BASE.topology, plan, power, power, BASE.raman)
                    assert budget.backscatter_mw > budget.forward_us_mw
