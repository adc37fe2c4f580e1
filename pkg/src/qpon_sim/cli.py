"""Command-line entry point.

Subcommands: ``sweep`` (run the scenario's sweep, write CSV),
``threshold`` (print the downstream cutoff power per channel),
``calibrate`` (fit and write a Raman table), ``oracle`` (Monte Carlo
run at the scenario's operating point), ``validate`` (parse only).
Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import __version__
from .decoy import gain_and_qber
from .detector import background_yield, noise_click_prob
from .errors import ConfigError, DomainError
from .oracle import BUCKET_LABELS, OracleConfig, run_oracle
from .runner import (
    CalibrationAnchors,
    Scenario,
    calibrate,
    find_power_threshold,
    qkd_path_transmittance,
    rate_at,
    run_sweep,
)
from .scenario_io import (
    ParsedScenario,
    parse_scenario,
    raman_table_to_yaml,
    render_csv,
)
from .topology import noise_at_spd


class _Parser(argparse.ArgumentParser):
    """argparse that reports bad usage on our config exit code."""

    def error(self, message: str) -> None:  # noqa: D401 - argparse hook
        print(f"error: config: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qpon-sim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"qpon-sim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--scenario", help="scenario file (defaults apply when omitted)")
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--seed", type=int, help="override the scenario seed")
        p.add_argument("--quiet", action="store_true", help="suppress informational output")

    p_sweep = sub.add_parser("sweep", help="run the configured sweep and emit CSV")
    common(p_sweep)

    p_threshold = sub.add_parser("threshold", help="print the DS power cutoff per channel")
    common(p_threshold)
    p_threshold.add_argument("--channel", type=int, help="restrict to one ITU channel")

    p_cal = sub.add_parser("calibrate", help="fit the Raman table to the anchor claims")
    common(p_cal)

    p_oracle = sub.add_parser("oracle", help="Monte Carlo check of the analytic model")
    common(p_oracle)
    p_oracle.add_argument("--pulses", type=int, default=1_000_000, help="pulses to simulate")
    p_oracle.add_argument("--intensity", type=float, help="override the signal intensity")

    p_validate = sub.add_parser("validate", help="parse a scenario and report defaults")
    common(p_validate)
    return parser


def _load(args: argparse.Namespace) -> ParsedScenario:
    if args.scenario is None:
        parsed = parse_scenario("")
    else:
        try:
            with open(args.scenario, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise ConfigError(f"cannot read scenario file: {exc}") from exc
        parsed = parse_scenario(text)
    if args.seed is not None:
        parsed = ParsedScenario(
            scenario=replace(parsed.scenario, seed=args.seed),
            defaulted_keys=parsed.defaulted_keys,
        )
    return parsed


def _emit(args: argparse.Namespace, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _cmd_sweep(args: argparse.Namespace) -> int:
    scenario = _load(args).scenario
    result = run_sweep(scenario)
    _emit(args, render_csv(result))
    if args.out and not args.quiet:
        print(f"wrote {len(result.rows)} rows to {args.out}")
    return 0


def _cmd_threshold(args: argparse.Namespace) -> int:
    scenario = _load(args).scenario
    channels = [args.channel] if args.channel is not None else list(scenario.sweep.ds_channels)
    lines = []
    for channel in channels:
        threshold = find_power_threshold(scenario, ds_channel=channel)
        lines.append(f"channel={channel} threshold_dbm={threshold:.2f}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    scenario = _load(args).scenario
    table, report = calibrate(scenario, CalibrationAnchors())
    _emit(args, raman_table_to_yaml(table))
    if not args.quiet:
        for line in report.lines():
            print(line, file=sys.stderr)
        for channel, threshold in report.achieved_thresholds_dbm:
            print(f"channel={channel} threshold_dbm={threshold:.2f}", file=sys.stderr)
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    scenario = _load(args).scenario
    plan, det = scenario.plan, scenario.detector
    budget = noise_at_spd(
        scenario.topology, plan, scenario.ds_power_dbm, scenario.us_power_dbm, scenario.raman
    )
    p_noise = noise_click_prob(budget, plan.qkd.wavelength_nm, det)
    eta_ch = qkd_path_transmittance(scenario.topology, plan.qkd.wavelength_nm)
    intensity = scenario.decoy.mu if args.intensity is None else args.intensity
    cfg = OracleConfig(
        n_pulses=args.pulses,
        seed=scenario.seed,
        intensity=intensity,
        detection_efficiency=eta_ch * det.efficiency,
        dark_count_prob=det.dark_count_prob,
        num_detectors=det.num_detectors,
        noise_click_prob=p_noise,
        misalignment_error=scenario.decoy.misalignment_error,
    )
    tally = run_oracle(cfg)
    y0 = background_yield(det, p_noise)
    q_model, e_model = gain_and_qber(eta_ch, det, y0, intensity, scenario.decoy)
    lines = [
        f"n_pulses = {tally.n_pulses}",
        f"seed = {cfg.seed}",
        f"intensity = {cfg.intensity:.9g}",
        f"detection_efficiency = {cfg.detection_efficiency:.9g}",
        f"empirical_gain = {tally.gain:.9g}",
        f"empirical_qber = {tally.qber:.9g}",
        f"model_gain = {q_model:.9g}",
        f"model_qber = {e_model:.9g}",
    ]
    for bucket, label in enumerate(BUCKET_LABELS):
        lines.append(
            f"bucket_{label}: sent = {tally.sent[bucket]}, clicks = {tally.clicks[bucket]}, "
            f"errors = {tally.errors[bucket]}, yield = {tally.yield_given_n(bucket):.9g}, "
            f"error_rate = {tally.error_given_n(bucket):.9g}"
        )
    _emit(args, "\n".join(lines) + "\n")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    parsed = _load(args)
    lines = [f"defaulted: {key}" for key in parsed.defaulted_keys]
    lines.append(f"ok: scenario valid ({len(parsed.defaulted_keys)} defaulted keys)")
    if not args.quiet:
        _emit(args, "\n".join(lines) + "\n")
    return 0


_COMMANDS = {
    "sweep": _cmd_sweep,
    "threshold": _cmd_threshold,
    "calibrate": _cmd_calibrate,
    "oracle": _cmd_oracle,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"error: config: {_one_line(exc)}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: runtime: {_one_line(exc)}", file=sys.stderr)
        return 2


def _one_line(exc: Exception) -> str:
    return " ".join(str(exc).split())


if __name__ == "__main__":
    sys.exit(main())
