"""Scenario files and result serialization.

A scenario is a single YAML document with one block per subsystem;
physical quantities carry their unit in the key name, so values are
bare numbers.  Unknown keys are rejected, missing keys fall back to the
documented defaults and are reported, and a parsed scenario serializes
back to an equivalent document.

Results go out as CSV with a '#'-prefixed preamble that embeds the full
scenario, so any run can be reproduced from its output file alone.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import yaml

from .decoy import DecoyParams
from .detector import DetectorModel
from .errors import ConfigError
from .raman import DEFAULT_ATTENUATION_DB_PER_KM, FiberSpec, RamanEfficiencyTable
from .runner import (
    DEFAULT_DS_CHANNELS,
    DEFAULT_RAMAN_ENTRIES,
    Scenario,
    SweepAxis,
    SweepResult,
    SweepSpec,
)
from .topology import PonTopology
from .units import WavelengthPlan

_BLOCKS = ("topology", "wavelength_plan", "detector", "decoy", "raman", "sweep", "powers")

CSV_PREAMBLE_MARKER = "# scenario:"


@dataclass(frozen=True)
class ParsedScenario:
    scenario: Scenario
    defaulted_keys: tuple[str, ...]


class _BlockReader:
    """Typed key access with path-qualified errors and default tracking."""

    def __init__(self, name: str, raw: dict, defaulted: list[str]):
        if not isinstance(raw, dict):
            raise ConfigError(f"{name}: block must be a mapping, got {type(raw).__name__}")
        self.name = name
        self.raw = dict(raw)
        self.defaulted = defaulted

    def _take(self, key: str, default):
        if key not in self.raw:
            self.defaulted.append(f"{self.name}.{key}")
            return default
        return self.raw.pop(key)

    def number(self, key: str, default: float, minimum: float | None = None,
               maximum: float | None = None, allow_neg_inf: bool = False) -> float:
        value = self._take(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{self.name}.{key}: expected a number, got {value!r}")
        value = float(value)
        if math.isnan(value):
            raise ConfigError(f"{self.name}.{key}: must not be NaN")
        if value == float("-inf") and allow_neg_inf:
            return value
        if not math.isfinite(value):
            raise ConfigError(f"{self.name}.{key}: must be finite, got {value}")
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self.name}.{key}: must be >= {minimum}, got {value}")
        if maximum is not None and value > maximum:
            raise ConfigError(f"{self.name}.{key}: must be <= {maximum}, got {value}")
        return value

    def integer(self, key: str, default: int, minimum: int | None = None) -> int:
        value = self._take(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{self.name}.{key}: expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self.name}.{key}: must be >= {minimum}, got {value}")
        return value

    def boolean(self, key: str, default: bool) -> bool:
        value = self._take(key, default)
        if not isinstance(value, bool):
            raise ConfigError(f"{self.name}.{key}: expected true/false, got {value!r}")
        return value

    def string(self, key: str, default: str, choices: tuple[str, ...] | None = None) -> str:
        value = self._take(key, default)
        if not isinstance(value, str):
            raise ConfigError(f"{self.name}.{key}: expected a string, got {value!r}")
        if choices is not None and value not in choices:
            raise ConfigError(
                f"{self.name}.{key}: must be one of {', '.join(choices)}, got {value!r}"
            )
        return value

    def pair_list(self, key: str, default: tuple[tuple[float, float], ...]
                  ) -> tuple[tuple[float, float], ...]:
        value = self._take(key, None)
        if value is None:
            return default
        if not isinstance(value, list) or not all(
            isinstance(item, list) and len(item) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in item)
            for item in value
        ):
            raise ConfigError(f"{self.name}.{key}: expected a list of [number, number] pairs")
        return tuple((float(a), float(b)) for a, b in value)

    def int_list(self, key: str, default: tuple[int, ...]) -> tuple[int, ...]:
        value = self._take(key, None)
        if value is None:
            return default
        if not isinstance(value, list) or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in value
        ):
            raise ConfigError(f"{self.name}.{key}: expected a list of integers")
        return tuple(value)

    def finish(self) -> None:
        if self.raw:
            unknown = ", ".join(sorted(self.raw))
            raise ConfigError(f"{self.name}: unknown key(s): {unknown}")


def parse_scenario(text: str) -> ParsedScenario:
    """Parse a scenario document, applying and recording defaults."""
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"scenario is not valid YAML: {exc}") from exc
    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise ConfigError(f"scenario must be a mapping, got {type(document).__name__}")

    document = dict(document)
    defaulted: list[str] = []
    unknown = sorted(set(document) - set(_BLOCKS) - {"seed"})
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")

    def block(name: str) -> _BlockReader:
        raw = document.get(name)
        if raw is None:
            raw = {}
        return _BlockReader(name, raw, defaulted)

    topo_block = block("topology")
    attenuation = topo_block.pair_list("attenuation_db_per_km", DEFAULT_ATTENUATION_DB_PER_KM)
    topology = PonTopology(
        feeder=FiberSpec(
            topo_block.number("feeder_length_km", 20.0, minimum=0.0), attenuation
        ),
        drop=FiberSpec(topo_block.number("drop_length_km", 0.0, minimum=0.0), attenuation),
        split_ratio=topo_block.integer("split_ratio", 32, minimum=2),
        splitter_excess_db=topo_block.number("splitter_excess_db", 1.0, minimum=0.0),
        mux_insertion_db=topo_block.number("mux_insertion_db", 1.0, minimum=0.0),
        connector_db=topo_block.number("connector_db", 0.0, minimum=0.0),
        active_us_transmitters=topo_block.integer("active_us_transmitters", 1, minimum=1),
    )
    topo_block.finish()

    plan_block = block("wavelength_plan")
    plan = WavelengthPlan.from_itu_channels(
        ds_channel=plan_block.integer("ds_channel", 13),
        us_channel=plan_block.integer("us_channel", 5),
        qkd_wavelength_nm=plan_block.number("qkd_wavelength_nm", 1310.0, minimum=1.0),
        require_c_band=plan_block.boolean("require_c_band", True),
    )
    plan_block.finish()

    det_block = block("detector")
    detector = DetectorModel(
        efficiency=det_block.number("efficiency", 0.20, minimum=0.0, maximum=1.0),
        dark_count_prob=det_block.number("dark_count_prob", 1e-6, minimum=0.0, maximum=1.0),
        gate_width_ns=det_block.number("gate_width_ns", 1.0),
        pulse_rate_hz=det_block.number("pulse_rate_hz", 25e6),
        num_detectors=det_block.integer("num_detectors", 4, minimum=1),
    )
    det_block.finish()

    decoy_block = block("decoy")
    decoy = DecoyParams(
        mu=decoy_block.number("mu", 0.5, minimum=0.0),
        nu=decoy_block.number("nu", 0.1, minimum=0.0),
        misalignment_error=decoy_block.number("misalignment_error", 0.01, minimum=0.0),
        sift_factor=decoy_block.number("sift_factor", 0.5),
        ec_inefficiency=decoy_block.number("ec_inefficiency", 1.16),
        background_error=decoy_block.number("background_error", 0.5, minimum=0.0, maximum=0.5),
    )
    decoy_block.finish()

    raman_block = block("raman")
    raman = RamanEfficiencyTable(
        entries=raman_block.pair_list("efficiency_table", DEFAULT_RAMAN_ENTRIES),
        filter_bandwidth_nm=raman_block.number("filter_bandwidth_nm", 1.0),
    )
    raman_block.finish()

    sweep_block = block("sweep")
    axis = SweepAxis(
        sweep_block.string(
            "axis", SweepAxis.DS_POWER_DBM.value, tuple(a.value for a in SweepAxis)
        )
    )
    sweep = SweepSpec(
        axis=axis,
        start=sweep_block.number("start", -10.0, allow_neg_inf=True),
        stop=sweep_block.number("stop", 9.2, allow_neg_inf=True),
        step=sweep_block.number("step", 0.8),
        ds_channels=sweep_block.int_list("ds_channels", DEFAULT_DS_CHANNELS),
    )
    sweep_block.finish()

    powers_block = block("powers")
    ds_power = powers_block.number("ds_power_dbm", 0.0, allow_neg_inf=True)
    us_power = powers_block.number("us_power_dbm", float("-inf"), allow_neg_inf=True)
    powers_block.finish()

    seed = document.get("seed", None)
    if seed is None:
        defaulted.append("seed")
        seed = 0
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"seed: expected an integer, got {seed!r}")
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed: must fit in 64 bits, got {seed}")

    scenario = Scenario(
        topology=topology,
        plan=plan,
        detector=detector,
        decoy=decoy,
        raman=raman,
        sweep=sweep,
        ds_power_dbm=ds_power,
        us_power_dbm=us_power,
        seed=seed,
    )
    return ParsedScenario(scenario=scenario, defaulted_keys=tuple(defaulted))


def scenario_to_dict(scenario: Scenario) -> dict:
    """Plain-type tree mirroring the file format (YAML/JSON friendly)."""
    return {
        "topology": {
            "feeder_length_km": scenario.topology.feeder.length_km,
            "drop_length_km": scenario.topology.drop.length_km,
            "split_ratio": scenario.topology.split_ratio,
            "splitter_excess_db": scenario.topology.splitter_excess_db,
            "mux_insertion_db": scenario.topology.mux_insertion_db,
            "connector_db": scenario.topology.connector_db,
            "active_us_transmitters": scenario.topology.active_us_transmitters,
            "attenuation_db_per_km": [list(p) for p in scenario.topology.feeder.attenuation_points],
        },
        "wavelength_plan": {
            "ds_channel": scenario.plan.downstream.itu_channel,
            "us_channel": scenario.plan.upstream.itu_channel,
            "qkd_wavelength_nm": scenario.plan.qkd.wavelength_nm,
            "require_c_band": scenario.plan.require_c_band,
        },
        "detector": {
            "efficiency": scenario.detector.efficiency,
            "dark_count_prob": scenario.detector.dark_count_prob,
            "gate_width_ns": scenario.detector.gate_width_ns,
            "pulse_rate_hz": scenario.detector.pulse_rate_hz,
            "num_detectors": scenario.detector.num_detectors,
        },
        "decoy": {
            "mu": scenario.decoy.mu,
            "nu": scenario.decoy.nu,
            "misalignment_error": scenario.decoy.misalignment_error,
            "sift_factor": scenario.decoy.sift_factor,
            "ec_inefficiency": scenario.decoy.ec_inefficiency,
            "background_error": scenario.decoy.background_error,
        },
        "raman": {
            "filter_bandwidth_nm": scenario.raman.filter_bandwidth_nm,
            "efficiency_table": [list(p) for p in scenario.raman.entries],
        },
        "sweep": {
            "axis": scenario.sweep.axis.value,
            "start": scenario.sweep.start,
            "stop": scenario.sweep.stop,
            "step": scenario.sweep.step,
            "ds_channels": list(scenario.sweep.ds_channels),
        },
        "powers": {
            "ds_power_dbm": scenario.ds_power_dbm,
            "us_power_dbm": scenario.us_power_dbm,
        },
        "seed": scenario.seed,
    }


def serialize_scenario(scenario: Scenario) -> str:
    """Render a scenario as a YAML document that parses back equal."""
    return yaml.safe_dump(scenario_to_dict(scenario), sort_keys=False)


def raman_table_to_yaml(table: RamanEfficiencyTable) -> str:
    """Render a Raman table as the scenario file's ``raman`` block."""
    return yaml.safe_dump(
        {
            "raman": {
                "filter_bandwidth_nm": table.filter_bandwidth_nm,
                "efficiency_table": [list(p) for p in table.entries],
            }
        },
        sort_keys=False,
    )


def _format(value: float) -> str:
    return f"{value:.9g}"


CSV_COLUMNS = (
    "ds_channel",
    "backscatter_mw",
    "forward_us_mw",
    "total_noise_mw",
    "y0",
    "q_mu",
    "e_mu",
    "r_bits_per_pulse",
    "skr_bps",
)


def render_csv(result: SweepResult) -> str:
    """CSV text: '#' metadata preamble, header, one row per grid point."""
    scenario: Scenario = result.metadata["scenario"]
    out = io.StringIO()
    out.write(f"# qpon-sim {result.metadata['version']}\n")
    out.write(f"# seed = {result.metadata['seed']}\n")
    out.write(CSV_PREAMBLE_MARKER + "\n")
    for line in serialize_scenario(scenario).splitlines():
        out.write(f"# {line}\n")
    axis_column = scenario.sweep.axis.value
    out.write(",".join((axis_column,) + CSV_COLUMNS) + "\n")
    for row in result.rows:
        values = (
            _format(row.axis_value),
            str(row.ds_channel),
            _format(row.backscatter_mw),
            _format(row.forward_us_mw),
            _format(row.total_noise_mw),
            _format(row.y0),
            _format(row.q_mu),
            _format(row.e_mu),
            _format(row.r_bits_per_pulse),
            _format(row.skr_bps),
        )
        out.write(",".join(values) + "\n")
    return out.getvalue()


def scenario_from_csv_metadata(csv_text: str) -> ParsedScenario:
    """Recover the scenario embedded in a result file's preamble."""
    lines = csv_text.splitlines()
    try:
        start = lines.index(CSV_PREAMBLE_MARKER) + 1
    except ValueError as exc:
        raise ConfigError("result file carries no scenario preamble") from exc
    collected: list[str] = []
    for line in lines[start:]:
        if not line.startswith("#"):
            break
        collected.append(line[2:] if line.startswith("# ") else line[1:])
    return parse_scenario("\n".join(collected))
