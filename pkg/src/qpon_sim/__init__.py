"""Link-budget and key-rate simulator for quantum/classical coexistence
in a single-feeder PON: O-band decoy-state BB84 upstream against C-band
coherent data, with Raman-noise budgets, an asymptotic key-rate engine,
a Monte Carlo counting oracle, and calibrated sweep scenarios."""

__version__ = "0.1.0"

from .decoy import (
    DecoyParams,
    RatePoint,
    binary_entropy,
    evaluate_operating_point,
    gain_and_qber,
    secure_key_rate,
    single_photon_bounds,
)
from .detector import DetectorModel, background_yield, noise_click_prob
from .errors import CalibrationError, ConfigError, DomainError
from .oracle import OracleConfig, OracleTally, run_oracle
from .raman import (
    FiberSpec,
    RamanEfficiencyTable,
    span_loss_db,
    span_transmittance,
    sprs_backward_mw,
    sprs_forward_mw,
)
from .runner import (
    CalibrationAnchors,
    CalibrationReport,
    Scenario,
    SweepAxis,
    SweepResult,
    SweepRow,
    SweepSpec,
    calibrate,
    find_power_threshold,
    rate_at,
    run_sweep,
    verify_anchors,
)
from .scenario_io import (
    ParsedScenario,
    parse_scenario,
    render_csv,
    scenario_from_csv_metadata,
    serialize_scenario,
)
from .topology import NoiseBudget, PonTopology, noise_at_spd, qkd_path_transmittance
from .units import (
    ChannelRole,
    OpticalChannel,
    WavelengthPlan,
    dbm_to_mw,
    frequency_to_wavelength,
    itu_channel_to_frequency,
    mw_to_dbm,
    photons_per_second,
    wavelength_to_frequency,
)

__all__ = [name for name in dir() if not name.startswith("_")]
