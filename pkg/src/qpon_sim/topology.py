"""PON path model: splitter, mux, fibers, and the noise reaching the SPDs.

Upstream-QKD geometry: the quantum transmitter sits at an ONU, the
shared single-photon detectors at the OLT.  Quantum pulses cross drop
fiber, splitter, feeder, and a CWDM mux at each end.  Classical noise
takes two routes to the detectors:

* downstream backscatter - SpRS generated in the feeder by the
  downstream pump counter-propagates straight into the OLT demux
  (no splitter in its path, which is why it dominates);
* upstream forward scatter - SpRS generated in drop and feeder by the
  upstream pump co-propagates towards the OLT; pump or noise crosses
  the splitter exactly once.

Pumps enter their first span at the raw launch power; the only filtering
applied to noise beyond the receiver bandwidth is one OLT demux pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .raman import (
    FiberSpec,
    RamanEfficiencyTable,
    span_loss_db,
    span_transmittance,
    sprs_backward_mw,
    sprs_forward_mw,
)
from .units import WavelengthPlan, db_per_km_to_natural, db_to_transmittance, dbm_to_mw


@dataclass(frozen=True)
class PonTopology:
    """Feeder + uniform drop + 1:N splitter + CWDM muxes.

    ``active_us_transmitters`` is the number of ONUs transmitting
    upstream in the same slot (1 in a TDMA PON); their launch powers
    add linearly in mW.
    """

    feeder: FiberSpec
    drop: FiberSpec
    split_ratio: int = 32
    splitter_excess_db: float = 1.0
    mux_insertion_db: float = 1.0
    connector_db: float = 0.0
    active_us_transmitters: int = 1

    def __post_init__(self) -> None:
        n = self.split_ratio
        if n < 2 or (n & (n - 1)) != 0:
            raise ConfigError(f"split ratio must be a power of two >= 2, got {n}")
        for name in ("splitter_excess_db", "mux_insertion_db", "connector_db"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"{name} must be >= 0 dB")
        if not 1 <= self.active_us_transmitters <= n:
            raise ConfigError(
                f"active upstream transmitters must be in [1, {n}], "
                f"got {self.active_us_transmitters}"
            )

    @property
    def splitter_loss_db(self) -> float:
        return 10.0 * math.log10(self.split_ratio) + self.splitter_excess_db


@dataclass(frozen=True)
class NoiseBudget:
    """SpRS noise power arriving at the OLT-side SPDs, by origin."""

    backscatter_mw: float
    forward_us_mw: float

    def __post_init__(self) -> None:
        if self.backscatter_mw < 0.0 or self.forward_us_mw < 0.0:
            raise ConfigError("noise budget components must be >= 0 mW")

    @property
    def total_mw(self) -> float:
        return self.backscatter_mw + self.forward_us_mw


def qkd_path_transmittance(topo: PonTopology, qkd_wavelength_nm: float) -> float:
    """End-to-end linear transmittance of the ONU -> OLT quantum path."""
    loss_db = (
        span_loss_db(topo.drop, qkd_wavelength_nm)
        + topo.splitter_loss_db
        + span_loss_db(topo.feeder, qkd_wavelength_nm)
        + 2.0 * topo.mux_insertion_db
        + topo.connector_db
    )
    return db_to_transmittance(loss_db)


def noise_at_spd(
    topo: PonTopology,
    plan: WavelengthPlan,
    ds_power_dbm: float,
    us_power_dbm: float,
    raman: RamanEfficiencyTable,
) -> NoiseBudget:
    """Aggregate SpRS noise power at the SPD input for given launch powers."""
    qkd_nm = plan.qkd.wavelength_nm
    d_lambda = raman.filter_bandwidth_nm
    demux = db_to_transmittance(topo.mux_insertion_db)

    # Downstream backscatter: generated in the feeder, collected at the
    # OLT end where the pump launches, then one demux pass.
    ds_nm = plan.downstream.wavelength_nm
    backscatter = demux * sprs_backward_mw(
        dbm_to_mw(ds_power_dbm),
        raman.efficiency(plan.downstream.frequency_thz),
        d_lambda,
        topo.feeder.length_km,
        db_per_km_to_natural(topo.feeder.attenuation_db_per_km(ds_nm)),
        db_per_km_to_natural(topo.feeder.attenuation_db_per_km(qkd_nm)),
    )

    # Upstream forward scatter: noise born in the drop crosses splitter
    # and feeder; noise born in the feeder comes from the pump already
    # attenuated by drop and splitter.  Either way one splitter pass.
    us_nm = plan.upstream.wavelength_nm
    rho_us = raman.efficiency(plan.upstream.frequency_thz)
    us_mw = topo.active_us_transmitters * dbm_to_mw(us_power_dbm)
    splitter = db_to_transmittance(topo.splitter_loss_db)

    drop_noise = sprs_forward_mw(
        us_mw,
        rho_us,
        d_lambda,
        topo.drop.length_km,
        db_per_km_to_natural(topo.drop.attenuation_db_per_km(us_nm)),
        db_per_km_to_natural(topo.drop.attenuation_db_per_km(qkd_nm)),
    )
    feeder_pump_mw = us_mw * span_transmittance(topo.drop, us_nm) * splitter
    feeder_noise = sprs_forward_mw(
        feeder_pump_mw,
        rho_us,
        d_lambda,
        topo.feeder.length_km,
        db_per_km_to_natural(topo.feeder.attenuation_db_per_km(us_nm)),
        db_per_km_to_natural(topo.feeder.attenuation_db_per_km(qkd_nm)),
    )
    forward = demux * (
        drop_noise * splitter * span_transmittance(topo.feeder, qkd_nm) + feeder_noise
    )

    return NoiseBudget(backscatter_mw=backscatter, forward_us_mw=forward)
