"""Unit conversions, physical constants, and ITU 100-GHz grid helpers.

Every other module consumes these, so they are kept total (no hidden
state, no rounding shortcuts) and pinned to exact CODATA constants.
Powers use a ``-inf`` dBm sentinel for "off" so sweep grids stay
rectangular: ``dbm_to_mw(-inf) == 0.0`` and ``mw_to_dbm(0.0) == -inf``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError, DomainError

#: Speed of light in nm*THz (exact; equals 299792458 m/s).
SPEED_OF_LIGHT_NM_THZ = 299_792.458

#: Planck constant in J*s (exact).
PLANCK_J_S = 6.626_070_15e-34

#: ITU 100-GHz grid: channel n sits at GRID_BASE + n * GRID_SPACING.
GRID_BASE_THZ = 190.0
GRID_SPACING_THZ = 0.1
GRID_MIN_CHANNEL = 1
GRID_MAX_CHANNEL = 60

#: Band occupied by the classical data channels (THz).
C_BAND_MIN_THZ = 190.0
C_BAND_MAX_THZ = 196.0

#: Fixed O-band quantum channel wavelength (nm).
QKD_WAVELENGTH_NM = 1310.0


def dbm_to_mw(power_dbm: float) -> float:
    """Convert dBm to mW. The ``-inf`` sentinel maps to exactly 0 mW."""
    return 10.0 ** (power_dbm / 10.0)


def mw_to_dbm(power_mw: float) -> float:
    """Convert mW to dBm. 0 mW maps to the ``-inf`` sentinel."""
    if power_mw < 0.0 or math.isnan(power_mw):
        raise DomainError(f"power must be >= 0 mW, got {power_mw}")
    if power_mw == 0.0:
        return float("-inf")
    return 10.0 * math.log10(power_mw)


def db_to_transmittance(loss_db: float) -> float:
    """Convert a loss in dB (>= 0) to a linear transmittance in (0, 1]."""
    if loss_db < 0.0 or math.isnan(loss_db):
        raise DomainError(f"loss must be >= 0 dB, got {loss_db}")
    return 10.0 ** (-loss_db / 10.0)


def db_per_km_to_natural(alpha_db_per_km: float) -> float:
    """Convert an attenuation coefficient from dB/km to 1/km."""
    return alpha_db_per_km * math.log(10.0) / 10.0


def itu_channel_to_frequency(
    channel: int,
    min_channel: int = GRID_MIN_CHANNEL,
    max_channel: int = GRID_MAX_CHANNEL,
) -> float:
    """Map an ITU 100-GHz grid channel index to its frequency in THz."""
    if not min_channel <= channel <= max_channel:
        raise DomainError(
            f"ITU channel {channel} outside grid bounds [{min_channel}, {max_channel}]"
        )
    return GRID_BASE_THZ + GRID_SPACING_THZ * channel


def frequency_to_itu_channel(frequency_thz: float) -> int:
    """Inverse of :func:`itu_channel_to_frequency` for on-grid frequencies."""
    n = round((frequency_thz - GRID_BASE_THZ) / GRID_SPACING_THZ)
    if not math.isclose(GRID_BASE_THZ + GRID_SPACING_THZ * n, frequency_thz, rel_tol=0, abs_tol=1e-6):
        raise DomainError(f"{frequency_thz} THz is not on the 100-GHz grid")
    return n


def frequency_to_wavelength(frequency_thz: float) -> float:
    """Convert frequency in THz to vacuum wavelength in nm."""
    if frequency_thz <= 0.0 or math.isnan(frequency_thz):
        raise DomainError(f"frequency must be > 0 THz, got {frequency_thz}")
    return SPEED_OF_LIGHT_NM_THZ / frequency_thz


def wavelength_to_frequency(wavelength_nm: float) -> float:
    """Convert vacuum wavelength in nm to frequency in THz."""
    if wavelength_nm <= 0.0 or math.isnan(wavelength_nm):
        raise DomainError(f"wavelength must be > 0 nm, got {wavelength_nm}")
    return SPEED_OF_LIGHT_NM_THZ / wavelength_nm


def photons_per_second(power_mw: float, frequency_thz: float) -> float:
    """Photon flux (1/s) carried by ``power_mw`` at ``frequency_thz``.

    Linear in power and inversely proportional to frequency.
    """
    if power_mw < 0.0:
        raise DomainError(f"power must be >= 0 mW, got {power_mw}")
    if frequency_thz <= 0.0:
        raise DomainError(f"frequency must be > 0 THz, got {frequency_thz}")
    return power_mw * 1e-3 / (PLANCK_J_S * frequency_thz * 1e12)


class ChannelRole(Enum):
    DOWNSTREAM = "downstream"
    UPSTREAM = "upstream"
    QKD = "qkd"


@dataclass(frozen=True)
class OpticalChannel:
    """A single carrier: frequency plus the role it plays in the PON."""

    frequency_thz: float
    role: ChannelRole

    def __post_init__(self) -> None:
        if self.frequency_thz <= 0.0:
            raise ConfigError(f"channel frequency must be > 0 THz, got {self.frequency_thz}")

    @property
    def wavelength_nm(self) -> float:
        return frequency_to_wavelength(self.frequency_thz)

    @classmethod
    def from_itu_channel(cls, channel: int, role: ChannelRole) -> "OpticalChannel":
        return cls(itu_channel_to_frequency(channel), role)

    @property
    def itu_channel(self) -> int:
        return frequency_to_itu_channel(self.frequency_thz)


@dataclass(frozen=True)
class WavelengthPlan:
    """The three carriers of the coexistence scheme.

    Classical channels must sit in [C_BAND_MIN, C_BAND_MAX] THz unless
    ``require_c_band`` is disabled by the scenario.
    """

    downstream: OpticalChannel
    upstream: OpticalChannel
    qkd: OpticalChannel
    require_c_band: bool = True

    def __post_init__(self) -> None:
        expected = (
            (self.downstream, ChannelRole.DOWNSTREAM),
            (self.upstream, ChannelRole.UPSTREAM),
            (self.qkd, ChannelRole.QKD),
        )
        for channel, role in expected:
            if channel.role is not role:
                raise ConfigError(f"channel {channel} does not carry role {role.value}")
        if self.require_c_band:
            for channel in (self.downstream, self.upstream):
                if not C_BAND_MIN_THZ <= channel.frequency_thz <= C_BAND_MAX_THZ:
                    raise ConfigError(
                        f"{channel.role.value} channel at {channel.frequency_thz} THz "
                        f"outside [{C_BAND_MIN_THZ}, {C_BAND_MAX_THZ}] THz"
                    )

    @classmethod
    def from_itu_channels(
        cls,
        ds_channel: int,
        us_channel: int,
        qkd_wavelength_nm: float = QKD_WAVELENGTH_NM,
        require_c_band: bool = True,
    ) -> "WavelengthPlan":
        return cls(
            downstream=OpticalChannel.from_itu_channel(ds_channel, ChannelRole.DOWNSTREAM),
            upstream=OpticalChannel.from_itu_channel(us_channel, ChannelRole.UPSTREAM),
            qkd=OpticalChannel(wavelength_to_frequency(qkd_wavelength_nm), ChannelRole.QKD),
            require_c_band=require_c_band,
        )

    @classmethod
    def from_channel_list(
        cls, channels: tuple[OpticalChannel, ...], require_c_band: bool = True
    ) -> "WavelengthPlan":
        """Build a plan from an unordered channel list; every role must appear once."""
        by_role: dict[ChannelRole, OpticalChannel] = {}
        for channel in channels:
            if channel.role in by_role:
                raise ConfigError(f"duplicate {channel.role.value} channel in plan")
            by_role[channel.role] = channel
        for role in ChannelRole:
            if role not in by_role:
                raise ConfigError(f"wavelength plan is missing the {role.value} channel")
        return cls(
            downstream=by_role[ChannelRole.DOWNSTREAM],
            upstream=by_role[ChannelRole.UPSTREAM],
            qkd=by_role[ChannelRole.QKD],
            require_c_band=require_c_band,
        )
