"""Fiber attenuation and spontaneous Raman scattering (SpRS) noise.

The noise reaching the quantum receiver is modelled as distributed
scattering: every fiber element converts a fraction ``rho * d_lambda``
of the local pump power per km into broadband noise inside the receiver
bandwidth, and that noise is then attenuated at the quantum wavelength
to whichever fiber end collects it.  Integrating the element
contributions gives the closed forms below; the test suite checks them
against direct numerical quadrature of the same differential model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError, DomainError

#: Wavelength range (nm) over which attenuation curves must be defined.
ATTENUATION_DOMAIN_NM = (1260.0, 1625.0)

#: Default attenuation anchors: standard single-mode fiber at the O- and C-band.
DEFAULT_ATTENUATION_DB_PER_KM: tuple[tuple[float, float], ...] = (
    (1310.0, 0.33),
    (1550.0, 0.20),
)

#: Below this |alpha_pump - alpha_qkd| (1/km) the forward closed form
#: switches to its equal-attenuation limit.
EQUAL_ALPHA_TOL = 1e-9


def _interpolate(points: tuple[tuple[float, float], ...], x: float) -> float:
    """Piecewise-linear interpolation, clamped to the end values."""
    if x <= points[0][0]:
        return points[0][1]
    if x >= points[-1][0]:
        return points[-1][1]
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if x0 <= x <= x1:
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    raise AssertionError("unreachable: points are sorted")


@dataclass(frozen=True)
class FiberSpec:
    """A fiber span: length plus a wavelength-dependent attenuation curve.

    ``attenuation_points`` are (wavelength_nm, dB/km) anchors, sorted by
    wavelength; queries interpolate linearly and clamp beyond the first
    and last anchor, but must stay inside ``ATTENUATION_DOMAIN_NM``.
    """

    length_km: float
    attenuation_points: tuple[tuple[float, float], ...] = DEFAULT_ATTENUATION_DB_PER_KM

    def __post_init__(self) -> None:
        if self.length_km < 0.0 or math.isnan(self.length_km):
            raise ConfigError(f"fiber length must be >= 0 km, got {self.length_km}")
        if not self.attenuation_points:
            raise ConfigError("attenuation curve needs at least one anchor point")
        wavelengths = [w for w, _ in self.attenuation_points]
        if wavelengths != sorted(wavelengths) or len(set(wavelengths)) != len(wavelengths):
            raise ConfigError("attenuation anchors must have strictly increasing wavelengths")
        for wavelength, alpha in self.attenuation_points:
            if alpha < 0.0:
                raise ConfigError(f"attenuation must be >= 0 dB/km, got {alpha} at {wavelength} nm")

    def attenuation_db_per_km(self, wavelength_nm: float) -> float:
        lo, hi = ATTENUATION_DOMAIN_NM
        if not lo <= wavelength_nm <= hi:
            raise DomainError(
                f"wavelength {wavelength_nm} nm outside attenuation domain [{lo}, {hi}] nm"
            )
        return _interpolate(self.attenuation_points, wavelength_nm)


def span_loss_db(fiber: FiberSpec, wavelength_nm: float) -> float:
    """Total span loss in dB at the given wavelength (0 for zero length)."""
    return fiber.attenuation_db_per_km(wavelength_nm) * fiber.length_km


def span_transmittance(fiber: FiberSpec, wavelength_nm: float) -> float:
    """Linear transmittance of the span at the given wavelength."""
    return 10.0 ** (-span_loss_db(fiber, wavelength_nm) / 10.0)


@dataclass(frozen=True)
class RamanEfficiencyTable:
    """SpRS coupling from C-band pumps into the fixed quantum receive band.

    ``entries`` are (pump_frequency_thz, rho) anchors with rho in
    1/(km*nm); queries interpolate linearly in frequency and clamp
    beyond the ends.  Physically the coupling weakens as the pump moves
    away from the quantum channel, so rho must be monotone
    non-decreasing with pump frequency (longer pump wavelength, less
    noise).  ``filter_bandwidth_nm`` is the receiver noise bandwidth
    the efficiencies are integrated over.
    """

    entries: tuple[tuple[float, float], ...]
    filter_bandwidth_nm: float = 1.0

    def __post_init__(self) -> None:
        if not self.entries:
            raise ConfigError("Raman table needs at least one entry")
        frequencies = [f for f, _ in self.entries]
        if frequencies != sorted(frequencies) or len(set(frequencies)) != len(frequencies):
            raise ConfigError("Raman table frequencies must be strictly increasing")
        previous = 0.0
        for frequency, rho in self.entries:
            if rho <= 0.0:
                raise ConfigError(f"Raman efficiency must be > 0, got {rho} at {frequency} THz")
            if rho < previous:
                raise ConfigError(
                    "Raman efficiency must be monotone non-decreasing with pump frequency"
                )
            previous = rho
        if self.filter_bandwidth_nm <= 0.0:
            raise ConfigError(
                f"filter bandwidth must be > 0 nm, got {self.filter_bandwidth_nm}"
            )

    def efficiency(self, pump_frequency_thz: float) -> float:
        """rho in 1/(km*nm) for a pump at the given frequency."""
        if pump_frequency_thz <= 0.0:
            raise DomainError(f"pump frequency must be > 0 THz, got {pump_frequency_thz}")
        return _interpolate(self.entries, pump_frequency_thz)


def sprs_forward_mw(
    p_in_mw: float,
    rho_per_km_nm: float,
    d_lambda_nm: float,
    length_km: float,
    alpha_pump_per_km: float,
    alpha_qkd_per_km: float,
) -> float:
    """Forward (co-propagating) SpRS noise power at the far fiber end, mW.

    Closed form of the distributed model: noise born at position z from
    the attenuated pump, then attenuated over the remaining (L - z) at
    the quantum wavelength.  Attenuations are natural (1/km) units.
    """
    _check_sprs_args(p_in_mw, rho_per_km_nm, d_lambda_nm, length_km,
                     alpha_pump_per_km, alpha_qkd_per_km)
    scale = p_in_mw * rho_per_km_nm * d_lambda_nm
    delta = alpha_pump_per_km - alpha_qkd_per_km
    if abs(delta) < EQUAL_ALPHA_TOL:
        return scale * length_km * math.exp(-alpha_pump_per_km * length_km)
    numerator = math.exp(-alpha_qkd_per_km * length_km) - math.exp(-alpha_pump_per_km * length_km)
    return scale * numerator / delta


def sprs_backward_mw(
    p_in_mw: float,
    rho_per_km_nm: float,
    d_lambda_nm: float,
    length_km: float,
    alpha_pump_per_km: float,
    alpha_qkd_per_km: float,
) -> float:
    """Backward (counter-propagating) SpRS noise power at the launch end, mW.

    Noise born at position z travels back over z at the quantum
    wavelength; the integral saturates for long spans at
    ``p * rho * d_lambda / (alpha_pump + alpha_qkd)``.
    """
    _check_sprs_args(p_in_mw, rho_per_km_nm, d_lambda_nm, length_km,
                     alpha_pump_per_km, alpha_qkd_per_km)
    scale = p_in_mw * rho_per_km_nm * d_lambda_nm
    total = alpha_pump_per_km + alpha_qkd_per_km
    if total < EQUAL_ALPHA_TOL:
        return scale * length_km
    return scale * (1.0 - math.exp(-total * length_km)) / total


def _check_sprs_args(p_in_mw, rho, d_lambda, length, alpha_pump, alpha_qkd) -> None:
    for name, value in (
        ("p_in_mw", p_in_mw),
        ("rho_per_km_nm", rho),
        ("d_lambda_nm", d_lambda),
        ("length_km", length),
        ("alpha_pump_per_km", alpha_pump),
        ("alpha_qkd_per_km", alpha_qkd),
    ):
        if value < 0.0 or math.isnan(value):
            raise DomainError(f"{name} must be >= 0, got {value}")
