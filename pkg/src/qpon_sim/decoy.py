"""Asymptotic vacuum + weak decoy-state BB84 key-rate engine.

The channel is the standard Poisson-source model: a pulse of intensity
``m`` produces gain ``Q = Y0 + 1 - exp(-eta * m)`` and error-gain
``E*Q = e0*Y0 + e_mis*(1 - exp(-eta*m))`` with ``eta`` the end-to-end
single-photon detection probability.  From the signal and weak-decoy
observations (plus the vacuum yield Y0) the single-photon yield is
bounded below and its error rate above, and the secret fraction follows
the usual one-way post-processing form with constant error-correction
inefficiency.  All clamps are explicit so serialized results are
portable: Y1 to [0, 1], e1 to [0, 1/2], the rate to >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .detector import DetectorModel
from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class DecoyParams:
    """Protocol-side parameters of the decoy BB84 link."""

    mu: float = 0.5
    nu: float = 0.1
    misalignment_error: float = 0.01
    sift_factor: float = 0.5
    ec_inefficiency: float = 1.16
    background_error: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.nu < self.mu:
            raise ConfigError(f"need 0 < nu < mu, got nu={self.nu}, mu={self.mu}")
        if not 0.0 <= self.misalignment_error < 0.5:
            raise ConfigError(
                f"misalignment error must be in [0, 0.5), got {self.misalignment_error}"
            )
        if not 0.0 < self.sift_factor <= 1.0:
            raise ConfigError(f"sift factor must be in (0, 1], got {self.sift_factor}")
        if self.ec_inefficiency < 1.0:
            raise ConfigError(
                f"error-correction inefficiency must be >= 1, got {self.ec_inefficiency}"
            )
        if not 0.0 <= self.background_error <= 0.5:
            raise ConfigError(
                f"background error must be in [0, 0.5], got {self.background_error}"
            )


@dataclass(frozen=True)
class RatePoint:
    """One operating point: observed gains plus the extracted key rate."""

    q_mu: float
    e_mu: float
    y1_lower: float
    e1_upper: float
    q1_lower: float
    r_bits_per_pulse: float
    skr_bps: float


def binary_entropy(x: float) -> float:
    """Binary Shannon entropy in bits; 0 at both endpoints."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary entropy argument must be in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def gain_and_qber(
    channel_transmittance: float,
    det: DetectorModel,
    y0: float,
    intensity: float,
    params: DecoyParams,
) -> tuple[float, float]:
    """Overall gain and QBER of pulses at the given mean photon number.

    ``channel_transmittance`` covers everything up to the detectors; the
    detector efficiency multiplies in here.  A gain of exactly zero
    (everything off) returns the background error by convention.
    """
    if not 0.0 <= channel_transmittance <= 1.0:
        raise DomainError(
            f"channel transmittance must be in [0, 1], got {channel_transmittance}"
        )
    if not 0.0 <= y0 <= 1.0:
        raise DomainError(f"background yield must be in [0, 1], got {y0}")
    if intensity < 0.0:
        raise DomainError(f"intensity must be >= 0, got {intensity}")
    eta = channel_transmittance * det.efficiency
    signal = -math.expm1(-eta * intensity)
    q = y0 + signal
    if q == 0.0:
        return 0.0, params.background_error
    e = (params.background_error * y0 + params.misalignment_error * signal) / q
    return q, e


def single_photon_bounds(
    q_mu: float,
    e_mu: float,
    q_nu: float,
    e_nu: float,
    y0: float,
    params: DecoyParams,
) -> tuple[float, float]:
    """Vacuum + weak decoy bounds: Y1 from below, e1 from above.

    Returns ``(0, 0.5)`` when the Y1 bound collapses to zero, i.e. the
    observations admit no extractable single-photon signal.
    """
    mu, nu = params.mu, params.nu
    y1_lower = (mu / (mu * nu - nu * nu)) * (
        q_nu * math.exp(nu)
        - q_mu * math.exp(mu) * (nu * nu) / (mu * mu)
        - ((mu * mu - nu * nu) / (mu * mu)) * y0
    )
    y1_lower = min(max(y1_lower, 0.0), 1.0)
    if y1_lower <= 0.0:
        return 0.0, 0.5
    e1_upper = (e_nu * q_nu * math.exp(nu) - params.background_error * y0) / (y1_lower * nu)
    e1_upper = min(max(e1_upper, 0.0), 0.5)
    return y1_lower, e1_upper


def secure_key_rate(
    q_mu: float,
    e_mu: float,
    y1_lower: float,
    e1_upper: float,
    params: DecoyParams,
    pulse_rate_hz: float,
) -> RatePoint:
    """Asymptotic secret fraction per pulse and the resulting bits per second.

    Unprofitable regimes clamp to zero rather than going negative, which
    is where the familiar QBER cutoff emerges.
    """
    q1_lower = y1_lower * params.mu * math.exp(-params.mu)
    r = params.sift_factor * (
        -q_mu * params.ec_inefficiency * binary_entropy(e_mu)
        + q1_lower * (1.0 - binary_entropy(e1_upper))
    )
    r = max(r, 0.0)
    return RatePoint(
        q_mu=q_mu,
        e_mu=e_mu,
        y1_lower=y1_lower,
        e1_upper=e1_upper,
        q1_lower=q1_lower,
        r_bits_per_pulse=r,
        skr_bps=r * pulse_rate_hz,
    )


def evaluate_operating_point(
    channel_transmittance: float,
    det: DetectorModel,
    y0: float,
    params: DecoyParams,
) -> RatePoint:
    """Run the full chain gain -> decoy bounds -> rate at one operating point."""
    q_mu, e_mu = gain_and_qber(channel_transmittance, det, y0, params.mu, params)
    q_nu, e_nu = gain_and_qber(channel_transmittance, det, y0, params.nu, params)
    y1_lower, e1_upper = single_photon_bounds(q_mu, e_mu, q_nu, e_nu, y0, params)
    return secure_key_rate(q_mu, e_mu, y1_lower, e1_upper, params, det.pulse_rate_hz)
