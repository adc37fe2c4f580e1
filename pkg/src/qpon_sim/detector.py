"""Gated single-photon detector bank shared at the OLT.

Converts optical noise power into per-gate click probabilities and
combines them with dark counts into the per-pulse background yield that
feeds the decoy-state analysis.  Noise photons are unpolarized, so they
spread over all detectors and err half the time; afterpulsing and dead
time are out of scope at these gate rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError
from .topology import NoiseBudget
from .units import photons_per_second, wavelength_to_frequency


@dataclass(frozen=True)
class DetectorModel:
    """Gated InGaAs-style SPD bank (4 detectors for passive BB84)."""

    efficiency: float = 0.20
    dark_count_prob: float = 1e-6
    gate_width_ns: float = 1.0
    pulse_rate_hz: float = 25e6
    num_detectors: int = 4

    def __post_init__(self) -> None:
        if not 0.0 <= self.efficiency <= 1.0:
            raise ConfigError(f"efficiency must be in [0, 1], got {self.efficiency}")
        if not 0.0 <= self.dark_count_prob <= 1.0:
            raise ConfigError(f"dark count probability must be in [0, 1], got {self.dark_count_prob}")
        if self.gate_width_ns <= 0.0:
            raise ConfigError(f"gate width must be > 0 ns, got {self.gate_width_ns}")
        if self.pulse_rate_hz <= 0.0:
            raise ConfigError(f"pulse rate must be > 0 Hz, got {self.pulse_rate_hz}")
        if self.num_detectors < 1:
            raise ConfigError(f"need at least one detector, got {self.num_detectors}")
        if self.gate_width_ns * 1e-9 * self.pulse_rate_hz > 1.0 + 1e-12:
            raise ConfigError("gate width times pulse rate must not exceed 1")

    @property
    def dark_floor(self) -> float:
        """Background yield from dark counts alone (all detectors)."""
        return 1.0 - (1.0 - self.dark_count_prob) ** self.num_detectors


def noise_click_prob(
    budget: NoiseBudget, qkd_wavelength_nm: float, det: DetectorModel
) -> float:
    """Per-gate probability that optical noise triggers any detector."""
    rate = photons_per_second(budget.total_mw, wavelength_to_frequency(qkd_wavelength_nm))
    return -math.expm1(-rate * det.efficiency * det.gate_width_ns * 1e-9)


def background_yield(det: DetectorModel, noise_prob: float) -> float:
    """Per-pulse background yield: dark counts on every detector plus noise.

    Collapses to ``num_detectors * dark + noise`` in the small-probability
    limit and saturates at 1.
    """
    if not 0.0 <= noise_prob <= 1.0:
        raise ConfigError(f"noise click probability must be in [0, 1], got {noise_prob}")
    survive = (1.0 - det.dark_count_prob) ** det.num_detectors * (1.0 - noise_prob)
    return 1.0 - survive
