"""Seeded Monte Carlo photon-counting oracle.

Independent check for the analytic gain/QBER/decoy formulas: every
pulse draws a Poisson photon number, each photon survives to a click
with the end-to-end detection probability, dark counts and optical
noise add background clicks, and errors are assigned per event.  The
event model (the part a reproduction has to match):

* signal-only click: each detected photon votes wrongly with the
  misalignment probability; the bit is the majority vote, ties break
  on a fair coin;
* background-only click: wrong half the time;
* signal and background in the same gate: a double click, squashed by
  random assignment (wrong half the time).

Pulses are processed in fixed-size blocks, each with its own
counter-based generator substream derived from (seed, block index),
and block tallies are integers, so serial and parallel runs agree
bit-for-bit for any thread count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .parallel import ordered_map, thread_count

#: Pulses simulated per RNG block.
BLOCK_SIZE = 1 << 18

#: Photon-number buckets tallied separately: 0, 1, 2, >= 3.
BUCKET_LABELS = ("0", "1", "2", "3plus")

_MAX_PULSES = 2**63 - 1


@dataclass(frozen=True)
class OracleConfig:
    """One oracle run: source, channel, and detector background in one place."""

    n_pulses: int
    seed: int
    intensity: float
    detection_efficiency: float
    dark_count_prob: float = 0.0
    num_detectors: int = 4
    noise_click_prob: float = 0.0
    misalignment_error: float = 0.0

    def __post_init__(self) -> None:
        if not 1 <= self.n_pulses <= _MAX_PULSES:
            raise ConfigError(
                f"n_pulses must be in [1, 2^63 - 1] to fit 64-bit tallies, got {self.n_pulses}"
            )
        if self.intensity < 0.0:
            raise ConfigError(f"intensity must be >= 0, got {self.intensity}")
        if not 0.0 <= self.detection_efficiency <= 1.0:
            raise ConfigError(
                f"detection efficiency must be in [0, 1], got {self.detection_efficiency}"
            )
        if not 0.0 <= self.dark_count_prob <= 1.0:
            raise ConfigError(f"dark count probability must be in [0, 1]")
        if self.num_detectors < 1:
            raise ConfigError(f"need at least one detector, got {self.num_detectors}")
        if not 0.0 <= self.noise_click_prob <= 1.0:
            raise ConfigError(f"noise click probability must be in [0, 1]")
        if not 0.0 <= self.misalignment_error < 0.5:
            raise ConfigError(f"misalignment error must be in [0, 0.5)")

    @property
    def background_prob(self) -> float:
        """Per-gate probability of any dark or noise click."""
        return 1.0 - (1.0 - self.dark_count_prob) ** self.num_detectors * (
            1.0 - self.noise_click_prob
        )


@dataclass(frozen=True)
class OracleTally:
    """Click and error counts, split by emitted photon number bucket."""

    n_pulses: int
    sent: tuple[int, int, int, int]
    clicks: tuple[int, int, int, int]
    errors: tuple[int, int, int, int]

    def __post_init__(self) -> None:
        if sum(self.sent) != self.n_pulses:
            raise ConfigError("bucket counts must sum to the pulse count")
        for sent, clicks, errors in zip(self.sent, self.clicks, self.errors):
            if not 0 <= errors <= clicks <= sent:
                raise ConfigError("need errors <= clicks <= sent in every bucket")

    @property
    def total_clicks(self) -> int:
        return sum(self.clicks)

    @property
    def total_errors(self) -> int:
        return sum(self.errors)

    @property
    def gain(self) -> float:
        """Empirical Q: clicks per pulse."""
        return self.total_clicks / self.n_pulses

    @property
    def qber(self) -> float:
        """Empirical E: errors per click (0.5 by convention with no clicks)."""
        if self.total_clicks == 0:
            return 0.5
        return self.total_errors / self.total_clicks

    def yield_given_n(self, bucket: int) -> float:
        """Empirical Y_n: click probability given the emitted-photon bucket."""
        if self.sent[bucket] == 0:
            return 0.0
        return self.clicks[bucket] / self.sent[bucket]

    def error_given_n(self, bucket: int) -> float:
        """Empirical e_n: error probability given a click in the bucket."""
        if self.clicks[bucket] == 0:
            return 0.5
        return self.errors[bucket] / self.clicks[bucket]

    def yield_se(self, bucket: int) -> float:
        """Binomial standard error of ``yield_given_n``."""
        n = self.sent[bucket]
        if n == 0:
            return 0.0
        y = self.yield_given_n(bucket)
        return float(np.sqrt(y * (1.0 - y) / n))

    def error_se(self, bucket: int) -> float:
        """Binomial standard error of ``error_given_n``."""
        n = self.clicks[bucket]
        if n == 0:
            return 0.0
        e = self.error_given_n(bucket)
        return float(np.sqrt(e * (1.0 - e) / n))

    @property
    def gain_se(self) -> float:
        q = self.gain
        return float(np.sqrt(q * (1.0 - q) / self.n_pulses))

    @property
    def qber_se(self) -> float:
        if self.total_clicks == 0:
            return 0.0
        e = self.qber
        return float(np.sqrt(e * (1.0 - e) / self.total_clicks))


def _block_generator(seed: int, block_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block_index,))
    return np.random.Generator(np.random.Philox(ss))


def _run_block(cfg: OracleConfig, block_index: int, size: int) -> np.ndarray:
    """Simulate one block; returns a (3, 4) int64 array [sent/clicks/errors]."""
    rng = _block_generator(cfg.seed, block_index)
    # Fixed draw order and fixed-shape draws keep the substream layout stable.
    n_photons = rng.poisson(cfg.intensity, size)
    detected = rng.binomial(n_photons, cfg.detection_efficiency)
    u_background = rng.random(size)
    wrong_votes = rng.binomial(detected, cfg.misalignment_error)
    u_tie = rng.random(size)
    u_assign = rng.random(size)

    signal = detected >= 1
    background = u_background < cfg.background_prob
    click = signal | background

    majority_wrong = (2 * wrong_votes > detected) | (
        (2 * wrong_votes == detected) & signal & (u_tie < 0.5)
    )
    error = np.where(signal & ~background, majority_wrong, u_assign < 0.5) & click

    bucket = np.minimum(n_photons, 3)
    tally = np.empty((3, 4), dtype=np.int64)
    tally[0] = np.bincount(bucket, minlength=4)[:4]
    tally[1] = np.bincount(bucket[click], minlength=4)[:4]
    tally[2] = np.bincount(bucket[error], minlength=4)[:4]
    return tally


def run_oracle(cfg: OracleConfig, threads: int | None = None) -> OracleTally:
    """Simulate the configured pulse train and tally clicks and errors.

    Deterministic: the tally depends only on the config (seed included),
    never on the thread count.
    """
    n_blocks = (cfg.n_pulses + BLOCK_SIZE - 1) // BLOCK_SIZE
    sizes = [
        min(BLOCK_SIZE, cfg.n_pulses - b * BLOCK_SIZE) for b in range(n_blocks)
    ]
    results = ordered_map(
        lambda b: _run_block(cfg, b, sizes[b]),
        range(n_blocks),
        thread_count(threads),
    )
    total = np.sum(results, axis=0)
    return OracleTally(
        n_pulses=cfg.n_pulses,
        sent=tuple(int(x) for x in total[0]),
        clicks=tuple(int(x) for x in total[1]),
        errors=tuple(int(x) for x in total[2]),
    )


def analytic_gain_and_qber(cfg: OracleConfig) -> tuple[float, float]:
    """Exact (Q, E) of the simulated event model, for cross-checks.

    Unlike the decoy-engine formula this accounts for the overlap of
    signal and background clicks, i.e. it is the oracle's own truth.
    """
    p_bg = cfg.background_prob
    p_signal = -np.expm1(-cfg.detection_efficiency * cfg.intensity)
    q = 1.0 - (1.0 - p_bg) * (1.0 - p_signal)
    if q == 0.0:
        return 0.0, 0.5
    # Error sources: signal-only gates at ~ the misalignment rate
    # (multi-photon majority voting is a negligible correction),
    # any gate involving a background click at 1/2.
    signal_only = p_signal * (1.0 - p_bg)
    e = (signal_only * cfg.misalignment_error + p_bg * 0.5) / q
    return float(q), float(e)


def analytic_yield_given_one(cfg: OracleConfig) -> float:
    """Exact Y1 of the simulated model: 1 - (1 - eta) * (1 - background)."""
    return 1.0 - (1.0 - cfg.detection_efficiency) * (1.0 - cfg.background_prob)
