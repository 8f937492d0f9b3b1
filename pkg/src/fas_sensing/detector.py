"""Energy detection: SNR, analytical false-alarm/detection probabilities and a sample-level simulator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .numerics import SeededRng, q_function, q_inverse


class Hypothesis(str, Enum):
    H0 = "H0"
    H1 = "H1"


@dataclass(frozen=True)
class DetectorConfig:
    n_samples: int
    noise_power: float
    max_false_alarm: float

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if not self.noise_power > 0:
            raise ValueError("noise_power must be positive")
        if not 0.0 < self.max_false_alarm < 1.0:
            raise ValueError("max_false_alarm must lie in (0, 1)")

    @classmethod
    def from_scenario(cls, scenario) -> "DetectorConfig":
        return cls(scenario.n_samples, scenario.noise_power, scenario.max_false_alarm)


@dataclass(frozen=True)
class SensingMetrics:
    snr: float
    threshold: float
    false_alarm: float
    detection: float


def snr(w, h, power: float, noise_power: float) -> float:
    """Post-combining SNR ``P |w^H h|^2 / noise``; ``w`` must have unit norm."""
    w = np.asarray(w, dtype=np.complex128)
    h = np.asarray(h, dtype=np.complex128)
    if w.shape != h.shape:
        raise ValueError(f"w {w.shape} and h {h.shape} do not conform")
    if abs(np.linalg.norm(w) - 1.0) > 1e-9:
        raise ValueError(f"beamformer must have unit norm, got {np.linalg.norm(w):.12g}")
    return float(power * abs(np.vdot(w, h)) ** 2 / noise_power)


def optimal_threshold(cfg: DetectorConfig) -> float:
    """Smallest threshold meeting the false-alarm cap with equality."""
    return cfg.noise_power * q_inverse(cfg.max_false_alarm) / math.sqrt(cfg.n_samples) + cfg.noise_power


def false_alarm_prob(tau: float, cfg: DetectorConfig) -> float:
    z = (tau - cfg.noise_power) / cfg.noise_power * math.sqrt(cfg.n_samples)
    return q_function(z)


def detection_prob(tau: float, gamma: float, cfg: DetectorConfig) -> float:
    if gamma < 0:
        raise ValueError(f"SNR must be non-negative, got {gamma}")
    signal_level = cfg.noise_power * (1.0 + gamma)
    z = (tau - signal_level) / signal_level * math.sqrt(cfg.n_samples)
    return q_function(z)


def sensing_metrics(w, h, power: float, cfg: DetectorConfig, tau: float | None = None) -> SensingMetrics:
    if tau is None:
        tau = optimal_threshold(cfg)
    gamma = snr(w, h, power, cfg.noise_power)
    return SensingMetrics(gamma, tau, false_alarm_prob(tau, cfg), detection_prob(tau, gamma, cfg))


def simulate_detector(
    h,
    w,
    tau: float,
    hypothesis: Hypothesis | str,
    cfg: DetectorConfig,
    trials: int,
    rng: SeededRng,
    power: float = 1.0,
    block_size: int = 250,
) -> float:
    """Empirical rate of deciding H1 for the energy detector.

    Each trial draws ``K`` received vectors (noise on every antenna, plus the
    PU symbol through ``sqrt(power) * h`` under H1), combines them with ``w``
    and compares the average energy with ``tau``; ties go to H0.  Trials are
    generated in fixed-size blocks, each from its own child stream, so the
    result does not depend on how blocks are scheduled.
    """
    hypothesis = Hypothesis(hypothesis)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    h = np.asarray(h, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    if abs(np.linalg.norm(w) - 1.0) > 1e-9:
        raise ValueError("beamformer must have unit norm")
    K, N = cfg.n_samples, h.shape[0]
    wc = w.conj()
    detections = 0
    for block, start in enumerate(range(0, trials, block_size)):
        B = min(block_size, trials - start)
        sub = rng.child(block)
        noise = sub.complex_normal((B, K, N), variance=cfg.noise_power)
        y = noise @ wc
        if hypothesis is Hypothesis.H1:
            x = sub.complex_normal((B, K))
            y = y + math.sqrt(power) * np.vdot(w, h) * x
        T = np.mean(np.abs(y) ** 2, axis=1)
        detections += int(np.count_nonzero(T > tau))
    return detections / trials
