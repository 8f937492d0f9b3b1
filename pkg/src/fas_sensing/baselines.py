"""Comparison schemes: fixed half-wavelength array, random placement, exhaustive selection."""

from __future__ import annotations

import itertools
import math
from enum import Enum

import numpy as np

from .channel import ChannelRealization, ConfigError, ScenarioConfig, channel_vector
from .detector import DetectorConfig, optimal_threshold
from .numerics import SeededRng
from .optimizer import SensingDesign, _beamforming_or_fallback, min_pairwise_distance


class PackingError(RuntimeError):
    """Random placement kept violating the spacing constraint."""


class BaselineKind(str, Enum):
    FPA = "FPA"
    RPA = "RPA"
    EAS = "EAS"


def linear_array(count: int, spacing: float) -> np.ndarray:
    """``count`` points on the x-axis, ``spacing`` apart, centred on the origin."""
    x = (np.arange(1, count + 1) - (count + 1) / 2.0) * spacing
    return np.column_stack((x, np.zeros(count)))


def _design(positions, realization, scenario: ScenarioConfig) -> SensingDesign:
    h = channel_vector(positions, realization, scenario.wavelength)
    tau = optimal_threshold(DetectorConfig.from_scenario(scenario))
    return SensingDesign(positions, _beamforming_or_fallback(h), tau)


def fpa_positions(scenario: ScenarioConfig, count: int | None = None) -> np.ndarray:
    count = scenario.n_antennas if count is None else count
    spacing = scenario.wavelength / 2.0
    positions = linear_array(count, spacing)
    if not all(scenario.region.contains(p, tol=1e-12) for p in positions):
        raise ConfigError(f"{count} antennas at lambda/2 spacing do not fit in a {scenario.region_size} m region")
    if count > 1 and spacing < scenario.min_spacing - 1e-12:
        raise ConfigError("lambda/2 array violates the minimum spacing")
    return positions


def fpa_design(scenario: ScenarioConfig, realization: ChannelRealization) -> SensingDesign:
    return _design(fpa_positions(scenario), realization, scenario)


def rpa_positions(scenario: ScenarioConfig, rng: SeededRng, max_attempts: int = 10_000) -> np.ndarray:
    h = scenario.region.half_width
    N = scenario.n_antennas
    for _ in range(max_attempts):
        positions = rng.uniform(-h, h, (N, 2))
        if min_pairwise_distance(positions) >= scenario.min_spacing:
            return positions
    raise PackingError(f"no feasible placement of {N} antennas after {max_attempts} draws")


def rpa_design(scenario: ScenarioConfig, realization: ChannelRealization, rng: SeededRng) -> SensingDesign:
    return _design(rpa_positions(scenario, rng), realization, scenario)


def eas_candidates(scenario: ScenarioConfig) -> np.ndarray:
    return fpa_positions(scenario, 2 * scenario.n_antennas)


def eas_design(scenario: ScenarioConfig, realization: ChannelRealization) -> SensingDesign:
    """Best ``N`` of the ``2N`` half-wavelength candidate points by channel norm.

    With matched-filter combining the SNR is ``P ||h||^2 / noise`` and
    ``||h||^2`` is a sum of per-antenna terms, so every subset is scored from
    the candidate channel vector.  Ties keep the lexicographically first subset.
    """
    candidates = eas_candidates(scenario)
    per_antenna = np.abs(channel_vector(candidates, realization, scenario.wavelength)) ** 2
    best, best_score = None, -math.inf
    for subset in itertools.combinations(range(len(candidates)), scenario.n_antennas):
        score = float(per_antenna[list(subset)].sum())
        if score > best_score:
            best, best_score = subset, score
    return _design(candidates[list(best)], realization, scenario)
