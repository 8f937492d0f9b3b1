"""Spectrum sensing with a fluid-antenna secondary user.

Jointly optimizes receive combining and antenna positions to maximize the
energy-detection probability under a false-alarm cap, and compares the
result against fixed, random and exhaustively selected antenna layouts.
"""

from .baselines import BaselineKind, eas_design, fpa_design, rpa_design
from .channel import (
    ChannelRealization,
    ConfigError,
    PathAngles,
    Region,
    ScenarioConfig,
    channel_vector,
    field_response_matrix,
    field_response_vector,
    sample_channel,
)
from .detector import (
    DetectorConfig,
    Hypothesis,
    detection_prob,
    false_alarm_prob,
    optimal_threshold,
    simulate_detector,
    snr,
)
from .experiments import ExperimentConfig, convergence_experiment, run_trial, sweep_delta, sweep_power
from .numerics import SeededRng, q_function, q_inverse
from .optimizer import AOConfig, SensingDesign, alternating_optimize, optimal_beamforming

__version__ = "0.1.0"
