"""Planar far-field channel between the primary transmitter and the sensing array.

Positions are 2-D points in meters, stored as arrays of shape ``(2,)`` (one
antenna) or ``(N, 2)`` (the whole array).  Path indices are zero-based.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .numerics import SeededRng

SPEED_OF_LIGHT = 299_792_458.0


class ConfigError(ValueError):
    """Invalid or inconsistent scenario parameters."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class Region:
    """Square region ``[-A/2, A/2]^2`` available to each fluid antenna."""

    half_width: float

    def __post_init__(self):
        if not self.half_width > 0:
            raise ConfigError(f"region half-width must be positive, got {self.half_width}")

    @property
    def size(self) -> float:
        return 2.0 * self.half_width

    def contains(self, p, tol: float = 0.0) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(np.abs(p) <= self.half_width + tol))

    def halfspaces(self) -> list[tuple[np.ndarray, float]]:
        """The box as four halfspaces ``a @ t >= b``."""
        h = self.half_width
        return [
            (np.array([1.0, 0.0]), -h),
            (np.array([-1.0, 0.0]), -h),
            (np.array([0.0, 1.0]), -h),
            (np.array([0.0, -1.0]), -h),
        ]


@dataclass(frozen=True)
class PathAngles:
    """Elevation ``theta`` and azimuth ``phi`` of each receive path, in radians."""

    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        if theta.shape != phi.shape or theta.ndim != 1:
            raise ValueError("theta and phi must be 1-D arrays of equal length")
        if np.any((theta < 0) | (theta > math.pi) | (phi < 0) | (phi > math.pi)):
            raise ValueError("path angles must lie in [0, pi]")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", phi)
        dirs = np.column_stack((np.sin(theta) * np.cos(phi), np.cos(theta)))
        dirs.flags.writeable = False
        object.__setattr__(self, "_directions", dirs)

    def __len__(self) -> int:
        return self.theta.shape[0]

    @property
    def directions(self) -> np.ndarray:
        """``(L, 2)`` array whose row ``l`` maps a position to its path difference."""
        return self._directions


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of path geometry and (diagonal) path gains.

    With a single transmit antenna the transmit response is all ones, so the
    effective path vector ``sigma = Sigma @ 1`` is just the diagonal gains.
    """

    angles: PathAngles
    gains: np.ndarray

    def __post_init__(self):
        gains = np.atleast_1d(np.asarray(self.gains, dtype=np.complex128))
        if gains.shape != (len(self.angles),):
            raise ValueError(f"need {len(self.angles)} path gains, got shape {gains.shape}")
        object.__setattr__(self, "gains", gains)

    @property
    def n_paths(self) -> int:
        return len(self.angles)

    @property
    def sigma(self) -> np.ndarray:
        return self.gains

    @property
    def path_matrix(self) -> np.ndarray:
        return np.diag(self.gains)


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and protocol parameters, all in linear SI units.

    Defaults reproduce the reference setup: 2.4 GHz carrier rounded to a
    0.125 m wavelength, 250 m link, 4 paths, 4 antennas in a 4-wavelength
    square, half-wavelength spacing, 10 dBm transmit power, -80 dBm noise,
    1000 samples and a 0.1 false-alarm cap.
    """

    wavelength: float = 0.125
    distance: float = 250.0
    ref_distance: float = 1.0
    ref_gain: float = 1e-4
    pathloss_exponent: float = 2.8
    n_paths: int = 4
    n_antennas: int = 4
    region_size: float = 0.5
    min_spacing: float = 0.0625
    power: float = 0.01
    noise_power: float = 1e-11
    n_samples: int = 1000
    max_false_alarm: float = 0.1

    def __post_init__(self):
        positive = ("wavelength", "distance", "ref_distance", "ref_gain", "power",
                    "noise_power", "min_spacing", "region_size")
        for name in positive:
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {value!r}")
        if not 0.0 < self.max_false_alarm < 1.0:
            raise ConfigError(f"max_false_alarm must lie in (0, 1), got {self.max_false_alarm}")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ConfigError(f"n_samples must be a positive integer, got {self.n_samples}")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ConfigError(f"n_paths must be a positive integer, got {self.n_paths}")
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise ConfigError(f"n_antennas must be a positive integer, got {self.n_antennas}")
        if self.min_spacing > self.region_size:
            raise ConfigError("min_spacing exceeds the region size; two antennas cannot fit")

    @property
    def region(self) -> Region:
        return Region(self.region_size / 2.0)

    @property
    def path_gain_variance(self) -> float:
        """Per-path gain variance ``g0 (d/d0)^-alpha / L``."""
        loss = self.ref_gain * (self.distance / self.ref_distance) ** (-self.pathloss_exponent)
        return loss / self.n_paths

    def with_updates(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        """Build a config from SI keys, dB/dBm variants or wavelength multiples.

        Recognised aliases: ``fc_GHz``/``fc_Hz`` (wavelength from c/f),
        ``P_dBm``, ``noise_dBm``, ``g0_dB``, ``A_lambda``, ``D_lambda``
        and the short names ``lambda``, ``d``, ``d0``, ``g0``, ``alpha``,
        ``L``, ``N``, ``A``, ``D``, ``P``, ``K``, ``delta``.
        """
        data = dict(data)
        short = {
            "lambda": "wavelength", "d": "distance", "d0": "ref_distance", "g0": "ref_gain",
            "alpha": "pathloss_exponent", "L": "n_paths", "N": "n_antennas", "A": "region_size",
            "D": "min_spacing", "P": "power", "noise": "noise_power", "K": "n_samples",
            "delta": "max_false_alarm",
        }
        out: dict = {}
        for key, value in list(data.items()):
            if key in short:
                out[short[key]] = data.pop(key)
        if "fc_GHz" in data:
            out["wavelength"] = SPEED_OF_LIGHT / (float(data.pop("fc_GHz")) * 1e9)
        if "fc_Hz" in data:
            out["wavelength"] = SPEED_OF_LIGHT / float(data.pop("fc_Hz"))
        if "P_dBm" in data:
            out["power"] = dbm_to_watts(float(data.pop("P_dBm")))
        if "noise_dBm" in data:
            out["noise_power"] = dbm_to_watts(float(data.pop("noise_dBm")))
        if "g0_dB" in data:
            out["ref_gain"] = db_to_linear(float(data.pop("g0_dB")))
        names = {f.name for f in fields(cls)}
        for key in list(data):
            if key in names:
                out[key] = data.pop(key)
        wavelength = float(out.get("wavelength", cls.wavelength))
        if "A_lambda" in data:
            out["region_size"] = float(data.pop("A_lambda")) * wavelength
        if "D_lambda" in data:
            out["min_spacing"] = float(data.pop("D_lambda")) * wavelength
        if data:
            raise ConfigError(f"unknown scenario keys: {sorted(data)}")
        if "wavelength" in out:
            # region and spacing follow the wavelength unless given explicitly
            out.setdefault("region_size", 4.0 * wavelength)
            out.setdefault("min_spacing", wavelength / 2.0)
        for key in ("n_paths", "n_antennas", "n_samples"):
            if key in out:
                value = out[key]
                if isinstance(value, float) and value.is_integer():
                    out[key] = int(value)
        try:
            return cls(**out)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
        return cls.from_dict(data.get("scenario", data))


def path_difference(t, angles: PathAngles, l: int) -> float:
    """Extra propagation distance of path ``l`` at position ``t`` relative to the origin."""
    if not 0 <= l < len(angles):
        raise IndexError(f"path index {l} out of range for {len(angles)} paths")
    x, y = np.asarray(t, dtype=float)
    return float(x * math.sin(angles.theta[l]) * math.cos(angles.phi[l]) + y * math.cos(angles.theta[l]))


def field_response_vector(t, angles: PathAngles, wavelength: float) -> np.ndarray:
    """Unit-modulus phase vector ``exp(j 2 pi rho_l(t) / lambda)`` over the receive paths."""
    if not wavelength > 0:
        raise ValueError("wavelength must be positive")
    rho = angles.directions @ np.asarray(t, dtype=float)
    return np.exp(1j * (2.0 * math.pi / wavelength) * rho)


def field_response_matrix(positions, angles: PathAngles, wavelength: float) -> np.ndarray:
    """``(L, N)`` matrix whose column ``n`` is the response at ``positions[n]``."""
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    rho = angles.directions @ positions.T
    return np.exp(1j * (2.0 * math.pi / wavelength) * rho)


def channel_vector(positions, realization: ChannelRealization, wavelength: float) -> np.ndarray:
    """Per-antenna channel ``F(t)^H sigma``."""
    F = field_response_matrix(positions, realization.angles, wavelength)
    return F.conj().T @ realization.sigma


def sample_channel(config: ScenarioConfig, rng: SeededRng) -> ChannelRealization:
    """Draw angles i.i.d. uniform on ``[0, pi]`` and CSCG path gains."""
    L = config.n_paths
    theta = rng.uniform(0.0, math.pi, L)
    phi = rng.uniform(0.0, math.pi, L)
    gains = rng.complex_normal(L, variance=config.path_gain_variance)
    return ChannelRealization(PathAngles(theta, phi), gains)
