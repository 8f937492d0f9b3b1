"""Alternating optimization of the receive combiner and the fluid-antenna positions.

The combiner has a closed form (matched filter).  Each antenna position is
improved by successive convex approximation: around the current anchor the
channel gain ``|w^H h|^2`` is bounded from below by an isotropic concave
quadratic, whose maximizer over the (linearized) feasible set is the
Euclidean projection of a gradient step onto a small 2-D polygon.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    ChannelRealization,
    PathAngles,
    Region,
    ScenarioConfig,
    channel_vector,
    field_response_matrix,
    field_response_vector,
)
from .detector import DetectorConfig, detection_prob, optimal_threshold


class DegenerateChannelError(ValueError):
    """The channel vector is identically zero."""


class InfeasibleError(RuntimeError):
    """A projection or constraint linearization met an empty feasible set."""


@dataclass
class SensingDesign:
    """Decision variables: antenna positions ``(N, 2)``, unit-norm combiner, threshold."""

    positions: np.ndarray
    w: np.ndarray
    tau: float

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float)).copy()
        self.w = np.asarray(self.w, dtype=np.complex128).copy()

    @property
    def n_antennas(self) -> int:
        return self.positions.shape[0]

    def is_feasible(self, region: Region, min_spacing: float, tol: float = 1e-9) -> bool:
        if not all(region.contains(p) for p in self.positions):
            return False
        if abs(np.linalg.norm(self.w) - 1.0) > 1e-9:
            return False
        return min_pairwise_distance(self.positions) >= min_spacing - tol


@dataclass(frozen=True)
class AOConfig:
    outer_tol: float = 1e-4
    outer_max_iter: int = 100
    inner_tol: float = 1e-6
    inner_max_iter: int = 20

    def __post_init__(self):
        if not (self.outer_tol > 0 and self.inner_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.outer_max_iter < 1 or self.inner_max_iter < 1:
            raise ValueError("iteration caps must be >= 1")


@dataclass
class AOTrace:
    """Per outer iteration history; entry 0 is the initial design with its optimal combiner."""

    pd: list[float] = field(default_factory=list)
    gamma: list[float] = field(default_factory=list)
    positions: list[np.ndarray] = field(default_factory=list)
    gains: list[float] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return max(len(self.pd) - 1, 0)

    def record(self, pd: float, gamma: float, positions: np.ndarray):
        self.pd.append(pd)
        self.gamma.append(gamma)
        self.positions.append(np.array(positions, copy=True))


@dataclass(frozen=True)
class SurrogateParams:
    """Concave minorant of ``|w^H h|^2`` in the position of one antenna.

    ``alpha`` is the gain contributed by the other antennas alone,
    ``anchor_correction`` is ``f(t0)^H Psi f(t0)``, ``upsilon`` the linear
    coefficient vector and ``kappa`` the curvature of the quadratic penalty.
    """

    anchor: np.ndarray
    alpha: float
    psi: np.ndarray
    omega: np.ndarray
    upsilon: np.ndarray
    kappa: float
    anchor_correction: float
    angles: PathAngles
    wavelength: float


def min_pairwise_distance(positions) -> float:
    positions = np.atleast_2d(positions)
    if positions.shape[0] < 2:
        return math.inf
    return min(float(np.linalg.norm(a - b)) for a, b in itertools.combinations(positions, 2))


def channel_gain(positions, realization: ChannelRealization, w, wavelength: float) -> float:
    """``|w^H h|^2`` for the given positions."""
    h = channel_vector(positions, realization, wavelength)
    return abs(np.vdot(w, h)) ** 2


def optimal_beamforming(h) -> np.ndarray:
    """Matched-filter combiner ``h / ||h||``."""
    h = np.asarray(h, dtype=np.complex128)
    norm = np.linalg.norm(h)
    if norm == 0.0:
        raise DegenerateChannelError("cannot normalise a zero channel vector")
    return h / norm


def _beamforming_or_fallback(h) -> np.ndarray:
    try:
        return optimal_beamforming(h)
    except DegenerateChannelError:
        w = np.zeros(len(h), dtype=np.complex128)
        w[0] = 1.0
        return w


def decompose_gain(positions, realization: ChannelRealization, w, n: int, wavelength: float):
    """Split ``|w^H h|^2`` into the parts that do and do not involve antenna ``n``.

    Returns ``(alpha, psi, omega)`` with

        |w^H h|^2 = alpha + f_n^H psi f_n + 2 Re{f_n^H omega}

    where ``f_n`` is the field response at ``positions[n]``, ``psi`` is
    ``|w_n|^2 sigma sigma^H`` and ``omega = conj(w_n) sigma sigma^H sum_{j != n} w_j f_j``.
    """
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    w = np.asarray(w, dtype=np.complex128)
    sigma = realization.sigma
    F = field_response_matrix(positions, realization.angles, wavelength)
    others = np.delete(np.arange(positions.shape[0]), n)
    rest = F[:, others] @ w[others] if others.size else np.zeros(len(sigma), dtype=np.complex128)
    proj = np.vdot(sigma, rest)  # sigma^H rest
    alpha = abs(proj) ** 2
    phi = np.outer(sigma, sigma.conj())
    psi = abs(w[n]) ** 2 * phi
    omega = np.conj(w[n]) * sigma * proj
    return float(alpha), psi, omega


def build_surrogate(positions, realization: ChannelRealization, w, n: int, anchor, wavelength: float) -> SurrogateParams:
    anchor = np.asarray(anchor, dtype=float).copy()
    positions = np.array(positions, dtype=float)
    positions[n] = anchor
    alpha, psi, omega = decompose_gain(positions, realization, w, n, wavelength)
    f0 = field_response_vector(anchor, realization.angles, wavelength)
    psi_f0 = psi @ f0
    upsilon = psi.conj().T @ f0 + omega
    kappa = 16.0 * math.pi**2 / wavelength**2 * float(np.sum(np.abs(upsilon)))
    correction = float(np.vdot(f0, psi_f0).real)
    return SurrogateParams(anchor, alpha, psi, omega, upsilon, kappa, correction, realization.angles, wavelength)


def _phases(t, params: SurrogateParams) -> np.ndarray:
    rho = params.angles.directions @ np.asarray(t, dtype=float)
    return 2.0 * math.pi / params.wavelength * rho - np.angle(params.upsilon)


def beta_bar(t, params: SurrogateParams) -> float:
    """``2 Re{f(t)^H upsilon} = 2 sum_l |upsilon_l| cos(phase_l(t))``."""
    return 2.0 * float(np.sum(np.abs(params.upsilon) * np.cos(_phases(t, params))))


def beta_bar_gradient(t, params: SurrogateParams) -> np.ndarray:
    weights = np.abs(params.upsilon) * np.sin(_phases(t, params))
    return -(4.0 * math.pi / params.wavelength) * (weights @ params.angles.directions)


def surrogate_value(t, params: SurrogateParams) -> float:
    t = np.asarray(t, dtype=float)
    d = t - params.anchor
    g = (
        beta_bar(params.anchor, params)
        + float(beta_bar_gradient(params.anchor, params) @ d)
        - 0.5 * params.kappa * float(d @ d)
    )
    return g + params.alpha - params.anchor_correction


def linearized_spacing_halfspaces(n: int, positions, min_spacing: float) -> list[tuple[np.ndarray, float]]:
    """Inner linearization of ``||t_n - t_v|| >= D`` as halfspaces ``a @ t_n >= b``."""
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    anchor = positions[n]
    out = []
    for v, tv in enumerate(positions):
        if v == n:
            continue
        diff = anchor - tv
        dist = float(np.linalg.norm(diff))
        if dist == 0.0:
            raise InfeasibleError(f"antennas {n} and {v} coincide; cannot linearize spacing")
        a = diff / dist
        out.append((a, min_spacing + float(a @ tv)))
    return out


def project_onto_polyhedron(p, region: Region, halfspaces, tol: float = 1e-12) -> np.ndarray:
    """Euclidean projection of ``p`` onto ``region`` intersected with ``a @ t >= b`` halfspaces.

    Exact in 2-D: the nearest point is ``p`` itself, the projection onto one
    active constraint line, or a vertex where two lines meet, so all such
    candidates are enumerated and the nearest feasible one is returned.
    """
    p = np.asarray(p, dtype=float)
    cons = list(region.halfspaces()) + list(halfspaces)
    A = np.array([np.asarray(a, dtype=float) for a, _ in cons])
    b = np.array([float(bb) for _, bb in cons])
    if np.all(A @ p >= b - tol):
        return p.copy()
    # foot of the perpendicular from p onto every constraint line
    feet = p + ((b - A @ p) / np.einsum("ij,ij->i", A, A))[:, None] * A
    # every pairwise line intersection, by Cramer's rule
    i, j = np.triu_indices(len(cons), k=1)
    det = A[i, 0] * A[j, 1] - A[i, 1] * A[j, 0]
    ok = np.abs(det) > 1e-12
    i, j, det = i[ok], j[ok], det[ok]
    vx = (b[i] * A[j, 1] - A[i, 1] * b[j]) / det
    vy = (A[i, 0] * b[j] - b[i] * A[j, 0]) / det
    candidates = np.vstack((feet, np.column_stack((vx, vy))))
    feasible = np.all(candidates @ A.T >= b - tol, axis=1)
    if not feasible.any():
        raise InfeasibleError("empty feasible set in projection")
    candidates = candidates[feasible]
    best = candidates[np.argmin(np.sum((candidates - p) ** 2, axis=1))]
    # remove tolerance-level box overshoot so the region holds exactly
    return np.clip(best, -region.half_width, region.half_width)


def sca_update_antenna(
    n: int,
    design: SensingDesign,
    realization: ChannelRealization,
    scenario: ScenarioConfig,
    ao: AOConfig = AOConfig(),
    gain_history: list | None = None,
) -> np.ndarray:
    """Improve the position of antenna ``n`` with the combiner and other antennas held fixed.

    Returns the new position; ``design`` is not modified.  Accepted steps
    never decrease the true channel gain.
    """
    wl = scenario.wavelength
    region = scenario.region
    positions = design.positions.copy()
    w = design.w
    gain = channel_gain(positions, realization, w, wl)
    for _ in range(ao.inner_max_iter):
        anchor = positions[n].copy()
        params = build_surrogate(positions, realization, w, n, anchor, wl)
        if params.kappa <= 0.0:
            break
        target = anchor + beta_bar_gradient(anchor, params) / params.kappa
        hs = linearized_spacing_halfspaces(n, positions, scenario.min_spacing)
        candidate = positions.copy()
        candidate[n] = project_onto_polyhedron(target, region, hs)
        new_gain = channel_gain(candidate, realization, w, wl)
        if new_gain < gain - 1e-12 * gain:
            break
        if gain > 0:
            change = (new_gain - gain) / gain
        else:
            change = math.inf if new_gain > 0 else 0.0
        positions, gain = candidate, new_gain
        if gain_history is not None:
            gain_history.append(gain)
        if change < ao.inner_tol:
            break
    return positions[n].copy()


def alternating_optimize(
    realization: ChannelRealization,
    scenario: ScenarioConfig,
    ao: AOConfig,
    init: SensingDesign,
) -> tuple[SensingDesign, AOTrace]:
    """Alternate matched-filter combining with per-antenna SCA until ``P_d`` stalls."""
    det = DetectorConfig.from_scenario(scenario)
    tau = optimal_threshold(det)
    wl = scenario.wavelength
    positions = init.positions.copy()
    trace = AOTrace()

    def evaluate(pos):
        h = channel_vector(pos, realization, wl)
        w = _beamforming_or_fallback(h)
        gain = abs(np.vdot(w, h)) ** 2
        gamma = scenario.power * gain / scenario.noise_power
        return w, gain, gamma, detection_prob(tau, gamma, det)

    w, gain, gamma, pd = evaluate(positions)
    trace.record(pd, gamma, positions)
    trace.gains.append(gain)
    for _ in range(ao.outer_max_iter):
        for n in range(positions.shape[0]):
            current = SensingDesign(positions, w, tau)
            positions[n] = sca_update_antenna(n, current, realization, scenario, ao, trace.gains)
        w, gain, gamma, new_pd = evaluate(positions)
        trace.record(new_pd, gamma, positions)
        trace.gains.append(gain)
        improved = new_pd - pd
        pd = new_pd
        if improved < ao.outer_tol:
            break
    return SensingDesign(positions, w, tau), trace
