"""Shared instance generators and brute-force oracles for the test suite."""

import math

import numpy as np

from fas_sensing.channel import ChannelRealization, PathAngles, Region, channel_vector
from fas_sensing.optimizer import build_surrogate

WAVELENGTH = 0.125
REGION = Region(0.25)


def random_realization(rng: np.random.Generator, L: int = 4, scale: float = 1.0) -> ChannelRealization:
    angles = PathAngles(rng.uniform(0, math.pi, L), rng.uniform(0, math.pi, L))
    gains = scale * (rng.normal(size=L) + 1j * rng.normal(size=L)) / math.sqrt(2)
    return ChannelRealization(angles, gains)


def random_feasible_positions(rng: np.random.Generator, N: int, spacing: float = WAVELENGTH / 2) -> np.ndarray:
    while True:
        pos = rng.uniform(-0.25, 0.25, (N, 2))
        dists = [np.linalg.norm(a - b) for i, a in enumerate(pos) for b in pos[i + 1:]]
        if not dists or min(dists) >= spacing:
            return pos


def random_unit(rng: np.random.Generator, N: int) -> np.ndarray:
    w = rng.normal(size=N) + 1j * rng.normal(size=N)
    return w / np.linalg.norm(w)


def random_surrogate(rng: np.random.Generator, N: int = 4, L: int = 4, scale: float = 1.0):
    """A surrogate around a random feasible layout; returns (params, positions, realization, w, n)."""
    realization = random_realization(rng, L, scale)
    positions = random_feasible_positions(rng, N)
    w = random_unit(rng, N)
    n = int(rng.integers(N))
    params = build_surrogate(positions, realization, w, n, positions[n], WAVELENGTH)
    return params, positions, realization, w, n


def true_gain_at(t, positions, realization, w, n) -> float:
    """Direct ``|w^H h|^2`` with antenna ``n`` moved to ``t`` (no decomposition)."""
    pos = np.array(positions, dtype=float)
    pos[n] = t
    h = channel_vector(pos, realization, WAVELENGTH)
    return float(abs(np.sum(np.conj(w) * h)) ** 2)


def gains_at(points, positions, realization, w, n) -> np.ndarray:
    """Gain at each of ``points`` (G, 2) with antenna ``n`` moved there."""
    points = np.asarray(points, dtype=float)
    dirs = realization.angles.directions
    F = np.exp(1j * 2 * math.pi / WAVELENGTH * (points @ dirs.T))  # (G, L)
    others = [j for j in range(len(positions)) if j != n]
    pos = np.asarray(positions)
    Fo = np.exp(1j * 2 * math.pi / WAVELENGTH * (pos[others] @ dirs.T))  # (N-1, L)
    sigma = realization.sigma
    rest = np.sum(w[others, None] * Fo, axis=0) if others else np.zeros_like(sigma)
    total = rest[None, :] + w[n] * F  # sum_j w_j f_j with f_n at each point
    return np.abs(total @ sigma.conj()) ** 2


def gain_grid(positions, realization, w, n, points: int = 201):
    """Gain over a uniform grid covering the region, with antenna ``n`` swept."""
    xs = np.linspace(-0.25, 0.25, points)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    grid = np.column_stack((X.ravel(), Y.ravel()))
    return grid, gains_at(grid, positions, realization, w, n)


def grid_projection(p, halfspaces, points: int = 2001):
    """Nearest grid point of the region satisfying every halfspace."""
    xs = np.linspace(-0.25, 0.25, points)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    grid = np.column_stack((X.ravel(), Y.ravel()))
    ok = np.ones(len(grid), dtype=bool)
    for a, b in halfspaces:
        ok &= grid @ np.asarray(a) >= b
    feasible = grid[ok]
    d2 = np.sum((feasible - p) ** 2, axis=1)
    return feasible[np.argmin(d2)], xs[1] - xs[0]
