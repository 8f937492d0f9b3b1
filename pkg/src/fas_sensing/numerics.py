"""Scalar special functions, small complex linear algebra and seeded RNG streams."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class DimensionError(ValueError):
    """Operands with non-conforming shapes."""


_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def q_function(z: float) -> float:
    """Upper-tail probability of the standard normal, ``Q(z) = erfc(z / sqrt(2)) / 2``."""
    z = float(z)
    if not math.isfinite(z):
        raise DomainError(f"q_function needs a finite argument, got {z!r}")
    return 0.5 * math.erfc(z / _SQRT2)


def normal_pdf(z: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def q_inverse(p: float, *, tol: float = 1e-12) -> float:
    """Return ``z`` such that ``q_function(z) == p``.

    Bisection brackets the root to a width of 1e-6, then Newton steps on
    ``Q(z) - p`` (derivative ``-pdf(z)``) polish it.
    """
    p = float(p)
    if not (0.0 < p < 1.0):
        raise DomainError(f"q_inverse needs 0 < p < 1, got {p!r}")
    lo, hi = -40.0, 40.0
    while hi - lo > 1e-6:
        mid = 0.5 * (lo + hi)
        if q_function(mid) > p:
            lo = mid
        else:
            hi = mid
    z = 0.5 * (lo + hi)
    for _ in range(50):
        pdf = normal_pdf(z)
        if pdf == 0.0:
            break
        step = (q_function(z) - p) / pdf
        # stay inside the bracket; Newton is only ever a refinement here
        z_new = min(max(z + step, lo), hi)
        if abs(z_new - z) <= tol * max(1.0, abs(z)):
            z = z_new
            break
        z = z_new
    return z


def as_complex_vector(v, length: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise DimensionError(f"expected length {length}, got {arr.shape[0]}")
    return arr


def inner(u, v) -> complex:
    """Conjugate-linear inner product ``u^H v``."""
    u = as_complex_vector(u)
    v = as_complex_vector(v, u.shape[0])
    return complex(np.vdot(u, v))


def hermitian_quadratic_form(v, M, *, rtol: float = 1e-12) -> float:
    """Return the real value ``v^H M v`` for Hermitian ``M``.

    The imaginary residue is checked against ``rtol`` times the magnitude of
    the terms involved and then dropped.
    """
    v = as_complex_vector(v)
    M = np.asarray(M, dtype=np.complex128)
    if M.shape != (v.shape[0], v.shape[0]):
        raise DimensionError(f"matrix {M.shape} does not conform with vector of length {v.shape[0]}")
    value = complex(np.vdot(v, M @ v))
    scale = float(np.abs(M).sum()) * float(np.vdot(v, v).real)
    if abs(value.imag) > rtol * max(scale, np.finfo(float).tiny):
        raise DomainError(f"matrix is not Hermitian: imaginary residue {value.imag:.3e}")
    return value.real


class SeededRng:
    """Reproducible random stream keyed by ``(seed, stream)``.

    ``stream`` may be an int or a tuple of ints; children extend the key so
    that every Monte Carlo trial (and every sub-task in a trial) gets its own
    independent stream regardless of execution order.
    """

    def __init__(self, seed: int, stream: int | Sequence[int] = ()):
        if isinstance(stream, (int, np.integer)):
            stream = (int(stream),)
        self.seed = int(seed)
        self.stream = tuple(int(s) for s in stream)
        seq = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self._gen = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, stream={self.stream})"

    def child(self, *key: int) -> "SeededRng":
        return SeededRng(self.seed, self.stream + tuple(int(k) for k in key))

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def standard_normal(self, size=None):
        return self._gen.standard_normal(size)

    def complex_normal(self, size=None, variance: float = 1.0):
        """Circularly-symmetric complex Gaussian draws with the given variance."""
        shape = () if size is None else (size,) if isinstance(size, (int, np.integer)) else tuple(size)
        pairs = self._gen.standard_normal(shape + (2,))
        z = pairs.view(np.complex128)[..., 0]
        z *= math.sqrt(variance / 2.0)
        return z if shape else complex(z)
