"""Seeded random stream used for every randomized instance.

The generator is SplitMix64 (Steele, Lea & Flood 2014): a 64-bit counter
advanced by the golden-ratio increment and passed through a fixed mixing
function. Uniform doubles take the top 53 bits; normals use Box-Muller with
both outputs consumed in order. Being a tiny documented algorithm, the
stream can be reproduced exactly by any implementation.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int = 0):
        self.state = int(seed) & _MASK
        self._spare: float | None = None

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        """Uniform double in [low, high)."""
        u = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return low + (high - low) * u

    def normal(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = 1.0 - self.uniform()  # (0, 1], keeps log finite
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2 * math.pi * u2)
        return r * math.cos(2 * math.pi * u2)

    def integers(self, low: int, high: int) -> int:
        """Integer in [low, high)."""
        return low + int(self.uniform() * (high - low))

    def complex_normal(self, shape) -> np.ndarray:
        n = int(np.prod(shape))
        vals = [complex(self.normal(), self.normal()) for _ in range(n)]
        return np.array(vals, dtype=complex).reshape(shape)


def random_unitary(rng: SplitMix64, dim: int) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix with phases fixed."""
    z = rng.complex_normal((dim, dim)) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_ket(rng: SplitMix64, dim: int) -> np.ndarray:
    v = rng.complex_normal((dim,))
    return v / np.linalg.norm(v)


def random_density(rng: SplitMix64, dim: int, rank: int | None = None) -> np.ndarray:
    rank = dim if rank is None else rank
    g = rng.complex_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
