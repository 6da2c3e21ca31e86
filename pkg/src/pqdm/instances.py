"""Seeded generators for random state sets and machine specs."""

from __future__ import annotations

import numpy as np

from .machine import MachineSpec, StateSet, feasibility, max_uniform_probability
from .qcore import Ket
from .rng import SplitMix64, random_unitary

MIN_GRAM_EIG = 1e-3


def _states_from_gram(g: np.ndarray, dim: int, rng: SplitMix64) -> StateSet:
    n = g.shape[0]
    lower = np.linalg.cholesky(g)
    vecs = np.zeros((dim, n), dtype=complex)
    vecs[:n, :] = lower.conj().T
    vecs = random_unitary(rng, dim) @ vecs
    vecs /= np.linalg.norm(vecs, axis=0)
    return StateSet(tuple(Ket(vecs[:, k], (dim,)) for k in range(n)))


def equiangular_state_set(n: int, overlap: float, dim: int | None = None,
                          rng: SplitMix64 | None = None) -> StateSet:
    """N states with every pairwise overlap equal to the real number ``overlap``.

    With ``rng`` the set is rotated by a random unitary; otherwise it is
    returned in the Cholesky frame.
    """
    dim = n if dim is None else dim
    g = np.full((n, n), overlap, dtype=complex)
    np.fill_diagonal(g, 1.0)
    if rng is None:
        lower = np.linalg.cholesky(g)
        vecs = np.zeros((dim, n), dtype=complex)
        vecs[:n, :] = lower.conj().T
        return StateSet(tuple(Ket(vecs[:, k] / np.linalg.norm(vecs[:, k]), (dim,)) for k in range(n)))
    return _states_from_gram(g, dim, rng)


def random_state_set(rng: SplitMix64, n: int, dim: int | None = None,
                     max_overlap: float = 0.9) -> StateSet:
    """Linearly independent states with pairwise |overlap| drawn uniformly in [0, max_overlap].

    Phases are random; draws whose Gram matrix has an eigenvalue below 1e-3
    are rejected and redrawn.
    """
    dim = n if dim is None else dim
    while True:
        g = np.eye(n, dtype=complex)
        for i in range(n):
            for j in range(i + 1, n):
                r = rng.uniform(0.0, max_overlap)
                phase = rng.uniform(0.0, 2 * np.pi)
                g[i, j] = r * np.exp(1j * phase)
                g[j, i] = np.conj(g[i, j])
        if np.linalg.eigvalsh(g)[0] >= MIN_GRAM_EIG:
            return _states_from_gram(g, dim, rng)


def random_feasible_spec(rng: SplitMix64, n: int, dim: int | None = None,
                         max_overlap: float = 0.9) -> MachineSpec:
    """Random independent set with per-state probabilities below the uniform optimum.

    Each p_k is the uniform optimum times an independent U(0, 1) factor;
    infeasible draws (possible for non-uniform vectors) are redrawn.
    """
    states = random_state_set(rng, n, dim, max_overlap)
    pmax = max_uniform_probability(states)
    while True:
        probs = tuple(pmax * rng.uniform() for _ in range(n))
        spec = MachineSpec(states, probs)
        if feasibility(spec).feasible:
            return spec
