"""Deletion-probability bound for a bipartite ensemble.

Two copies of (1/sqrt(N)) sum_k |u_k>|v_k> are prepared, the machine acts
on Bob's two halves, and projecting Alice's side onto |u_i u_i> leaves
Bob's vector zeta_i. Because all |u_k> are orthonormal,

    (p_i + p_j) / 2 <= (1 - N^2 |<zeta_i|zeta_j>|) / (1 - |<v_i|v_j>|)

must hold for every pair. The right-hand side is reported as computed, even
when it exceeds 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .machine import DeletionMachine, StateSet
from .qcore import Ket, apply, basis_ket, kron, permute_subsystems, project

BOUND_TOL = 1e-9
DEGENERATE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BipartiteEnsemble:
    alice_states: tuple[Ket, ...]
    bob_states: StateSet

    def __post_init__(self):
        alice = tuple(Ket(u.amplitudes, (u.dim,)) for u in self.alice_states)
        object.__setattr__(self, "alice_states", alice)
        n = self.bob_states.n
        if n < 2:
            raise ValueError("an ensemble needs N >= 2")
        if len(alice) != n:
            raise ValueError(f"{len(alice)} Alice states for {n} Bob states")
        dims = {u.dim for u in alice}
        if len(dims) != 1 or dims.pop() < n:
            raise ValueError("Alice states must share one dimension of at least N")
        a = np.column_stack([u.amplitudes for u in alice])
        if np.max(np.abs(a.conj().T @ a - np.eye(n))) > 1e-12:
            raise ValueError("Alice states must be orthonormal")

    @classmethod
    def with_computational_alice(cls, bob_states: StateSet) -> BipartiteEnsemble:
        n = bob_states.n
        return cls(tuple(basis_ket(k, n) for k in range(n)), bob_states)

    @property
    def n(self) -> int:
        return self.bob_states.n

    @property
    def alice_dim(self) -> int:
        return self.alice_states[0].dim

    @property
    def bob_dim(self) -> int:
        return self.bob_states.dim


@dataclass(frozen=True)
class BoundReport:
    pair: tuple[int, int]
    lhs: float
    zeta_overlap: float
    v_overlap: float
    rhs: float
    satisfied: bool

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


def ensemble_state(e: BipartiteEnsemble) -> Ket:
    """(1/sqrt(N)) sum_k |u_k>|v_k> over (Alice, Bob)."""
    if not e.bob_states.independent:
        raise ValueError("Bob's states must be linearly independent")
    amps = sum(np.kron(u.amplitudes, v.amplitudes)
               for u, v in zip(e.alice_states, e.bob_states.states))
    return Ket(amps / math.sqrt(e.n), (e.alice_dim, e.bob_dim))


def _same_states(a: StateSet, b: StateSet) -> bool:
    return a.n == b.n and a.dim == b.dim and np.allclose(a.matrix, b.matrix, atol=1e-12, rtol=0)


def deleted_state(e: BipartiteEnsemble, m: DeletionMachine) -> Ket:
    """Apply ``m`` to Bob's halves of two ensemble copies; result over (A, A, B, B, probe)."""
    if not _same_states(e.bob_states, m.spec.state_set):
        raise ValueError("machine was not built on this ensemble's Bob states")
    psi = ensemble_state(e)
    two = permute_subsystems(kron(psi, psi), (0, 2, 1, 3))
    two = kron(two, basis_ket(0, m.probe_dim))
    return apply(m.unitary, two, (2, 3, 4))


def zeta(xi: Ket, e: BipartiteEnsemble, i: int) -> Ket:
    """<u_i u_i| applied to Alice's factors of ``xi``; subnormalized, over (B, B, probe)."""
    if not 0 <= i < e.n:
        raise IndexError(f"index {i} out of range for N={e.n}")
    u = e.alice_states[i]
    z, _ = project(xi, 0, u)
    z, _ = project(z, 0, u)
    return z


def _check_pair(e: BipartiteEnsemble, i: int, j: int) -> float:
    v_ov = abs(e.bob_states.states[i].inner(e.bob_states.states[j]))
    if v_ov > 1 - DEGENERATE_TOL:
        raise ValueError(f"degenerate pair ({i}, {j}): |<v_i|v_j>| = {v_ov:.12f}")
    return v_ov


def bound_report(xi: Ket, e: BipartiteEnsemble, m: DeletionMachine, i: int, j: int) -> BoundReport:
    """Evaluate both sides of the bound for one pair using the simulated ``xi``."""
    v_ov = _check_pair(e, i, j)
    n = e.n
    z_ov = n * n * abs(zeta(xi, e, i).inner(zeta(xi, e, j)))
    p = m.spec.probabilities
    lhs = 0.5 * (p[i] + p[j])
    rhs = (1 - z_ov) / (1 - v_ov)
    return BoundReport((i, j), lhs, z_ov, v_ov, rhs, lhs <= rhs + BOUND_TOL)


def check_bound(e: BipartiteEnsemble, m: DeletionMachine) -> list[BoundReport]:
    """One report per unordered pair i < j.

    Raises:
        ValueError: some pair has |<v_i|v_j>| = 1, where the bound divides by zero.
    """
    pairs = [(i, j) for i in range(e.n) for j in range(i + 1, e.n)]
    for i, j in pairs:
        _check_pair(e, i, j)
    xi = deleted_state(e, m)
    return [bound_report(xi, e, m, i, j) for i, j in pairs]


def failure_state(m: DeletionMachine, i: int) -> np.ndarray:
    """Normalized failure vector phi_i from the machine's designed images (zero if p_i = 1)."""
    f = m.failure_vectors()[:, i]
    nrm = np.linalg.norm(f)
    return f / nrm if nrm > 1e-15 else np.zeros_like(f)


def closed_form_overlap(m: DeletionMachine, i: int, j: int) -> complex:
    """sqrt(p_i p_j)<v_i|v_j> + sqrt((1-p_i)(1-p_j))<phi_i|phi_j>, from machine internals."""
    p = m.probabilities
    v = m.spec.state_set.states
    succ = math.sqrt(p[i] * p[j]) * v[i].inner(v[j]) * m.spec.blank.weight
    fail = math.sqrt(max(0.0, (1 - p[i]) * (1 - p[j]))) * np.vdot(failure_state(m, i), failure_state(m, j))
    return complex(succ + fail)
