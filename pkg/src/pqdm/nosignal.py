"""Two-singlet experiment with a deletion machine on Bob's side.

Particles are numbered 1-4 as in the experiment: Alice holds 1 and 3, Bob
holds 2 and 4, and singlets are shared on (1, 2) and (3, 4). Bob feeds
particle 2 into the first machine slot and particle 4 into the second (the
copy that gets deleted), together with a probe prepared in P0.

Alice's measurement never has to be simulated for the statements about
Bob's unconditional state. Her basis only enters when the post-machine state
is resolved by her outcomes, which is what ``alice_branches`` records.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from scipy import optimize

from .machine import DeletionMachine
from .qcore import (
    BasisPair,
    DensityMatrix,
    Ket,
    apply,
    basis_ket,
    kron,
    partial_trace,
    permute_subsystems,
    project,
    trace_distance,
)
from .rng import SplitMix64

SIGNAL_TOL = 1e-8
ALICE_LABELS = ("psi", "psi_bar")
BRANCH_NOTE = "post-selected branches may differ; this is not signalling"


def singlet(basis: BasisPair) -> Ket:
    """(|psi psi_bar> - |psi_bar psi>) / sqrt(2) written in ``basis``."""
    psi, bar = basis.psi.amplitudes, basis.psi_bar.amplitudes
    return Ket((np.kron(psi, bar) - np.kron(bar, psi)) / math.sqrt(2), (2, 2))


def composite_state(basis: BasisPair) -> Ket:
    """Singlet on (1, 2) times singlet on (3, 4), stored in particle order 1, 2, 3, 4."""
    s = singlet(basis)
    return kron(s, s)


@dataclass(frozen=True, eq=False)
class ProtocolResult:
    """Outcome of one protocol run.

    ``branches`` maps each probe label to Bob's subnormalized (2, 4) state
    and its probability. ``alice_branches`` refines them by Alice's outcome
    pair on particles (1, 3), keyed ``((outcome_1, outcome_3), probe_label)``.
    ``state`` is the final pure state over (1, 3, 2, 4, probe).
    """

    alice_basis: BasisPair
    unconditional_bob: DensityMatrix
    branches: dict[str, tuple[DensityMatrix, float]]
    alice_branches: dict[tuple[tuple[str, str], str], tuple[DensityMatrix, float]]
    machine: DeletionMachine
    state: Ket

    def correlated_branch(self, label: str = "P0") -> DensityMatrix:
        """Probe branch restricted to Alice finding equal outcomes in her basis.

        These are the events in which Bob's pair entered the machine as two
        copies of one basis state, i.e. where deletion is supposed to act.
        """
        parts = [self.alice_branches[((a, a), label)][0].entries for a in ALICE_LABELS]
        return DensityMatrix(sum(parts), (2, 2))


def _branch_dm(branch: Ket, keep) -> DensityMatrix:
    rho = DensityMatrix(np.outer(branch.amplitudes, branch.amplitudes.conj()), branch.dims)
    return partial_trace(rho, keep) if keep is not None else rho


def run_protocol(m: DeletionMachine, alice_basis: BasisPair) -> ProtocolResult:
    """Apply ``m`` to Bob's particles (2, 4) and resolve the result.

    Raises:
        ValueError: the machine is not a qubit machine.
    """
    if m.dim != 2:
        raise ValueError(f"protocol needs a qubit machine, got input dimension {m.dim}")
    pdim = m.probe_dim
    start = kron(composite_state(alice_basis), basis_ket(0, pdim))
    # (1, 2, 3, 4, probe) -> (1, 3, 2, 4, probe)
    start = permute_subsystems(start, (0, 2, 1, 3, 4))
    final = apply(m.unitary, start, (2, 3, 4))

    rho = final.density_matrix()
    unconditional = partial_trace(rho, (2, 3))
    labels = [m.probe_labels.get(j, f"level{j}") for j in range(pdim)]

    branches = {}
    for j, label in enumerate(labels):
        b, prob = project(final, 4, basis_ket(j, pdim))
        branches[label] = (_branch_dm(b, (2, 3)), prob)

    alice_vectors = dict(zip(ALICE_LABELS, alice_basis.vectors))
    alice_branches = {}
    for a1, a3 in product(ALICE_LABELS, repeat=2):
        b, _ = project(final, 0, alice_vectors[a1])
        b, _ = project(b, 0, alice_vectors[a3])
        for j, label in enumerate(labels):
            bj, prob = project(b, 2, basis_ket(j, pdim))
            alice_branches[((a1, a3), label)] = (_branch_dm(bj, None), prob)

    return ProtocolResult(alice_basis, unconditional, branches, alice_branches, m, final)


def detect_signalling(a: ProtocolResult, b: ProtocolResult, tol: float = SIGNAL_TOL) -> tuple[bool, float]:
    """Compare Bob's unconditional states for two choices of Alice's basis."""
    if a.machine is not b.machine:
        raise ValueError("results were produced by different machines")
    dist = trace_distance(a.unconditional_bob, b.unconditional_bob)
    return dist > tol, dist


@dataclass(frozen=True)
class BranchComparison:
    label: str
    distance: float
    note: str = BRANCH_NOTE


def compare_branches(a: ProtocolResult, b: ProtocolResult, label: str = "P0") -> BranchComparison:
    """Diagnostic: distance between Alice-correlated probe branches of two runs.

    A non-zero value is expected and says nothing about signalling, since
    these branches are conditioned on Alice's outcomes as well as Bob's probe.
    """
    if a.machine is not b.machine:
        raise ValueError("results were produced by different machines")
    dist = trace_distance(a.correlated_branch(label), b.correlated_branch(label))
    return BranchComparison(label, dist)


def mixture_target(p: float, p_bar: float, basis: BasisPair, blank: Ket) -> DensityMatrix:
    """1/4 [p |psi><psi| + p_bar |psi_bar><psi_bar|] (x) |Sigma><Sigma|."""
    psi, bar = basis.psi.amplitudes, basis.psi_bar.amplitudes
    q = p * np.outer(psi, psi.conj()) + p_bar * np.outer(bar, bar.conj())
    sig = np.outer(blank.amplitudes, blank.amplitudes.conj())
    return DensityMatrix(0.25 * np.kron(q, sig), (2, 2))


def fit_mixture(rho: DensityMatrix, basis: BasisPair, blank: Ket,
                lower: float = 0.0) -> tuple[float, float, float]:
    """Best (p, p_bar) in [lower, 1]^2 for :func:`mixture_target`; returns (p, p_bar, distance)."""
    def cost(x):
        return trace_distance(rho, mixture_target(x[0], x[1], basis, blank))

    psi_sig = np.kron(basis.psi.amplitudes, blank.amplitudes)
    bar_sig = np.kron(basis.psi_bar.amplitudes, blank.amplitudes)
    guess = [4 * np.vdot(v, rho.entries @ v).real for v in (psi_sig, bar_sig)]
    guess = np.clip(guess, lower, 1.0)
    res = optimize.minimize(cost, guess, method="Powell", bounds=[(lower, 1.0)] * 2,
                            options={"xtol": 1e-12, "ftol": 1e-14})
    best = min([(cost(res.x), tuple(res.x)), (cost(guess), tuple(guess))])
    return best[1][0], best[1][1], best[0]


def sample_outcomes(result: ProtocolResult, shots: int, seed: int = 0) -> dict[tuple[tuple[str, str], str], int]:
    """Draw joint (Alice outcome, probe outcome) records; for demonstration output only."""
    keys = list(result.alice_branches)
    probs = np.array([result.alice_branches[k][1] for k in keys])
    cdf = np.cumsum(probs / probs.sum())
    rng = SplitMix64(seed)
    counts = dict.fromkeys(keys, 0)
    for _ in range(shots):
        idx = int(np.searchsorted(cdf, rng.uniform(), side="right"))
        counts[keys[min(idx, len(keys) - 1)]] += 1
    return counts
