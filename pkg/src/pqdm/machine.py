"""Probabilistic deletion machines: feasibility, optimization, synthesis.

A machine acts on ``input (x) input (x) probe``. For every ordered pair of
candidate states it must send

    |v_k v_k>|P0>  ->  sqrt(p_k)|v_k>|Sigma>|P0> + (failure, probe != P0)
    |v_k v_l>|P0>  ->  (cross image, probe != P0)          k != l

Unitarity preserves all pairwise inner products of the N^2 inputs, and the
success components are orthogonal to everything else through |P0>, so a
machine exists iff the residual Gram matrix (input Gram minus the Gram of the
pinned success components) is positive semidefinite.

Input pairs are indexed ``a = k * N + l`` (the mixed-radix index of
|v_k>|v_l>). Probe level 0 is P0; the remaining levels are split into a
P1 sector for diagonal failures and P2/P3 sectors for the new directions
needed by k < l and k > l cross images.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from . import linalg
from .qcore import BasisPair, Ket, OperatorMatrix, basis_ket, fidelity, ket_new

FEASIBLE_TOL = 1e-10
RANK_TOL = 1e-10
BISECTION_TOL = 1e-8
VERIFY_TOL = 1e-9
# residual eigenvalues in [-FEASIBLE_TOL, NUDGE_FLOOR) are removed by shrinking
# the pinned amplitudes slightly before factorization
NUDGE_FLOOR = -1e-13


@dataclass(frozen=True, eq=False)
class StateSet:
    """Candidate states |v_k> living in one input space of dimension d."""

    states: tuple[Ket, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ValueError("a state set needs at least one state")
        dim = states[0].dim
        flat = []
        for s in states:
            if s.dim != dim:
                raise ValueError("all states must share one input dimension")
            if abs(s.weight - 1.0) > 1e-12:
                raise ValueError("states must be unit norm")
            flat.append(Ket(s.amplitudes, (dim,)))
        object.__setattr__(self, "states", tuple(flat))
        labels = tuple(self.labels) or tuple(f"v{k}" for k in range(len(flat)))
        if len(labels) != len(flat):
            raise ValueError("need exactly one label per state")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_vectors(cls, vectors, labels: Sequence[str] = ()) -> StateSet:
        """Normalize each row/sequence of amplitudes into a state."""
        return cls(tuple(ket_new(v) for v in vectors), tuple(labels))

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    @property
    def matrix(self) -> np.ndarray:
        """d x N matrix whose columns are the states."""
        return np.column_stack([s.amplitudes for s in self.states])

    @cached_property
    def gram_rank(self) -> int:
        return int(np.sum(np.linalg.eigvalsh(gram(self)) > RANK_TOL))

    @property
    def independent(self) -> bool:
        return self.gram_rank == self.n

    def permuted(self, order: Sequence[int]) -> StateSet:
        return StateSet(tuple(self.states[i] for i in order), tuple(self.labels[i] for i in order))

    def transformed(self, u: np.ndarray) -> StateSet:
        """Apply the same unitary to every state."""
        return StateSet(tuple(Ket(u @ s.amplitudes, (self.dim,)) for s in self.states), self.labels)


def basis_pair_states(basis: BasisPair) -> StateSet:
    """The orthogonal pair {|psi>, |psi_bar>} as a two-element state set."""
    return StateSet(basis.vectors, ("psi", "psi_bar"))


def four_state_set(theta: float) -> StateSet:
    """{psi_1, psi_bar_1, psi_2, psi_bar_2}: a reference pair and its reflection by ``theta``."""
    b1, b2 = BasisPair(0.0), BasisPair(theta)
    return StateSet(b1.vectors + b2.vectors, ("psi1", "psi_bar1", "psi2", "psi_bar2"))


def two_state_set(overlap: complex) -> StateSet:
    """|0> and a second qubit state with <v0|v1> = ``overlap``."""
    s = complex(overlap)
    if abs(s) > 1:
        raise ValueError("overlap modulus cannot exceed 1")
    v1 = np.array([s, math.sqrt(max(0.0, 1 - abs(s) ** 2))], dtype=complex)
    return StateSet((basis_ket(0, 2), ket_new(v1)))


@dataclass(frozen=True, eq=False)
class MachineSpec:
    state_set: StateSet
    probabilities: tuple[float, ...]
    blank: Ket | None = None
    probe_dim: int = 4

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probabilities)
        if len(probs) != self.state_set.n:
            raise ValueError(f"{len(probs)} probabilities for {self.state_set.n} states")
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValueError(f"probabilities must lie in [0, 1], got {probs}")
        object.__setattr__(self, "probabilities", probs)
        blank = basis_ket(0, self.state_set.dim) if self.blank is None else self.blank
        if blank.dim != self.state_set.dim:
            raise ValueError("blank state must live in the input space")
        if abs(blank.weight - 1.0) > 1e-12:
            raise ValueError("blank state must be unit norm")
        object.__setattr__(self, "blank", Ket(blank.amplitudes, (blank.dim,)))
        if int(self.probe_dim) < 2:
            raise ValueError("probe_dim must be at least 2")
        object.__setattr__(self, "probe_dim", int(self.probe_dim))

    @classmethod
    def uniform(cls, state_set: StateSet, p: float, **kwargs) -> MachineSpec:
        return cls(state_set, (p,) * state_set.n, **kwargs)


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    feasible: bool
    residual_gram: np.ndarray
    min_eigenvalue: float


@dataclass(frozen=True, eq=False)
class DeletionMachine:
    """Unitary over (input, input, probe) plus the bookkeeping that built it.

    ``images`` holds the designed output of every input pair (column
    ``k * N + l``) when the machine comes from :func:`synthesize`; hand-built
    machines may leave it unset. ``realized_probabilities`` are the success
    probabilities actually built in; they differ from the spec only when a
    boundary spec had to be shrunk by round-off size (see :func:`synthesize`).
    """

    unitary: OperatorMatrix
    spec: MachineSpec
    probe_labels: dict[int, str] = field(default_factory=dict)
    images: np.ndarray | None = None
    realized_probabilities: tuple[float, ...] | None = None

    @property
    def probabilities(self) -> tuple[float, ...]:
        return self.realized_probabilities or self.spec.probabilities

    @property
    def dim(self) -> int:
        return self.spec.state_set.dim

    @property
    def probe_dim(self) -> int:
        return self.spec.probe_dim

    def probe_level(self, label: str) -> int:
        for level, name in self.probe_labels.items():
            if name == label:
                return level
        raise KeyError(label)

    def input_vector(self, k: int, l: int) -> np.ndarray:
        v = self.spec.state_set.states
        return _with_probe(np.kron(v[k].amplitudes, v[l].amplitudes), self.probe_dim, 0)

    def output_vector(self, k: int, l: int) -> np.ndarray:
        return self.unitary.entries @ self.input_vector(k, l)

    def failure_vectors(self) -> np.ndarray:
        """Designed P0-orthogonal part of every diagonal image, one column per state.

        Column k has squared norm 1 - p_k.
        """
        if self.images is None:
            raise ValueError("machine carries no designed images")
        n = self.spec.state_set.n
        cols = self.images[:, [k * n + k for k in range(n)]].copy()
        cols[_level_mask(self.dim, self.probe_dim, 0)] = 0.0
        return cols


def _with_probe(v: np.ndarray, probe_dim: int, level: int) -> np.ndarray:
    out = np.zeros((v.size, probe_dim), dtype=complex)
    out[:, level] = v
    return out.ravel()


def _level_mask(dim: int, probe_dim: int, level: int) -> np.ndarray:
    mask = np.zeros((dim * dim, probe_dim), dtype=bool)
    mask[:, level] = True
    return mask.ravel()


def gram(state_set: StateSet) -> np.ndarray:
    """Entry (i, j) = <v_i|v_j>."""
    m = state_set.matrix
    return m.conj().T @ m


def pair_gram(state_set: StateSet) -> np.ndarray:
    """Gram matrix of the N^2 inputs |v_k v_l>, indexed k * N + l."""
    g = gram(state_set)
    return np.kron(g, g)


def pinned_gram(spec: MachineSpec) -> np.ndarray:
    """Gram of the success components sqrt(p_k)|v_k>|Sigma> (zero for k != l)."""
    n = spec.state_set.n
    g = gram(spec.state_set)
    amp = np.sqrt(np.asarray(spec.probabilities))
    diag = [k * n + k for k in range(n)]
    out = np.zeros((n * n, n * n), dtype=complex)
    out[np.ix_(diag, diag)] = np.outer(amp, amp) * g * spec.blank.weight
    return out


def residual_gram(spec: MachineSpec) -> np.ndarray:
    return pair_gram(spec.state_set) - pinned_gram(spec)


def _min_eig(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])


def feasibility(spec: MachineSpec) -> FeasibilityReport:
    """Decide whether some unitary realizes ``spec``; infeasible is a normal result."""
    r = residual_gram(spec)
    lam = _min_eig(r)
    return FeasibilityReport(lam >= -FEASIBLE_TOL, r, lam)


def max_uniform_probability(state_set: StateSet, tol: float = BISECTION_TOL) -> float:
    """Largest uniform success probability with a PSD residual, by bisection.

    Feasibility is monotone in the uniform p because the pinned Gram scales
    linearly with p and is itself PSD.
    """
    g2 = pair_gram(state_set)
    k = pinned_gram(MachineSpec.uniform(state_set, 1.0))

    def ok(p: float) -> bool:
        return _min_eig(g2 - p * k) >= -FEASIBLE_TOL

    if ok(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _pinned_scale(spec: MachineSpec) -> float:
    """Factor t <= 1 on the success amplitudes that removes boundary round-off.

    Returns 1 unless the residual's smallest eigenvalue lies in the accepted
    band [-1e-10, -1e-13); then t is the largest value found by bisection
    whose residual clears -1e-13. The resulting probability shift is of the
    order of the band width.
    """
    g2 = pair_gram(spec.state_set)
    k = pinned_gram(spec)
    if _min_eig(g2 - k) >= NUDGE_FLOOR:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if _min_eig(g2 - mid * mid * k) >= NUDGE_FLOOR:
            lo = mid
        else:
            hi = mid
    return lo


def _group_indices(n: int) -> list[list[int]]:
    diag = [k * n + k for k in range(n)]
    upper = [k * n + l for k in range(n) for l in range(n) if k < l]
    lower = [k * n + l for k in range(n) for l in range(n) if k > l]
    return [diag, upper, lower] if n > 1 else [diag]


def _sector_blocks(f: np.ndarray, groups: list[list[int]]) -> tuple[np.ndarray, list[int]]:
    """Rotate the rows of ``f`` so that groups occupy consecutive row blocks.

    Rows of block g span the part of group g's columns orthogonal to earlier
    groups, so diagonal failures sit entirely in the first block. The
    rotation is unitary and therefore leaves f^dagger f untouched.
    """
    r = f.shape[0]
    basis = np.zeros((r, 0), dtype=complex)
    sizes = []
    for idx in groups:
        m = f[:, idx]
        for _ in range(2):
            m = m - basis @ (basis.conj().T @ m)
        b = linalg.range_basis(m, RANK_TOL)
        b = b - basis @ (basis.conj().T @ b)
        b = linalg.polar_isometry(b) if b.shape[1] else b
        basis = np.hstack([basis, b])
        sizes.append(b.shape[1])
    rest = linalg.complement_basis(basis, r) if basis.shape[1] < r else np.zeros((r, 0))
    sizes[-1] += rest.shape[1]
    q = np.hstack([basis, rest])
    return q.conj().T @ f, sizes


def _role_names(n: int) -> list[str]:
    return ["P1", "P2", "P3"] if n > 1 else ["P1"]


def synthesize(spec: MachineSpec) -> DeletionMachine:
    """Build an explicit unitary realizing ``spec``.

    Specs accepted by :func:`feasibility` may sit on the boundary with a
    residual eigenvalue as low as -1e-10. Such a spec is realized with all
    success amplitudes scaled by a common factor just below 1, which keeps
    the factorization exact; the probability shift is of order 1e-10.

    Raises:
        ValueError: the spec is infeasible, or ``probe_dim`` cannot host the
            failure sectors.
    """
    report = feasibility(spec)
    if not report.feasible:
        raise ValueError(f"infeasible spec: residual Gram min eigenvalue {report.min_eigenvalue:.6e}")
    states = spec.state_set
    n, d, pdim = states.n, states.dim, spec.probe_dim
    t = _pinned_scale(spec)
    amps = t * np.sqrt(np.asarray(spec.probabilities))
    scaled = MachineSpec(states, tuple(a * a for a in amps), spec.blank, pdim)

    groups = _group_indices(n)
    f = linalg.psd_factor(residual_gram(scaled))
    f, sizes = _sector_blocks(f, groups)

    slots = d * d
    levels = [max(1, math.ceil(s / slots)) for s in sizes]
    required = 1 + sum(levels)
    if pdim < required:
        raise ValueError(f"probe_dim={pdim} too small: failure sectors need probe_dim >= {required}")

    labels = {0: "P0"}
    images = np.zeros((slots * pdim, n * n), dtype=complex)
    base, row = 1, 0
    for role, size, nlev in zip(_role_names(n), sizes, levels):
        for j in range(nlev):
            labels[base + j] = role if j == 0 else f"{role}.{j}"
        for t_row in range(size):
            level = base + t_row // slots
            slot = t_row % slots
            images[slot * pdim + level, :] = f[row + t_row, :]
        base += nlev
        row += size
    for level in range(base, pdim):
        labels[level] = "idle"

    for k, v in enumerate(states.states):
        success = amps[k] * np.kron(v.amplitudes, spec.blank.amplitudes)
        images[:, k * n + k] += _with_probe(success, pdim, 0)

    inputs = np.column_stack([
        _with_probe(np.kron(states.states[k].amplitudes, states.states[l].amplitudes), pdim, 0)
        for k in range(n) for l in range(n)
    ])
    u = linalg.unitary_extension(inputs, images)
    op = OperatorMatrix(u, (d, d, pdim), unitary=True)
    return DeletionMachine(op, spec, labels, images, scaled.probabilities)


@dataclass(frozen=True)
class VerificationReport:
    unitarity_defect: float
    success_probability_error: float
    fidelity_error: float
    cross_leakage: float
    gram_defect: float
    tol: float = VERIFY_TOL

    @property
    def passed(self) -> bool:
        return all(x <= self.tol for x in (
            self.unitarity_defect, self.success_probability_error,
            self.fidelity_error, self.cross_leakage, self.gram_defect))


def success_component(m: DeletionMachine, k: int, l: int) -> np.ndarray:
    """P0 part of U|v_k v_l>|P0>, as a vector over (input, input)."""
    out = m.output_vector(k, l)
    return out.reshape(m.dim * m.dim, m.probe_dim)[:, 0]


def verify_machine(m: DeletionMachine, tol: float = VERIFY_TOL) -> VerificationReport:
    """Measure how far ``m`` is from an exact deletion machine for its spec."""
    spec = m.spec
    states = spec.state_set
    n = states.n
    u = m.unitary.entries
    unit = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))

    prob_err = fid_err = leak = 0.0
    for k in range(n):
        for l in range(n):
            s = success_component(m, k, l)
            prob = float(np.vdot(s, s).real)
            if k != l:
                leak = max(leak, prob)
                continue
            prob_err = max(prob_err, abs(prob - spec.probabilities[k]))
            if prob > 1e-12:
                target = Ket(np.kron(states.states[k].amplitudes, spec.blank.amplitudes), (m.dim, m.dim))
                got = Ket.unnormalized(s / math.sqrt(prob), (m.dim, m.dim))
                fid_err = max(fid_err, 1.0 - fidelity(target, got))

    x = np.column_stack([m.input_vector(k, l) for k in range(n) for l in range(n)])
    y = u @ x
    gdef = float(np.max(np.abs(y.conj().T @ y - x.conj().T @ x)))
    return VerificationReport(unit, prob_err, fid_err, leak, gdef, tol)
