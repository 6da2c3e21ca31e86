"""Dense linear algebra over small labeled tensor-product Hilbert spaces.

Amplitudes and matrix entries use the mixed-radix convention throughout:
subsystem 0 is the most significant digit, so a state over ``dims=(2, 3)``
is the C-order flattening of a ``(2, 3)`` array. Global phases are kept as
they are; compare pure states with :func:`fidelity`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

NORM_TOL = 1e-12
MATRIX_TOL = 1e-10


def _as_dims(dims: Sequence[int], size: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"dims must be a non-empty sequence of positive integers, got {dims}")
    if math.prod(dims) != size:
        raise ValueError(f"dims {dims} describe {math.prod(dims)} entries, got {size}")
    return dims


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Ket:
    """A pure state over a labeled tensor factorization.

    Kets built with :func:`ket_new` are unit norm. Branches produced by a
    projection keep their squared norm as ``weight`` and are flagged
    ``subnormalized``.
    """

    amplitudes: np.ndarray
    dims: tuple[int, ...]
    subnormalized: bool = False

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", _as_dims(self.dims, amps.size))
        if not self.subnormalized and abs(np.linalg.norm(amps) - 1.0) > NORM_TOL:
            raise ValueError("ket is not normalized; use Ket.unnormalized for branches")

    @classmethod
    def unnormalized(cls, amplitudes, dims: Sequence[int]) -> Ket:
        return cls(np.asarray(amplitudes, dtype=complex), tuple(dims), subnormalized=True)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def weight(self) -> float:
        """Squared norm; 1 for normalized kets."""
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def inner(self, other: Ket) -> complex:
        """<self|other>."""
        if self.dims != other.dims:
            raise ValueError(f"dims mismatch: {self.dims} vs {other.dims}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)

    def normalized(self) -> Ket:
        return ket_new(self.amplitudes, self.dims)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Square operator acting on a tensor product space.

    Setting ``unitary=True`` asserts U^dagger U = I within 1e-10 at construction.
    """

    entries: np.ndarray
    dims: tuple[int, ...]
    unitary: bool = False

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be a square matrix, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "dims", _as_dims(self.dims, m.shape[0]))
        if self.unitary and not is_unitary(self, MATRIX_TOL):
            raise ValueError("operator flagged unitary fails U^dagger U = I at 1e-10")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def adjoint(self) -> OperatorMatrix:
        return OperatorMatrix(self.entries.conj().T, self.dims, self.unitary)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite matrix whose trace equals ``weight``.

    ``weight`` defaults to the trace. Unconditional states have weight 1;
    post-selected branches keep their (smaller) trace explicitly.
    """

    entries: np.ndarray
    dims: tuple[int, ...]
    weight: float | None = field(default=None)

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        object.__setattr__(self, "entries", m)
        object.__setattr__(self, "dims", _as_dims(self.dims, m.shape[0]))
        trace = float(np.trace(m).real)
        if self.weight is None:
            object.__setattr__(self, "weight", trace)
        weight = float(self.weight)
        object.__setattr__(self, "weight", weight)
        if not -MATRIX_TOL <= weight <= 1 + MATRIX_TOL:
            raise ValueError(f"weight must lie in [0, 1], got {weight}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > MATRIX_TOL:
            raise ValueError("density matrix is not Hermitian within 1e-10")
        if abs(trace - weight) > MATRIX_TOL:
            raise ValueError(f"trace {trace} differs from weight {weight}")
        if np.linalg.eigvalsh(m)[0] < -MATRIX_TOL:
            raise ValueError("density matrix has a negative eigenvalue below -1e-10")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)


@dataclass(frozen=True)
class BasisPair:
    """Qubit basis {|psi>, |psi_bar>} labeled by an angle in radians.

    ``theta == 0`` is the reference basis {|0>, |1>}. Any other angle gives

        |psi(theta)>     = cos(theta)|0> + sin(theta)|1>
        |psi_bar(theta)> = sin(theta)|0> - cos(theta)|1>

    i.e. the pair reached from the reference basis by the reflection that
    relates two measurement bases of the no-signalling experiment. The
    reflection has determinant -1, so a singlet written in a rotated basis
    differs from the reference one by a global sign.
    """

    theta: float

    @property
    def psi(self) -> Ket:
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Ket(np.array([c, s], dtype=complex), (2,))

    @property
    def psi_bar(self) -> Ket:
        if self.theta == 0:
            return Ket(np.array([0, 1], dtype=complex), (2,))
        c, s = math.cos(self.theta), math.sin(self.theta)
        return Ket(np.array([s, -c], dtype=complex), (2,))

    @property
    def vectors(self) -> tuple[Ket, Ket]:
        return self.psi, self.psi_bar


def ket_new(amplitudes, dims: Sequence[int] | None = None) -> Ket:
    """Normalize ``amplitudes`` into a Ket.

    Raises:
        ValueError: zero vector, or ``dims`` inconsistent with the length.
    """
    amps = np.ravel(np.asarray(amplitudes, dtype=complex))
    dims = (amps.size,) if dims is None else dims
    _as_dims(dims, amps.size)
    norm = np.linalg.norm(amps)
    if norm == 0 or not np.isfinite(norm):
        raise ValueError("cannot normalize a zero (or non-finite) vector")
    return Ket(amps / norm, tuple(dims))


def basis_ket(index: int, dim: int) -> Ket:
    amps = np.zeros(dim, dtype=complex)
    amps[index] = 1.0
    return Ket(amps, (dim,))


def identity(dims: Sequence[int]) -> OperatorMatrix:
    n = math.prod(dims)
    return OperatorMatrix(np.eye(n, dtype=complex), tuple(dims), unitary=True)


def kron(a, b):
    """Tensor product ``a (x) b``; subsystem lists are concatenated, ``a`` first."""
    if isinstance(a, Ket) and isinstance(b, Ket):
        sub = a.subnormalized or b.subnormalized
        return Ket(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims, subnormalized=sub)
    if isinstance(a, OperatorMatrix) and isinstance(b, OperatorMatrix):
        return OperatorMatrix(np.kron(a.entries, b.entries), a.dims + b.dims,
                              unitary=a.unitary and b.unitary)
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(np.kron(a.entries, b.entries), a.dims + b.dims,
                             weight=a.weight * b.weight)
    raise TypeError(f"cannot kron {type(a).__name__} with {type(b).__name__}")


def _check_permutation(order: Sequence[int], n: int) -> list[int]:
    order = [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of 0..{n - 1}")
    return order


def permute_subsystems(x, order: Sequence[int]):
    """Reorder subsystems so that output subsystem i is input subsystem ``order[i]``."""
    n = len(x.dims)
    order = _check_permutation(order, n)
    dims = tuple(x.dims[i] for i in order)
    if isinstance(x, Ket):
        amps = np.transpose(x.tensor(), order).ravel()
        return Ket(amps, dims, subnormalized=x.subnormalized)
    if isinstance(x, DensityMatrix):
        t = x.entries.reshape(x.dims + x.dims)
        t = np.transpose(t, order + [n + i for i in order])
        size = x.dim
        return DensityMatrix(t.reshape(size, size), dims, weight=x.weight)
    raise TypeError(f"cannot permute {type(x).__name__}")


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Trace out every subsystem not listed in ``keep``.

    Kept subsystems appear in increasing index order. The weight is carried
    over unchanged.
    """
    keep = sorted(set(int(k) for k in keep))
    n = len(rho.dims)
    if not keep:
        raise ValueError("keep must name at least one subsystem")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep indices {keep} out of range for {n} subsystems")
    traced = [i for i in range(n) if i not in keep]
    dk = math.prod(rho.dims[i] for i in keep)
    dt = math.prod(rho.dims[i] for i in traced)
    t = rho.entries.reshape(rho.dims + rho.dims)
    order = keep + traced
    t = np.transpose(t, order + [n + i for i in order]).reshape(dk, dt, dk, dt)
    reduced = np.einsum("ajbj->ab", t)
    return DensityMatrix(reduced, tuple(rho.dims[i] for i in keep), weight=rho.weight)


def project(psi: Ket, subsystem: int, onto: Ket, keep: bool = False) -> tuple[Ket, float]:
    """Apply <onto| to one subsystem of ``psi``.

    With ``keep=False`` the projected subsystem is removed from the branch;
    with ``keep=True`` it is kept in the state ``onto``. Returns the
    subnormalized branch and its probability (squared norm).
    """
    if not 0 <= subsystem < len(psi.dims):
        raise ValueError(f"subsystem {subsystem} out of range")
    if onto.dim != psi.dims[subsystem]:
        raise ValueError(f"onto has dimension {onto.dim}, subsystem has {psi.dims[subsystem]}")
    t = np.tensordot(onto.amplitudes.conj(), psi.tensor(), axes=([0], [subsystem]))
    dims = psi.dims[:subsystem] + psi.dims[subsystem + 1:]
    if keep:
        t = np.moveaxis(np.multiply.outer(onto.amplitudes, t), 0, subsystem)
        dims = psi.dims
    if not dims:
        dims = (1,)
    branch = Ket.unnormalized(t.ravel(), dims)
    return branch, branch.weight


def apply(op: OperatorMatrix, psi: Ket, targets: Sequence[int]) -> Ket:
    """Apply ``op`` to the listed subsystems of ``psi`` (in the listed order)."""
    targets = [int(t) for t in targets]
    n = len(psi.dims)
    if len(set(targets)) != len(targets) or any(not 0 <= t < n for t in targets):
        raise ValueError(f"invalid targets {targets}")
    if tuple(psi.dims[t] for t in targets) != op.dims:
        raise ValueError(f"operator dims {op.dims} do not match target dims")
    k = len(targets)
    m = op.entries.reshape(op.dims + op.dims)
    t = np.tensordot(m, psi.tensor(), axes=(list(range(k, 2 * k)), targets))
    # tensordot puts the operator's output axes first; move them back in place
    t = np.moveaxis(t, list(range(k)), targets)
    return Ket(t.ravel(), psi.dims, subnormalized=psi.subnormalized)


def fidelity(a: Ket, b: Ket) -> float:
    """|<a|b>|^2, insensitive to global phase."""
    return abs(a.inner(b)) ** 2


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the sum of absolute eigenvalues of ``a - b``."""
    if a.dims != b.dims:
        raise ValueError(f"dims mismatch: {a.dims} vs {b.dims}")
    diff = a.entries - b.entries
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def is_unitary(u, tol: float = MATRIX_TOL) -> bool:
    m = u.entries if isinstance(u, OperatorMatrix) else np.asarray(u)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    defect = m.conj().T @ m - np.eye(m.shape[0])
    return bool(np.max(np.abs(defect), initial=0.0) <= tol)
