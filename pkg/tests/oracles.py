"""Independent reference computations for the test suite.

Nothing here imports the package's machine code: residual matrices are written
out by hand and spectra come straight from numpy.
"""

import numpy as np


def two_state_residual(s: float, p: float) -> np.ndarray:
    """4x4 residual Gram for <v0|v1> = s (real), uniform p; input order 00, 11, 01, 10."""
    return np.array([
        [1 - p, s * s - p * s, s, s],
        [s * s - p * s, 1 - p, s, s],
        [s, s, 1, s * s],
        [s, s, s * s, 1],
    ])


def two_state_feasible(s: float, p: float, tol: float = 1e-10) -> bool:
    return np.linalg.eigvalsh(two_state_residual(s, p))[0] >= -tol


def grid_max_probability(s: float, step: float = 1e-6, chunk: int = 200_000) -> float:
    """Brute-force scan of p in [0, 1] for the two-state residual."""
    ps = np.arange(0.0, 1.0 + step / 2, step)
    best = 0.0
    base = two_state_residual(s, 0.0)
    for i in range(0, ps.size, chunk):
        pc = ps[i:i + chunk]
        r = np.broadcast_to(base, (pc.size, 4, 4)).copy()
        r[:, 0, 0] -= pc
        r[:, 1, 1] -= pc
        r[:, 0, 1] -= pc * s
        r[:, 1, 0] -= pc * s
        ok = np.linalg.eigvalsh(r)[:, 0] >= -1e-10
        if ok.any():
            best = max(best, float(pc[ok].max()))
    return best


def two_state_max_probability_closed_form(s: float) -> float:
    """(1 - s)^2 (1 + s) / (1 + s^2).

    In the basis (00 +- 11)/sqrt2, (01 +- 10)/sqrt2 the residual splits into
    a 2x2 block [[1 + s^2 - p(1 + s), 2s], [2s, 1 + s^2]] plus diagonal
    entries that stay positive; the block determinant vanishes at this p.
    """
    return (1 - s) ** 2 * (1 + s) / (1 + s * s)


def residual_from_vectors(vectors: np.ndarray, probs, blank: np.ndarray) -> np.ndarray:
    """Residual Gram built from explicit input/output vectors (columns of ``vectors`` are states)."""
    n = vectors.shape[1]
    ins, pinned = [], []
    for k in range(n):
        for l in range(n):
            ins.append(np.kron(vectors[:, k], vectors[:, l]))
            if k == l:
                pinned.append(np.sqrt(probs[k]) * np.kron(vectors[:, k], blank))
            else:
                pinned.append(np.zeros(vectors.shape[0] ** 2, dtype=complex))
    x = np.column_stack(ins)
    y = np.column_stack(pinned)
    return x.conj().T @ x - y.conj().T @ y


def grid_feasible_probabilities(vectors: np.ndarray, ps, blank: np.ndarray | None = None):
    d = vectors.shape[0]
    blank = np.eye(d)[0] if blank is None else blank
    n = vectors.shape[1]
    return [np.linalg.eigvalsh(residual_from_vectors(vectors, [p] * n, blank))[0] >= -1e-10 for p in ps]


def trace_norm_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())
