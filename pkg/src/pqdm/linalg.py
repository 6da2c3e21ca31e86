"""Factorization and unitary-completion helpers used by machine synthesis."""

from __future__ import annotations

import numpy as np

DROP_TOL = 1e-8
CLIP_TOL = 1e-10


def psd_factor(r: np.ndarray, rel_floor: float = 1e-14) -> np.ndarray:
    """Return F with F^dagger F ~= r from the Hermitian square root of ``r``.

    Eigenvalues in [-1e-10, 0) are treated as zero and eigenvalues below
    ``rel_floor * max(1, lambda_max)`` are dropped, so numerically null
    directions do not pick up square-rooted rounding noise. Rows of the
    result correspond to the retained eigenvectors.
    """
    r = 0.5 * (r + r.conj().T)
    w, v = np.linalg.eigh(r)
    if w.size and w[0] < -CLIP_TOL:
        raise ValueError(f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
    floor = rel_floor * max(1.0, float(w[-1]) if w.size else 1.0)
    keep = w > floor
    return np.sqrt(w[keep])[:, None] * v[:, keep].conj().T


def complement_basis(basis: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal completion of the columns of ``basis`` in C^dim.

    Candidates are the canonical basis vectors in order; each is
    orthogonalized twice (modified Gram-Schmidt with re-orthogonalization)
    and dropped if its residual norm falls below 1e-8.
    """
    cols = [basis[:, j] for j in range(basis.shape[1])]
    added = []
    need = dim - len(cols)
    for i in range(dim):
        if len(added) == need:
            break
        w = np.zeros(dim, dtype=complex)
        w[i] = 1.0
        for _ in range(2):
            for q in cols:
                w = w - q * np.vdot(q, w)
        nrm = np.linalg.norm(w)
        if nrm < DROP_TOL:
            continue
        w = w / nrm
        cols.append(w)
        added.append(w)
    if len(added) != need:
        raise RuntimeError("orthonormal completion failed to reach full dimension")
    return np.column_stack(added) if added else np.zeros((dim, 0), dtype=complex)


def range_basis(m: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of the column range of ``m`` (singular values > tol)."""
    if m.size == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    return u[:, s > tol]


def polar_isometry(m: np.ndarray) -> np.ndarray:
    """Closest matrix with orthonormal columns (unitary polar factor)."""
    u, _, vh = np.linalg.svd(m, full_matrices=False)
    return u @ vh


def unitary_extension(inputs: np.ndarray, images: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Unitary U with U @ inputs ~= images, given matching Gram matrices.

    The span of ``inputs`` is mapped onto the span of ``images`` through the
    thin SVD of ``inputs``; the orthogonal complements of domain and codomain
    are then paired up by :func:`complement_basis`.
    """
    dim = inputs.shape[0]
    w, s, zh = np.linalg.svd(inputs, full_matrices=False)
    k = int(np.sum(s > rank_tol * max(1.0, s[0] if s.size else 1.0)))
    dom = w[:, :k]
    cod = polar_isometry(images @ zh[:k].conj().T / s[:k])
    dom_perp = complement_basis(dom, dim)
    cod_perp = complement_basis(cod, dim)
    return cod @ dom.conj().T + cod_perp @ dom_perp.conj().T
