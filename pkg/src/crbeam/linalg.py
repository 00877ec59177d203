"""Dense complex Hermitian linear algebra helpers.

Small wrappers with deterministic output conventions: ascending eigenvalues,
null-space bases with phase-fixed columns, Cholesky reduction for the
generalized symmetric-definite problem. Everything here is sized for matrices
up to a few dozen rows.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "HermitianEig",
    "hermitian_eig",
    "generalized_eig_max",
    "null_space_basis",
    "psd_sqrt",
]


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray  # real, ascending
    eigenvectors: np.ndarray  # unitary, column i pairs with eigenvalue i


def _square_complex(A, name: str) -> np.ndarray:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"{name} must be a nonempty square matrix")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} must be finite")
    return A


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate v so its largest-magnitude entry is real positive.

    Ties resolve to the lowest index. Zero vectors pass through.
    """
    i = int(np.argmax(np.abs(v)))
    a = v[i]
    if a == 0:
        return v
    return v * (np.conj(a) / abs(a))


def hermitian_eig(A) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, symmetrized internally."""
    A = _square_complex(A, "A")
    A = 0.5 * (A + A.conj().T)
    vals, vecs = np.linalg.eigh(A)
    return HermitianEig(vals, vecs)


def generalized_eig_max(A, B) -> tuple[float, np.ndarray]:
    """Largest generalized eigenpair of A u = lambda B u with B positive
    definite.

    Uses the Cholesky reduction B = L L^H, solves the standard Hermitian
    problem for L^-1 A L^-H and maps the eigenvector back. Returns
    (lambda_max, u) with ||u|| = 1 and u phase-fixed.
    """
    A = _square_complex(A, "A")
    B = _square_complex(B, "B")
    if A.shape != B.shape:
        raise ValueError("A and B must have identical shapes")
    A = 0.5 * (A + A.conj().T)
    B = 0.5 * (B + B.conj().T)
    bnorm = np.linalg.norm(B, 2)
    min_eig = np.linalg.eigvalsh(B)[0]
    if min_eig <= 1e-12 * max(bnorm, 1.0):
        raise ValueError("B must be positive definite")
    L = np.linalg.cholesky(B)
    # C = L^-1 A L^-H, formed via two triangular-system solves
    tmp = np.linalg.solve(L, A)
    C = np.linalg.solve(L, tmp.conj().T).conj().T
    C = 0.5 * (C + C.conj().T)
    vals, vecs = np.linalg.eigh(C)
    lam = float(vals[-1])
    u = np.linalg.solve(L.conj().T, vecs[:, -1])
    u = u / np.linalg.norm(u)
    return lam, _fix_phase(u)


def null_space_basis(channels: Sequence[np.ndarray]) -> np.ndarray:
    """Orthonormal basis H for the joint null space of the given channels.

    Each channel c contributes the condition c^H x = 0. For k linearly
    independent channels in C^M this returns an M x (M-k) matrix with
    orthonormal columns, each phase-fixed so its largest-magnitude entry is
    real positive. Raises ValueError when k >= M or the channels are
    (numerically) linearly dependent.
    """
    rows = [np.asarray(c, dtype=np.complex128).ravel() for c in channels]
    if not rows:
        raise ValueError("need at least one channel to null")
    M = rows[0].size
    if any(r.size != M for r in rows):
        raise ValueError("all channels must share the same length")
    k = len(rows)
    if k >= M:
        raise ValueError(f"cannot null {k} channels with M={M} relays")
    S = np.conj(np.vstack(rows))  # rows are c^H
    _, sing, Vh = np.linalg.svd(S, full_matrices=True)
    if sing[-1] <= 1e-10 * sing[0]:
        raise ValueError("channels to null are linearly dependent")
    H = Vh.conj().T[:, k:]
    H = np.column_stack([_fix_phase(H[:, j]) for j in range(H.shape[1])])
    return H


def psd_sqrt(X) -> np.ndarray:
    """Hermitian square root S of a PSD matrix, S @ S^H = X.

    Eigenvalues below zero are clamped; an error is raised when X is
    indefinite beyond dust (min eigenvalue < -1e-9 times the norm).
    """
    X = _square_complex(X, "X")
    X = 0.5 * (X + X.conj().T)
    vals, vecs = np.linalg.eigh(X)
    scale = max(float(vals[-1]), 0.0)
    if vals[0] < -1e-9 * max(scale, 1.0):
        raise ValueError("X is substantially indefinite")
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T
