"""Dense complex-matrix substrate and the bipartite index algebra.

Composite index convention: the basis ket ``|e_i, f_j>`` of ``A (x) B`` sits at
row ``i * d_b + j``.  Every other module relies on this single convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import (
    BadIndexSet,
    DimensionMismatch,
    NotHermitian,
    NotTracePreserving,
)

__all__ = [
    "BipartiteDims",
    "Tolerance",
    "DEFAULT_TOL",
    "as_matrix",
    "kron",
    "dagger",
    "check_hermitian",
    "hermitian_eigenvalues",
    "determinant",
    "principal_submatrix",
    "principal_subsets",
    "is_psd",
    "partial_transpose",
    "apply_kraus_on_b",
    "is_unitary",
]


@dataclass(frozen=True)
class BipartiteDims:
    """Dimensions of the two subsystems of ``H_A (x) H_B``."""

    d_a: int
    d_b: int

    def __post_init__(self):
        if int(self.d_a) < 2 or int(self.d_b) < 2:
            raise DimensionMismatch(f"subsystem dimensions must be >= 2, got {self.d_a}x{self.d_b}")

    @property
    def total(self) -> int:
        return self.d_a * self.d_b

    @property
    def k(self) -> int:
        """Maximal Schmidt rank, i.e. the size of the Delta matrices."""
        return min(self.d_a, self.d_b)

    def index(self, i: int, j: int) -> int:
        return i * self.d_b + j

    @classmethod
    def square(cls, d: int) -> "BipartiteDims":
        return cls(d, d)

    @classmethod
    def infer(cls, n: int) -> "BipartiteDims":
        """Guess equal subsystem dimensions from a composite dimension."""
        d = int(round(np.sqrt(n)))
        if d * d != n:
            raise DimensionMismatch(f"cannot infer equal subsystem dims from size {n}")
        return cls(d, d)


@dataclass(frozen=True)
class Tolerance:
    """Numerical slack used by verdicts.

    ``eig_tol`` is absolute but scaled by ``max(1, spectral norm)`` wherever a
    matrix scale is available; ``det_tol`` is the one-sided threshold below
    which a determinant counts as negative.
    """

    eig_tol: float = 1e-9
    det_tol: float = 1e-10

    def __post_init__(self):
        if not (self.eig_tol > 0 and self.det_tol > 0):
            raise ValueError("tolerances must be strictly positive")


DEFAULT_TOL = Tolerance()


def as_matrix(a) -> np.ndarray:
    """Return ``a`` as a 2-d complex array with finite entries."""
    m = np.asarray(getattr(a, "mat", a), dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def dagger(a) -> np.ndarray:
    return as_matrix(a).conj().T


def _scale(h: np.ndarray) -> float:
    return max(1.0, float(np.abs(h).max(initial=0.0)))


def check_hermitian(h, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got {h.shape}")
    dev = np.abs(h - h.conj().T).max(initial=0.0)
    if dev > tol.eig_tol * _scale(h):
        raise NotHermitian(f"max |h - h^dagger| = {dev:.3e} exceeds eig_tol")
    return h


def hermitian_eigenvalues(h, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Ascending eigenvalues via the LAPACK Hermitian driver."""
    h = check_hermitian(h, tol)
    return np.linalg.eigvalsh(h)


def determinant(h, tol: Tolerance = DEFAULT_TOL) -> float:
    h = check_hermitian(h, tol)
    if h.shape[0] == 0:
        return 1.0
    det = complex(np.linalg.det(h))
    scale = max(1.0, abs(det))
    if abs(det.imag) > tol.eig_tol * scale:
        raise NotHermitian(f"determinant has imaginary residue {det.imag:.3e}")
    return det.real


def principal_submatrix(h, idx: Sequence[int]) -> np.ndarray:
    h = np.asarray(getattr(h, "entries", getattr(h, "mat", h)))
    idx = [int(i) for i in idx]
    n = h.shape[0]
    if not idx:
        raise BadIndexSet("index set is empty")
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise BadIndexSet(f"indices must be strictly increasing: {idx}")
    if idx[0] < 0 or idx[-1] >= n:
        raise BadIndexSet(f"indices {idx} out of range for size {n}")
    return h[np.ix_(idx, idx)]


def principal_subsets(k: int) -> list[tuple[int, ...]]:
    """All non-empty index subsets, ordered by size then lexicographically."""
    return [s for r in range(1, k + 1) for s in combinations(range(k), r)]


def is_psd(h, tol: Tolerance = DEFAULT_TOL) -> bool:
    ev = hermitian_eigenvalues(h, tol)
    scale = max(1.0, float(np.abs(ev).max(initial=0.0)))
    return bool(ev[0] >= -tol.eig_tol * scale)


def partial_transpose(rho, dims: BipartiteDims) -> np.ndarray:
    """Transpose on subsystem B: entry (ij,kl) <- entry (il,kj)."""
    m = as_matrix(rho)
    if m.shape != (dims.total, dims.total):
        raise DimensionMismatch(f"matrix shape {m.shape} does not match dims {dims.d_a}x{dims.d_b}")
    t = m.reshape(dims.d_a, dims.d_b, dims.d_a, dims.d_b)
    return t.transpose(0, 3, 2, 1).reshape(dims.total, dims.total)


def apply_kraus_on_b(rho, kraus: Sequence, dims: BipartiteDims, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Apply ``sum_k (I (x) K_k) rho (I (x) K_k)^dagger``."""
    m = as_matrix(rho)
    if m.shape != (dims.total, dims.total):
        raise DimensionMismatch(f"matrix shape {m.shape} does not match dims")
    ks = [as_matrix(k) for k in kraus]
    if any(k.shape != (dims.d_b, dims.d_b) for k in ks):
        raise DimensionMismatch("Kraus operators must act on subsystem B")
    completeness = sum(k.conj().T @ k for k in ks)
    if np.abs(completeness - np.eye(dims.d_b)).max() > tol.eig_tol:
        raise NotTracePreserving("sum of K^dagger K differs from identity")
    eye_a = np.eye(dims.d_a)
    out = np.zeros_like(m)
    for k in ks:
        big = np.kron(eye_a, k)
        out += big @ m @ big.conj().T
    return out


def is_unitary(u, tol: Tolerance = DEFAULT_TOL) -> bool:
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return bool(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() <= tol.eig_tol)
