"""Seeded random matrices, unitaries, pure states and density-matrix ensembles.

Every sampler takes either an :class:`RngStream` (a value: the same stream
always yields the same draws) or a live ``numpy.random.Generator`` (draws
advance its state).  Batched ``*_batch`` variants return raw arrays for the
Monte-Carlo loops; the scalar variants wrap them and return validated
objects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matcore import DEFAULT_TOL, BipartiteDims, Tolerance, partial_transpose
from .states import DensityMatrix, PureState

__all__ = [
    "RngStream",
    "as_generator",
    "ginibre",
    "ginibre_batch",
    "haar_unitary",
    "haar_unitary_batch",
    "haar_pure",
    "haar_pure_batch",
    "hs_density",
    "hs_density_batch",
    "bures_density",
    "bures_density_batch",
    "random_separable",
    "random_separable_batch",
    "pseudo_pure_batch",
    "bell_diagonal_batch",
    "npt_filter",
]


@dataclass(frozen=True)
class RngStream:
    """A reproducible substream: ``(seed, stream_id)`` fixes every draw.

    Backed by PCG64 seeded through ``SeedSequence(seed, spawn_key=(stream_id,))``,
    so distinct stream ids give independent substreams without coordination.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def ginibre_batch(n: int, d: int, rng, cols: int | None = None) -> np.ndarray:
    """``n`` complex Gaussian matrices; Re and Im parts have variance 1/2."""
    gen = as_generator(rng)
    shape = (n, d, d if cols is None else cols)
    z = gen.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2)


def ginibre(d: int, rng) -> np.ndarray:
    if d < 1:
        raise ValueError("dimension must be positive")
    return ginibre_batch(1, d, rng)[0]


def haar_unitary_batch(n: int, d: int, rng) -> np.ndarray:
    """Haar unitaries from QR of Ginibre matrices with R's diagonal phases divided out."""
    z = ginibre_batch(n, d, rng)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    ph = diag / np.abs(diag)
    return q * ph[:, None, :]


def haar_unitary(d: int, rng) -> np.ndarray:
    if d < 1:
        raise ValueError("dimension must be positive")
    return haar_unitary_batch(1, d, rng)[0]


def haar_pure_batch(n: int, dim: int, rng) -> np.ndarray:
    gen = as_generator(rng)
    z = gen.standard_normal((n, dim, 2))
    v = z[..., 0] + 1j * z[..., 1]
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def haar_pure(dims: BipartiteDims, rng) -> PureState:
    return PureState(dims, haar_pure_batch(1, dims.total, rng)[0])


def _normalize_gram(h: np.ndarray) -> np.ndarray:
    rho = h @ np.conj(np.swapaxes(h, -1, -2))
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    rho /= tr[:, None, None]
    # exact Hermitian symmetry keeps downstream eigensolvers on the symmetric path
    return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))


def hs_density_batch(n: int, dims: BipartiteDims, rng) -> np.ndarray:
    """Hilbert-Schmidt states ``XX^dagger / tr(XX^dagger)`` with Ginibre ``X``."""
    return _normalize_gram(ginibre_batch(n, dims.total, rng))


def hs_density(dims: BipartiteDims, rng) -> DensityMatrix:
    return DensityMatrix(dims, hs_density_batch(1, dims, rng)[0])


def bures_density_batch(n: int, dims: BipartiteDims, rng, unitary: np.ndarray | None = None) -> np.ndarray:
    """Bures states ``(I+U)HH^dagger(I+U)^dagger / tr[...]``.

    ``unitary`` replaces the Haar draw (test hook); when given, only ``H`` is
    drawn from the stream.
    """
    gen = as_generator(rng)
    d = dims.total
    h = ginibre_batch(n, d, gen)
    u = haar_unitary_batch(n, d, gen) if unitary is None else np.broadcast_to(unitary, (n, d, d))
    return _normalize_gram((np.eye(d) + u) @ h)


def bures_density(dims: BipartiteDims, rng, unitary: np.ndarray | None = None) -> DensityMatrix:
    return DensityMatrix(dims, bures_density_batch(1, dims, rng, unitary=unitary)[0])


def random_separable_batch(n: int, dims: BipartiteDims, terms: int, rng) -> np.ndarray:
    """Mixtures of ``terms`` random pure product states with Dirichlet(1) weights."""
    if terms < 1:
        raise ValueError("need at least one product term")
    gen = as_generator(rng)
    q = gen.dirichlet(np.ones(terms), size=n)
    a = haar_pure_batch(n * terms, dims.d_a, gen).reshape(n, terms, dims.d_a)
    b = haar_pure_batch(n * terms, dims.d_b, gen).reshape(n, terms, dims.d_b)
    ab = (a[..., :, None] * b[..., None, :]).reshape(n, terms, dims.total)
    rho = np.einsum("nt,nti,ntj->nij", q, ab, ab.conj())
    return 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))


def random_separable(dims: BipartiteDims, terms: int, rng) -> DensityMatrix:
    return DensityMatrix(dims, random_separable_batch(1, dims, terms, rng)[0])


def pseudo_pure_batch(n: int, rng, dims: BipartiteDims = BipartiteDims(3, 3)) -> tuple[np.ndarray, np.ndarray]:
    """States ``p|psi><psi| + (1-p) I / D`` with Haar ``psi`` and uniform ``p``.

    Returns ``(rhos, p)``.
    """
    gen = as_generator(rng)
    d = dims.total
    psi = haar_pure_batch(n, d, gen)
    p = gen.uniform(0.0, 1.0, size=n)
    rho = p[:, None, None] * np.einsum("ni,nj->nij", psi, psi.conj())
    rho += ((1 - p) / d)[:, None, None] * np.eye(d)
    return rho, p


def bell_diagonal_batch(n: int, rng) -> np.ndarray:
    """Uniform (Dirichlet(1)) weight vectors on the Bell tetrahedron, shape ``(n, 4)``."""
    return as_generator(rng).dirichlet(np.ones(4), size=n)


def npt_filter(rho, tol: Tolerance = DEFAULT_TOL, dims: BipartiteDims | None = None) -> bool:
    """True iff the partial transpose has an eigenvalue below ``-eig_tol``."""
    m = np.asarray(getattr(rho, "mat", rho))
    dims = dims or getattr(rho, "dims", None) or BipartiteDims.infer(m.shape[0])
    return bool(np.linalg.eigvalsh(partial_transpose(m, dims))[0] < -tol.eig_tol)
