"""Linear witness families, the Delta matrices, and detection verdicts.

For a fixed pair of Schmidt bases the linear witnesses ``W(p)`` form a
family of hyperplanes ``tr(W(p) rho) = p^T Delta(rho) p``; their envelope is
``det Delta(rho) = 0`` and any negative principal minor of ``Delta``
certifies entanglement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NotHermitian, NotUnitary
from .matcore import (
    DEFAULT_TOL,
    BipartiteDims,
    Tolerance,
    as_matrix,
    check_hermitian,
    is_unitary,
    partial_transpose,
    principal_submatrix,
    principal_subsets,
)
from .pncp import ChoiParams, PositiveMapTensor, adjoint
from .states import SchmidtWeights, max_entangled, minimal_measurement_state

__all__ = [
    "WitnessOperator",
    "DeltaMatrix",
    "DetectionVerdict",
    "FAMILY_SCHMIDT_BASES",
    "family_bases",
    "family_witness",
    "family_delta",
    "schmidt_family_witness",
    "map_family_witness",
    "choi_closed_form_witness",
    "choi_diagonal_operator",
    "expectation",
    "delta_t",
    "delta_lambda",
    "delta_choi",
    "qutrit_delta_t",
    "minor_hierarchy",
    "envelope_tangency",
]


@dataclass(frozen=True, eq=False)
class WitnessOperator:
    dims: BipartiteDims
    mat: np.ndarray
    label: str = ""

    def __post_init__(self):
        m = check_hermitian(self.mat)
        if m.shape != (self.dims.total, self.dims.total):
            raise DimensionMismatch(f"witness shape {m.shape} does not match dims {self.dims}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)


@dataclass(frozen=True, eq=False)
class DeltaMatrix:
    """Real symmetric ``k x k`` matrix; ``provenance`` names its construction."""

    entries: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise DimensionMismatch(f"Delta must be square, got {e.shape}")
        e = e.copy()
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def k(self) -> int:
        return self.entries.shape[0]

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.entries)) if self.k else 1.0

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def quadratic_form(self, p: SchmidtWeights) -> float:
        s = p.sqrt
        return float(s @ self.entries[: s.size, : s.size] @ s)


@dataclass(frozen=True)
class DetectionVerdict:
    psd: bool
    min_eigenvalue: float
    violating_minors: list[tuple[tuple[int, ...], float]] = field(default_factory=list)

    @property
    def detected(self) -> bool:
        return bool(self.violating_minors)


def _rho(rho, dims: BipartiteDims | None = None) -> tuple[np.ndarray, BipartiteDims]:
    m = as_matrix(rho)
    dims = dims or getattr(rho, "dims", None) or BipartiteDims.infer(m.shape[0])
    if m.shape != (dims.total, dims.total):
        raise DimensionMismatch(f"state shape {m.shape} does not match dims {dims}")
    return m, dims


def _basis(u, d: int, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    if u is None:
        return np.eye(d, dtype=complex)
    u = as_matrix(u)
    if u.shape != (d, d):
        raise DimensionMismatch(f"basis is {u.shape}, expected {d}x{d}")
    if not is_unitary(u, tol):
        raise NotUnitary("basis matrix is not unitary")
    return u


# Six two-qubit families reachable with sigma_a (x) sigma_a settings, listed as
# their Schmidt bases (columns).  Transposition acts in the computational
# basis, so the B-side basis entering W_T(p) / Delta_T is the complex
# conjugate of the Schmidt basis; family_bases() applies that.
_s = 1 / np.sqrt(2)
_Z = {"+": np.array([1, 0], complex), "-": np.array([0, 1], complex)}
_X = {"+": np.array([_s, _s], complex), "-": np.array([_s, -_s], complex)}
_Y = {"+": np.array([_s, 1j * _s], complex), "-": np.array([_s, -1j * _s], complex)}


def _cols(*vs):
    return np.stack(vs, axis=1)


FAMILY_SCHMIDT_BASES = {
    1: (_cols(_Z["+"], _Z["-"]), _cols(_Z["+"], _Z["-"])),
    2: (_cols(_Z["+"], _Z["-"]), _cols(_Z["-"], _Z["+"])),
    3: (_cols(_X["+"], _X["-"]), _cols(_X["+"], _X["-"])),
    4: (_cols(_X["-"], _X["+"]), _cols(_X["+"], _X["-"])),
    5: (_cols(_Y["-"], _Y["+"]), _cols(_Y["+"], _Y["-"])),
    6: (_cols(_Y["+"], _Y["-"]), _cols(_Y["+"], _Y["-"])),
}


def family_bases(family: int) -> tuple[np.ndarray, np.ndarray]:
    """``(E, F)`` with ``W_T(p; E, F) = |psi_family(p)><psi_family(p)|^Gamma``."""
    if family not in FAMILY_SCHMIDT_BASES:
        raise ValueError(f"family must be 1..6, got {family}")
    e, f = FAMILY_SCHMIDT_BASES[family]
    return e, f.conj()


def family_witness(family: int, a: float, b: float | None = None) -> WitnessOperator:
    """``|psi_i><psi_i|^Gamma`` for the two-qubit family ``i`` at amplitude ``a``."""
    psi = minimal_measurement_state(family, a, b)
    v = psi.amplitudes
    return WitnessOperator(psi.dims, partial_transpose(np.outer(v, v.conj()), psi.dims), f"W{family}(a={a:g})")


def family_delta(rho, family: int) -> DeltaMatrix:
    e, f = family_bases(family)
    d = delta_t(rho, e, f)
    return DeltaMatrix(d.entries, f"T/family{family}")


def schmidt_family_witness(p: SchmidtWeights, e_basis=None, f_basis=None, dims: BipartiteDims | None = None) -> WitnessOperator:
    """``sum_ij sqrt(p_i p_j) |e_i, f_j><e_j, f_i|``."""
    if dims is None:
        da = as_matrix(e_basis).shape[0] if e_basis is not None else None
        db = as_matrix(f_basis).shape[0] if f_basis is not None else None
        da = da or db or max(p.k, 2)
        dims = BipartiteDims(da, db or da)
    if p.k > dims.k:
        raise DimensionMismatch(f"{p.k} Schmidt weights exceed rank bound {dims.k}")
    e = _basis(e_basis, dims.d_a)[:, : p.k]
    f = _basis(f_basis, dims.d_b)[:, : p.k]
    s = p.sqrt
    kets = np.einsum("ai,bj->ijab", e, f).reshape(p.k, p.k, dims.total)
    w = np.einsum("i,j,ijx,jiy->xy", s, s, kets, kets.conj())
    return WitnessOperator(dims, w, "W_T(p)")


def _adjoint_in_basis(lam: PositiveMapTensor, e_prime: np.ndarray) -> np.ndarray:
    """``out[m, l, j, i] = <m| L^dag(|e'_j><e'_i|) |l>``."""
    adj = adjoint(lam).coeffs  # (d_in, d_in, d_out, d_out)
    return np.einsum("mlab,aj,bi->mlji", adj, e_prime, e_prime.conj())


def map_family_witness(p: SchmidtWeights, lam: PositiveMapTensor, e_basis=None, e_prime_basis=None) -> WitnessOperator:
    """``sum_ij sqrt(p_i p_j) |e_i><e_j| (x) L^dag(|e'_i><e'_j|)``."""
    d_a = as_matrix(e_basis).shape[0] if e_basis is not None else lam.d_out
    dims = BipartiteDims(d_a, lam.d_in)
    k = p.k
    if k > min(d_a, lam.d_out):
        raise DimensionMismatch(f"{k} Schmidt weights exceed rank bound")
    e = _basis(e_basis, d_a)[:, :k]
    ep = _basis(e_prime_basis, lam.d_out)[:, :k]
    adj = _adjoint_in_basis(lam, ep)  # [m, l, j, i] for pair (e'_j, e'_i)
    s = p.sqrt
    # blocks B_ij = L^dag(|e'_i><e'_j|) = adj[:, :, i, j]
    w = np.einsum("i,j,xi,yj,stij->xsyt", s, s, e, e.conj(), adj)
    return WitnessOperator(dims, w.reshape(dims.total, dims.total), f"W_{lam.name}(p)")


def choi_diagonal_operator(params: ChoiParams) -> np.ndarray:
    """``D[a,b,c] = sum_i |i><i| (x) [(a+1)|i><i| + b|i+1><i+1| + c|i+2><i+2|]``."""
    d = np.zeros(9)
    for i in range(3):
        d[3 * i + i] = params.a + 1
        d[3 * i + (i + 1) % 3] = params.b
        d[3 * i + (i + 2) % 3] = params.c
    return np.diag(d).astype(complex)


def choi_closed_form_witness(params: ChoiParams) -> WitnessOperator:
    """``W[a,b,c] = D[a,b,c]/3 - |phi3+><phi3+|``."""
    v = max_entangled(3).amplitudes
    w = choi_diagonal_operator(params) / 3 - np.outer(v, v.conj())
    return WitnessOperator(BipartiteDims(3, 3), w, f"W[{params.a:g},{params.b:g},{params.c:g}]")


def expectation(w, rho, tol: Tolerance = DEFAULT_TOL) -> float:
    wm = as_matrix(w)
    m, _ = _rho(rho, getattr(w, "dims", None))
    if wm.shape != m.shape:
        raise DimensionMismatch(f"witness {wm.shape} vs state {m.shape}")
    val = complex(np.sum(wm * m.T))
    if abs(val.imag) > tol.eig_tol:
        raise NotHermitian(f"tr(W rho) has imaginary part {val.imag:.3e}")
    return val.real


def delta_t(rho, e_basis=None, f_basis=None, dims: BipartiteDims | None = None) -> DeltaMatrix:
    """``Delta[i, j] = Re <e_i f_j| rho |e_j f_i>``, symmetric by Hermiticity."""
    m, dims = _rho(rho, dims)
    e = _basis(e_basis, dims.d_a)
    f = _basis(f_basis, dims.d_b)
    if e_basis is not None or f_basis is not None:
        big = np.kron(e, f)
        m = big.conj().T @ m @ big
    k = dims.k
    i = np.arange(k)[:, None]
    j = np.arange(k)[None, :]
    raw = m[i * dims.d_b + j, j * dims.d_b + i]
    return DeltaMatrix(0.5 * (raw + raw.T).real, "T")


def qutrit_delta_t(rho) -> DeltaMatrix:
    """``Delta_T`` of a two-qutrit state in the computational basis."""
    m, dims = _rho(rho)
    if dims != BipartiteDims(3, 3):
        raise DimensionMismatch("expects a two-qutrit state")
    r = m.reshape(3, 3, 3, 3)
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            out[i, j] = r[i, j, j, i].real
    return DeltaMatrix(out, "T/qutrit")


def delta_lambda(rho, lam: PositiveMapTensor, e_basis=None, e_prime_basis=None, dims: BipartiteDims | None = None) -> DeltaMatrix:
    """``Delta[i, j] = sum_{l,m} Re(rho[(i,l),(j,m)] * L^dag[m, l, j, i])``."""
    m, dims = _rho(rho, dims)
    if dims.d_b != lam.d_in:
        raise DimensionMismatch(f"map acts on dimension {lam.d_in}, subsystem B has {dims.d_b}")
    k = min(dims.d_a, lam.d_out)
    e = _basis(e_basis, dims.d_a)
    ep = _basis(e_prime_basis, lam.d_out)
    if e_basis is not None:
        big = np.kron(e, np.eye(dims.d_b))
        m = big.conj().T @ m @ big
    adj = _adjoint_in_basis(lam, ep)[:, :, :k, :k]
    r = m.reshape(dims.d_a, dims.d_b, dims.d_a, dims.d_b)[:k, :, :k, :]
    raw = np.einsum("iljm,mlji->ij", r, adj).real
    return DeltaMatrix(0.5 * (raw + raw.T), f"Lambda/{lam.name}")


def delta_choi(rho, params: ChoiParams) -> DeltaMatrix:
    """Closed-form 3x3 matrix for the generalized Choi family (indices mod 3)."""
    m, dims = _rho(rho)
    if dims != BipartiteDims(3, 3):
        raise DimensionMismatch("expects a two-qutrit state")
    r = m.reshape(3, 3, 3, 3)
    out = np.empty((3, 3))
    for i in range(3):
        out[i, i] = (
            params.a * r[i, i, i, i].real
            + params.b * r[i, (i - 1) % 3, i, (i - 1) % 3].real
            + params.c * r[i, (i - 2) % 3, i, (i - 2) % 3].real
        )
        for j in range(3):
            if j != i:
                out[i, j] = -r[i, i, j, j].real
    return DeltaMatrix(out, f"Choi[{params.a:g},{params.b:g},{params.c:g}]")


def minor_hierarchy(delta, tol: Tolerance = DEFAULT_TOL) -> DetectionVerdict:
    """Principal-minor verdict.

    All ``2^k - 1`` principal minors for ``k <= 3``; leading minors beyond.
    A minor counts as violating only below ``-det_tol``.
    """
    d = np.asarray(getattr(delta, "entries", delta), dtype=float)
    k = d.shape[0]
    subsets = principal_subsets(k) if k <= 3 else [tuple(range(r)) for r in range(1, k + 1)]
    bad = []
    for s in subsets:
        val = float(np.linalg.det(principal_submatrix(d, s)))
        if val < -tol.det_tol:
            bad.append((s, val))
    ev = np.linalg.eigvalsh(d)
    scale = max(1.0, float(np.abs(ev).max(initial=0.0)))
    psd = bool(ev[0] >= -tol.eig_tol * scale) and not bad
    return DetectionVerdict(psd, float(ev[0]), bad)


def envelope_tangency(rho, delta, tol: Tolerance = DEFAULT_TOL, clamp: float = 1e-8) -> SchmidtWeights | None:
    """Schmidt weights of the family member tangent at ``rho``, if any.

    Requires ``delta`` PSD with a (numerically) zero eigenvalue whose
    eigenvector is sign-definite; returns its squared entries.
    """
    d = np.asarray(getattr(delta, "entries", delta), dtype=float)
    ev, vecs = np.linalg.eigh(d)
    scale = max(1.0, float(np.abs(ev).max(initial=0.0)))
    if ev[0] < -tol.eig_tol * scale or ev[0] > tol.eig_tol * scale:
        return None
    v = vecs[:, 0]
    if v.sum() < 0:
        v = -v
    if np.any(v < -clamp):
        return None
    v = np.where(v < 0, 0.0, v)
    p = v**2
    return SchmidtWeights(p / p.sum())
