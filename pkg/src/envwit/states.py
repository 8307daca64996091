"""Bipartite states used throughout: Bell states, Bell-diagonal mixtures,
amplitude-damped outputs, pseudo-pure qutrit states, and Schmidt forms.

Also holds the density-matrix JSON file format::

    {"d_a": 2, "d_b": 2, "re": [[...], ...], "im": [[...], ...]}
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    BadGamma,
    BadMixingParameter,
    BadWeights,
    DimensionMismatch,
    NotAState,
    NotHermitian,
    NotNormalized,
    NotUnitary,
)
from .matcore import (
    DEFAULT_TOL,
    BipartiteDims,
    Tolerance,
    apply_kraus_on_b,
    as_matrix,
    check_hermitian,
    is_unitary,
)

__all__ = [
    "DensityMatrix",
    "PureState",
    "SchmidtWeights",
    "SchmidtForm",
    "BellDiagonalCoords",
    "BELL_KINDS",
    "density_from_pure",
    "bell",
    "max_entangled",
    "bell_diagonal",
    "schmidt_decompose",
    "pseudo_pure",
    "amplitude_damped",
    "amplitude_damping_kraus",
    "conjugate_local",
    "minimal_measurement_state",
    "read_density_json",
    "write_density_json",
    "density_to_dict",
    "density_from_dict",
]

SCHMIDT_CUTOFF = 1e-12


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated bipartite density matrix.

    Construction checks Hermiticity, unit trace and positivity; pass
    ``check=False`` only for matrices that are valid by construction.
    """

    dims: BipartiteDims
    mat: np.ndarray
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = as_matrix(self.mat)
        if m.shape != (self.dims.total, self.dims.total):
            raise DimensionMismatch(f"matrix shape {m.shape} does not match dims {self.dims}")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)
        if self.check:
            validate_density(m)

    @classmethod
    def from_array(cls, mat, dims: BipartiteDims | None = None) -> "DensityMatrix":
        m = as_matrix(mat)
        return cls(dims or BipartiteDims.infer(m.shape[0]), m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.mat).real)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.mat, dtype=dtype)


def validate_density(m: np.ndarray, tol: Tolerance = DEFAULT_TOL) -> None:
    try:
        check_hermitian(m, tol)
    except NotHermitian as exc:
        raise NotAState(str(exc)) from exc
    tr = np.trace(m)
    if abs(tr - 1) > 1e-10:
        raise NotAState(f"trace is {tr.real:.12g}, expected 1")
    lo = np.linalg.eigvalsh(m)[0]
    if lo < -tol.eig_tol:
        raise NotAState(f"minimum eigenvalue {lo:.3e} is negative")


@dataclass(frozen=True, eq=False)
class PureState:
    dims: BipartiteDims
    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if v.shape[0] != self.dims.total:
            raise DimensionMismatch(f"{v.shape[0]} amplitudes for dims {self.dims}")
        if abs(np.linalg.norm(v) - 1) > 1e-12:
            raise NotNormalized(f"norm is {np.linalg.norm(v):.15g}")
        v.setflags(write=False)
        object.__setattr__(self, "amplitudes", v)

    @classmethod
    def normalized(cls, dims: BipartiteDims, amplitudes) -> "PureState":
        v = np.asarray(amplitudes, dtype=complex).reshape(-1)
        return cls(dims, v / np.linalg.norm(v))

    def coefficient_matrix(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims.d_a, self.dims.d_b)


@dataclass(frozen=True, eq=False)
class SchmidtWeights:
    """Squared Schmidt coefficients ``p``.

    Zeros are tolerated so that boundary kernel vectors can be represented;
    ``schmidt_decompose`` never produces them.
    """

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).reshape(-1)
        if p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
            raise BadWeights(f"weights must be non-negative and finite: {p}")
        if abs(p.sum() - 1) > 1e-12:
            raise BadWeights(f"weights sum to {p.sum():.15g}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @property
    def k(self) -> int:
        return self.p.size

    @property
    def sqrt(self) -> np.ndarray:
        """The vector of Schmidt coefficients ``(sqrt(p_1), ..., sqrt(p_k))``."""
        return np.sqrt(self.p)

    @classmethod
    def uniform(cls, k: int) -> "SchmidtWeights":
        return cls(np.full(k, 1.0 / k))


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    left_basis: np.ndarray
    right_basis: np.ndarray
    weights: SchmidtWeights

    def reconstruct(self) -> np.ndarray:
        k = self.weights.k
        amps = sum(
            np.sqrt(self.weights.p[i]) * np.kron(self.left_basis[:, i], self.right_basis[:, i])
            for i in range(k)
        )
        return np.asarray(amps)


@dataclass(frozen=True)
class BellDiagonalCoords:
    """Weights of ``p0 phi+ + p1 psi+ + p2 psi- + p3 phi-``.

    Probabilities are the source of truth; ``(x, y, z)`` are derived.
    """

    p: tuple[float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "p", tuple(float(v) for v in self.p))
        if len(self.p) != 4:
            raise ValueError("Bell-diagonal coordinates need four weights")

    @property
    def xyz(self) -> tuple[float, float, float]:
        p0, p1, p2, p3 = self.p
        return (p0 + p1 - p2 - p3, p0 - p1 + p2 - p3, p0 - p1 - p2 + p3)

    @classmethod
    def from_xyz(cls, x: float, y: float, z: float) -> "BellDiagonalCoords":
        return cls((
            (1 + x + y + z) / 4,
            (1 + x - y - z) / 4,
            (1 - x + y - z) / 4,
            (1 - x - y + z) / 4,
        ))


BELL_KINDS = ("phi+", "phi-", "psi+", "psi-")
_QUBITS = BipartiteDims(2, 2)


def density_from_pure(psi: PureState) -> DensityMatrix:
    v = psi.amplitudes
    if abs(np.linalg.norm(v) - 1) > 1e-12:
        raise NotNormalized("state is not normalized")
    return DensityMatrix(psi.dims, np.outer(v, v.conj()))


def bell(kind: str) -> PureState:
    s = 1 / np.sqrt(2)
    vecs = {
        "phi+": (s, 0, 0, s),
        "phi-": (s, 0, 0, -s),
        "psi+": (0, s, s, 0),
        "psi-": (0, s, -s, 0),
    }
    if kind not in vecs:
        raise ValueError(f"unknown Bell state {kind!r}; choose from {BELL_KINDS}")
    return PureState(_QUBITS, np.array(vecs[kind], dtype=complex))


def max_entangled(d: int) -> PureState:
    dims = BipartiteDims(d, d)
    v = np.zeros(d * d, dtype=complex)
    v[[i * d + i for i in range(d)]] = 1 / np.sqrt(d)
    return PureState(dims, v)


def bell_diagonal(coords: BellDiagonalCoords, tol: Tolerance = DEFAULT_TOL) -> DensityMatrix:
    p = np.array(coords.p)
    if np.any(p < -tol.eig_tol) or abs(p.sum() - 1) > 1e-12:
        raise NotAState(f"Bell weights {coords.p} are not a probability vector")
    p0, p1, p2, p3 = coords.p
    m = 0.5 * np.array([
        [p0 + p3, 0, 0, p0 - p3],
        [0, p1 + p2, p1 - p2, 0],
        [0, p1 - p2, p1 + p2, 0],
        [p0 - p3, 0, 0, p0 + p3],
    ], dtype=complex)
    return DensityMatrix(_QUBITS, m)


def _phase_fix(u: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Phases that make the first non-negligible entry of each column real positive."""
    phases = np.ones(u.shape[1], dtype=complex)
    for c in range(u.shape[1]):
        nz = np.flatnonzero(np.abs(u[:, c]) > tol)
        if nz.size:
            z = u[nz[0], c]
            phases[c] = z / abs(z)
    return phases


def schmidt_decompose(psi: PureState) -> SchmidtForm:
    """Schmidt form via SVD of the ``d_a x d_b`` coefficient matrix."""
    if abs(np.linalg.norm(psi.amplitudes) - 1) > 1e-12:
        raise NotNormalized("state is not normalized")
    u, s, vh = np.linalg.svd(psi.coefficient_matrix(), full_matrices=True)
    v = vh.T  # columns are the right Schmidt kets
    ph = _phase_fix(u)
    u = u / ph
    v = v.copy()
    r = s.size
    v[:, :r] *= ph[:r]
    p = s**2
    keep = int(np.count_nonzero(p > SCHMIDT_CUTOFF))
    p = p[:keep] / p[:keep].sum()
    return SchmidtForm(u, v, SchmidtWeights(p))


def pseudo_pure(psi: PureState, p: float) -> DensityMatrix:
    if psi.dims != BipartiteDims(3, 3):
        raise DimensionMismatch("pseudo-pure family is defined for two qutrits")
    if not 0 <= p <= 1:
        raise BadMixingParameter(f"mixing parameter {p} outside [0, 1]")
    v = psi.amplitudes
    return DensityMatrix(psi.dims, p * np.outer(v, v.conj()) + (1 - p) / 9 * np.eye(9))


def amplitude_damping_kraus(gamma: float) -> list[np.ndarray]:
    if not 0 <= gamma <= 1:
        raise BadGamma(f"damping rate {gamma} outside [0, 1]")
    a0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    a1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return [a0, a1]


def amplitude_damped(gamma: float) -> DensityMatrix:
    """``(I (x) E_gamma)|phi+><phi+|`` for the amplitude-damping channel."""
    kraus = amplitude_damping_kraus(gamma)
    phi = density_from_pure(bell("phi+"))
    return DensityMatrix(_QUBITS, apply_kraus_on_b(phi.mat, kraus, _QUBITS))


def conjugate_local(rho: DensityMatrix, u, v, tol: Tolerance = DEFAULT_TOL) -> DensityMatrix:
    """``(U^dagger (x) V^dagger) rho (U (x) V)``."""
    u = as_matrix(u)
    v = as_matrix(v)
    if u.shape != (rho.dims.d_a,) * 2 or v.shape != (rho.dims.d_b,) * 2:
        raise DimensionMismatch("local unitaries do not match subsystem dims")
    if not (is_unitary(u, tol) and is_unitary(v, tol)):
        raise NotUnitary("local transformation is not unitary")
    big = np.kron(u, v)
    return DensityMatrix(rho.dims, big.conj().T @ rho.mat @ big, check=False)


def minimal_measurement_state(family: int, a: float, b: float | None = None) -> PureState:
    """The six two-qubit families ``a|.> + b|.>`` whose witnesses need only
    ``sigma_a (x) sigma_a`` settings."""
    if b is None:
        b = np.sqrt(max(0.0, 1 - a * a))
    B = {k: bell(k).amplitudes for k in BELL_KINDS}
    combos = {
        1: a * B["phi+"] + b * B["phi-"],
        2: a * B["psi+"] + b * B["psi-"],
        3: a * B["phi+"] + b * B["psi+"],
        4: a * B["phi-"] + b * B["psi-"],
        5: a * B["phi+"] + 1j * b * B["psi-"],
        6: a * B["phi-"] + 1j * b * B["psi+"],
    }
    if family not in combos:
        raise ValueError(f"family must be 1..6, got {family}")
    return PureState.normalized(_QUBITS, combos[family])


def density_to_dict(rho: DensityMatrix) -> dict:
    return {
        "d_a": rho.dims.d_a,
        "d_b": rho.dims.d_b,
        "re": rho.mat.real.tolist(),
        "im": rho.mat.imag.tolist(),
    }


def density_from_dict(obj: dict) -> DensityMatrix:
    try:
        dims = BipartiteDims(int(obj["d_a"]), int(obj["d_b"]))
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise NotAState(f"malformed density-matrix record: {exc}") from exc
    if re.shape != im.shape or re.shape != (dims.total, dims.total):
        raise DimensionMismatch(f"re/im shapes {re.shape}/{im.shape} do not match dims")
    return DensityMatrix(dims, re + 1j * im)


def read_density_json(path: str | Path) -> DensityMatrix:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise NotAState(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise NotAState(f"{path}: expected a JSON object")
    return density_from_dict(obj)


def write_density_json(rho: DensityMatrix, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(density_to_dict(rho), fh)
