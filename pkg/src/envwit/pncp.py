"""Positive-but-not-completely-positive maps stored as coefficient tensors.

A map ``L: M_{d_in} -> M_{d_out}`` is held as ``coeffs[m, l, i, j] =
<f_m| L(|e_i><e_j|) |f_l>`` so that ``L(X)[m, l] = sum_ij coeffs[m,l,i,j] X[i,j]``.
PnCP maps have no completely-positive factorization, so the dense tensor is
the representation of record.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .matcore import DEFAULT_TOL, BipartiteDims, Tolerance, as_matrix

__all__ = [
    "PositiveMapTensor",
    "ChoiParams",
    "PncpReport",
    "apply",
    "adjoint",
    "choi_matrix",
    "transposition_map",
    "reduction_map",
    "generalized_choi",
    "theta_params",
    "validate_pncp",
    "witness_via_choi",
]


@dataclass(frozen=True, eq=False)
class PositiveMapTensor:
    d_in: int
    d_out: int
    coeffs: np.ndarray
    name: str = ""

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.d_out, self.d_out, self.d_in, self.d_in):
            raise DimensionMismatch(f"coefficient tensor has shape {c.shape}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def is_hermiticity_preserving(self, tol: float = 1e-12) -> bool:
        c = self.coeffs
        return bool(np.abs(c - c.transpose(1, 0, 3, 2).conj()).max() <= tol)

    def __call__(self, x) -> np.ndarray:
        return apply(self, x)


@dataclass(frozen=True)
class ChoiParams:
    """Parameters of the generalized Choi map; the normalization
    ``1/(a+b+c)`` is deliberately left out."""

    a: float
    b: float
    c: float

    def swapped(self) -> "ChoiParams":
        return ChoiParams(self.a, self.c, self.b)


@dataclass(frozen=True)
class PncpReport:
    valid: bool
    indecomposable: bool
    optimal: bool


def apply(lam: PositiveMapTensor, x) -> np.ndarray:
    x = as_matrix(x)
    if x.shape != (lam.d_in, lam.d_in):
        raise DimensionMismatch(f"input is {x.shape}, map expects {lam.d_in}x{lam.d_in}")
    return np.einsum("mlij,ij->ml", lam.coeffs, x)


def adjoint(lam: PositiveMapTensor) -> PositiveMapTensor:
    """Hilbert-Schmidt adjoint: ``tr(A^dag L(B)) = tr(L^dag(A)^dag B)``."""
    return PositiveMapTensor(
        lam.d_out, lam.d_in, lam.coeffs.transpose(2, 3, 0, 1).conj(),
        name=f"adjoint({lam.name})" if lam.name else "",
    )


def choi_matrix(lam: PositiveMapTensor) -> np.ndarray:
    """``sum_ij |i><j| (x) L(|i><j|)``."""
    d_in, d_out = lam.d_in, lam.d_out
    c = lam.coeffs  # (m, l, i, j) -> row (i, m), col (j, l)
    return c.transpose(2, 0, 3, 1).reshape(d_in * d_out, d_in * d_out)


def transposition_map(d: int) -> PositiveMapTensor:
    eye = np.eye(d)
    c = np.einsum("mj,li->mlij", eye, eye)
    return PositiveMapTensor(d, d, c, name="transposition")


def reduction_map(d: int) -> PositiveMapTensor:
    """``X -> I tr(X) - X``."""
    eye = np.eye(d)
    c = np.einsum("ml,ij->mlij", eye, eye) - np.einsum("mi,lj->mlij", eye, eye)
    return PositiveMapTensor(d, d, c, name="reduction")


def generalized_choi(params: ChoiParams) -> PositiveMapTensor:
    """Qutrit map: output diagonal ``m`` collects input diagonal ``i`` with
    weight ``a, b, c`` for ``(i - m) mod 3 = 0, 1, 2``; off-diagonals negate."""
    w = (params.a, params.b, params.c)
    c = np.zeros((3, 3, 3, 3), dtype=complex)
    for m in range(3):
        for i in range(3):
            c[m, m, i, i] = w[(i - m) % 3]
        for l in range(3):
            if l != m:
                c[m, l, m, l] = -1.0
    return PositiveMapTensor(3, 3, c, name=f"choi[{params.a:.6g},{params.b:.6g},{params.c:.6g}]")


def theta_params(theta: float) -> ChoiParams:
    """Point on the optimal boundary ``a + b + c = 2``."""
    ct, st = np.cos(theta), np.sin(theta)
    r3 = np.sqrt(3.0)
    return ChoiParams(
        2 / 3 * (1 + ct),
        2 / 3 * (1 - ct / 2 - st * r3 / 2),
        2 / 3 * (1 - ct / 2 + st * r3 / 2),
    )


def validate_pncp(params: ChoiParams, tol: Tolerance = DEFAULT_TOL) -> PncpReport:
    """Classify ``Phi[a,b,c]``.

    PnCP iff ``0 <= a < 2``, ``a+b+c >= 2`` and (``a <= 1`` implies
    ``bc >= (1-a)^2``); indecomposable when additionally ``bc < (2-a)^2/4``;
    optimal on ``a+b+c = 2``.  Non-strict comparisons get ``det_tol`` slack.
    """
    a, b, c = params.a, params.b, params.c
    eps = tol.det_tol
    valid = (
        -eps <= a < 2
        and a + b + c >= 2 - eps
        and (a > 1 + eps or b * c >= (1 - a) ** 2 - eps)
    )
    indecomposable = valid and b * c < (2 - a) ** 2 / 4 - eps
    optimal = valid and abs(a + b + c - 2) <= eps
    return PncpReport(bool(valid), bool(indecomposable), bool(optimal))


def witness_via_choi(lam: PositiveMapTensor, psi):
    """``(I (x) L^dagger)|psi><psi|`` applied blockwise, as a ``WitnessOperator``.

    ``psi`` lives on ``C^{d_a} (x) C^{d_out}``; the result acts on
    ``C^{d_a} (x) C^{d_in}``.
    """
    amps = np.asarray(getattr(psi, "amplitudes", psi), dtype=complex).reshape(-1)
    if amps.size % lam.d_out:
        raise DimensionMismatch("state dimension is not a multiple of the map's output dimension")
    d_a = amps.size // lam.d_out
    cm = amps.reshape(d_a, lam.d_out)
    # blocks M_{ik}[j, l] = psi_{ij} conj(psi_{kl}); L^dag(M)[s, t] = sum conj(c[j,l,s,t]) M[j,l]
    blocks = np.einsum("ij,kl->ikjl", cm, cm.conj())
    out = np.einsum("jlst,ikjl->iskt", lam.coeffs.conj(), blocks)
    from .witness import WitnessOperator  # witness imports this module

    return WitnessOperator(BipartiteDims(d_a, lam.d_in), out.reshape(d_a * lam.d_in, d_a * lam.d_in), f"via {lam.name}")
