"""Local operator bases and reconstruction of Delta entries from
expectation values of product observables.

Within a block ``(i, j)`` of a qudit the embedded Pauli operators are

    X_ij = |i><j| + |j><i|,  Y_ij = -i(|i><j| - |j><i|),  Z_ij = |i><i| - |j><j|,

and ``P_ij = |i><i| + |j><j|`` plays the role of the identity.  The 2x2 block
of ``Delta_T`` follows from

    rho_ii,ii  = 1/4 <(P+Z) (x) (P+Z)>
    rho_jj,jj  = 1/4 <(P-Z) (x) (P-Z)>
    Re rho_ij,ji = 1/4 <X (x) X + Y (x) Y>

so only the three settings ``X(x)X, Y(x)Y, Z(x)Z`` are needed; the ``P``
terms come from marginalizing the ``Z(x)Z`` statistics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import BadIndices, DimensionMismatch, NotHermitian, UnknownFamily
from .matcore import DEFAULT_TOL, BipartiteDims, Tolerance, as_matrix, check_hermitian
from .witness import DeltaMatrix, _basis, _rho, family_bases

__all__ = [
    "LocalObservable",
    "MeasurementPlan",
    "pauli",
    "embedded_ops",
    "block_identity",
    "expectation_local",
    "delta_from_expectations",
    "measurement_plan",
]

_PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis: str) -> np.ndarray:
    key = str(axis).lower()
    if key not in _PAULI:
        raise ValueError(f"unknown Pauli axis {axis!r}")
    return _PAULI[key].copy()


def embedded_ops(i: int, j: int, d: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if not (0 <= i < j < d):
        raise BadIndices(f"need 0 <= i < j < d, got i={i}, j={j}, d={d}")
    x = np.zeros((d, d), dtype=complex)
    y = np.zeros((d, d), dtype=complex)
    z = np.zeros((d, d), dtype=complex)
    x[i, j] = x[j, i] = 1
    y[i, j], y[j, i] = -1j, 1j
    z[i, i], z[j, j] = 1, -1
    return x, y, z


def block_identity(i: int, j: int, d: int) -> np.ndarray:
    if not (0 <= i < j < d):
        raise BadIndices(f"need 0 <= i < j < d, got i={i}, j={j}, d={d}")
    p = np.zeros((d, d), dtype=complex)
    p[i, i] = p[j, j] = 1
    return p


@dataclass(frozen=True, eq=False)
class LocalObservable:
    a_op: np.ndarray
    b_op: np.ndarray
    label: str = ""

    def __post_init__(self):
        try:
            check_hermitian(self.a_op)
            check_hermitian(self.b_op)
        except NotHermitian as exc:
            raise NotHermitian(f"{self.label or 'observable'}: local factor not Hermitian") from exc

    @property
    def matrix(self) -> np.ndarray:
        return np.kron(as_matrix(self.a_op), as_matrix(self.b_op))


def expectation_local(rho, obs: LocalObservable, tol: Tolerance = DEFAULT_TOL) -> float:
    m, dims = _rho(rho)
    a, b = as_matrix(obs.a_op), as_matrix(obs.b_op)
    if a.shape != (dims.d_a, dims.d_a) or b.shape != (dims.d_b, dims.d_b):
        raise DimensionMismatch("observable does not match subsystem dims")
    r = m.reshape(dims.d_a, dims.d_b, dims.d_a, dims.d_b)
    val = complex(np.einsum("ik,jl,klij->", a, b, r))
    if abs(val.imag) > tol.eig_tol:
        raise NotHermitian(f"expectation has imaginary part {val.imag:.3e}")
    return val.real


# Linear combinations of local products (coefficient, A-name, B-name) giving
# the Delta block entries; names refer to the embedded operators P, X, Y, Z.
_RECONSTRUCTION = {
    "ii": [(0.25, "P", "P"), (0.25, "P", "Z"), (0.25, "Z", "P"), (0.25, "Z", "Z")],
    "jj": [(0.25, "P", "P"), (-0.25, "P", "Z"), (-0.25, "Z", "P"), (0.25, "Z", "Z")],
    "ij": [(0.25, "X", "X"), (0.25, "Y", "Y")],
}
_SETTING_OF = {"P": "Z", "Z": "Z", "X": "X", "Y": "Y"}


def _local_ops(i: int, j: int, d: int, basis: np.ndarray) -> dict[str, np.ndarray]:
    x, y, z = embedded_ops(i, j, d)
    ops = {"P": block_identity(i, j, d), "X": x, "Y": y, "Z": z}
    return {k: basis @ v @ basis.conj().T for k, v in ops.items()}


def _name(op: np.ndarray, i: int, j: int, d: int) -> str:
    """Label ``op`` as a signed embedded Pauli when it is one."""
    x, y, z = embedded_ops(i, j, d)
    for nm, ref in (("X", x), ("Y", y), ("Z", z), ("P", block_identity(i, j, d))):
        for sign, tag in ((1, ""), (-1, "-")):
            if np.allclose(op, sign * ref, atol=1e-12):
                return f"{tag}{nm}{i}{j}" if d > 2 else f"{tag}{'I' if nm == 'P' else nm}"
    return "U"


@dataclass(frozen=True, eq=False)
class MeasurementPlan:
    """Settings and the linear map from their statistics to a Delta block."""

    dims: BipartiteDims
    block: tuple[int, int]
    observables: list[LocalObservable]
    reconstruction: dict[str, list[tuple[float, str, str]]] = field(default_factory=dict)
    e_basis: np.ndarray | None = None
    f_basis: np.ndarray | None = None
    kind: str = ""

    def _ops(self):
        i, j = self.block
        e = _basis(self.e_basis, self.dims.d_a)
        f = _basis(self.f_basis, self.dims.d_b)
        return _local_ops(i, j, self.dims.d_a, e), _local_ops(i, j, self.dims.d_b, f)

    def terms(self) -> list[LocalObservable]:
        """Every product term used by the reconstruction."""
        oa, ob = self._ops()
        seen = {}
        for combo in self.reconstruction.values():
            for _, na, nb in combo:
                seen.setdefault((na, nb), LocalObservable(oa[na], ob[nb], f"{na}(x){nb}"))
        return list(seen.values())

    def evaluate(self, rho) -> DeltaMatrix:
        oa, ob = self._ops()
        vals = {}
        for key, combo in self.reconstruction.items():
            vals[key] = sum(
                c * expectation_local(rho, LocalObservable(oa[na], ob[nb])) for c, na, nb in combo
            )
        ent = np.array([[vals["ii"], vals["ij"]], [vals["ij"], vals["jj"]]])
        return DeltaMatrix(ent, f"measured/{self.kind}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "dims": [self.dims.d_a, self.dims.d_b],
            "block": list(self.block),
            "observables": [
                {
                    "label": o.label,
                    "a": {"re": o.a_op.real.tolist(), "im": o.a_op.imag.tolist()},
                    "b": {"re": o.b_op.real.tolist(), "im": o.b_op.imag.tolist()},
                }
                for o in self.observables
            ],
            "reconstruction": {k: [list(t) for t in v] for k, v in self.reconstruction.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _plan(dims: BipartiteDims, block, e_basis, f_basis, kind: str) -> MeasurementPlan:
    i, j = block
    if not (0 <= i < j < dims.k):
        raise BadIndices(f"block {block} invalid for dims {dims}")
    e = _basis(e_basis, dims.d_a)
    f = _basis(f_basis, dims.d_b)
    oa = _local_ops(i, j, dims.d_a, e)
    ob = _local_ops(i, j, dims.d_b, f)
    obs = [
        LocalObservable(
            oa[s], ob[s],
            f"{_name(oa[s], i, j, dims.d_a)}(x){_name(ob[s], i, j, dims.d_b)}",
        )
        for s in ("X", "Y", "Z")
    ]
    return MeasurementPlan(dims, (i, j), obs, {k: list(v) for k, v in _RECONSTRUCTION.items()}, e, f, kind)


def measurement_plan(kind, dims: BipartiteDims = BipartiteDims(2, 2)) -> MeasurementPlan:
    """Plan for a witness family.

    ``kind`` is ``"family1"`` .. ``"family6"`` (two qubits, the family's
    Schmidt bases) or a block ``(i, j)`` / ``"block(i,j)"`` of ``Delta_T`` in
    the computational basis.
    """
    if isinstance(kind, int) or (isinstance(kind, str) and kind.startswith("family")):
        try:
            fam = int(str(kind).removeprefix("family"))
        except ValueError:
            raise UnknownFamily(f"unknown witness family {kind!r}") from None
        if fam not in range(1, 7):
            raise UnknownFamily(f"unknown witness family {kind!r}")
        if dims != BipartiteDims(2, 2):
            raise DimensionMismatch("the six minimal-measurement families are two-qubit")
        e, f = family_bases(fam)
        return _plan(dims, (0, 1), e, f, f"family{fam}")
    if isinstance(kind, str) and kind.startswith("block"):
        try:
            inner = kind[kind.index("(") + 1: kind.index(")")]
            kind = tuple(int(t) for t in inner.split(","))
        except ValueError:
            raise UnknownFamily(f"cannot parse block {kind!r}") from None
    if isinstance(kind, tuple) and len(kind) == 2:
        return _plan(dims, kind, None, None, f"block({kind[0]},{kind[1]})")
    raise UnknownFamily(f"unknown witness family {kind!r}")


def delta_from_expectations(rho, block: tuple[int, int] = (0, 1), e_basis=None, f_basis=None) -> DeltaMatrix:
    """2x2 block of ``Delta_T`` rebuilt only from local product expectations."""
    _, dims = _rho(rho)
    return _plan(dims, block, e_basis, f_basis, f"block({block[0]},{block[1]})").evaluate(rho)
