import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_unitary
from envwit.errors import BadGamma, BadMixingParameter, BadWeights, NotAState, NotNormalized, NotUnitary
from envwit.ensembles import haar_pure, hs_density
from envwit.matcore import BipartiteDims, partial_transpose
from envwit.measure import pauli
from envwit.states import (
    BellDiagonalCoords,
    DensityMatrix,
    PureState,
    SchmidtWeights,
    amplitude_damped,
    bell,
    bell_diagonal,
    conjugate_local,
    density_from_dict,
    density_from_pure,
    density_to_dict,
    max_entangled,
    minimal_measurement_state,
    pseudo_pure,
    read_density_json,
    schmidt_decompose,
    write_density_json,
)

Q2 = BipartiteDims(2, 2)
S = 1 / np.sqrt(2)


def test_density_matrix_invariants():
    with pytest.raises(NotAState):
        DensityMatrix(Q2, np.diag([1.0, 1, 0, 0]))
    with pytest.raises(NotAState):
        DensityMatrix(Q2, np.diag([1.1, -0.1, 0, 0]))
    rho = DensityMatrix(Q2, np.eye(4) / 4)
    assert rho.trace == pytest.approx(1.0)
    with pytest.raises(ValueError):
        rho.mat[0, 0] = 1


def test_pure_state_norm():
    with pytest.raises(NotNormalized):
        PureState(Q2, [1, 1, 0, 0])
    assert np.allclose(PureState.normalized(Q2, [1, 1, 0, 0]).amplitudes, [S, S, 0, 0])


def test_schmidt_weights_validation():
    with pytest.raises(BadWeights):
        SchmidtWeights([0.5, 0.6])
    with pytest.raises(BadWeights):
        SchmidtWeights([1.5, -0.5])
    assert SchmidtWeights.uniform(3).k == 3


def test_density_from_pure(rng):
    assert np.allclose(density_from_pure(PureState(Q2, [1, 0, 0, 0])).mat, np.diag([1, 0, 0, 0]))
    phi = density_from_pure(bell("phi+")).mat
    ref = np.zeros((4, 4))
    ref[np.ix_([0, 3], [0, 3])] = 0.5
    assert np.allclose(phi, ref)
    for _ in range(10):
        r = density_from_pure(haar_pure(BipartiteDims(3, 2), rng)).mat
        assert abs(np.trace(r @ r) - 1) < 1e-12


def test_bell_states():
    assert np.allclose(bell("phi+").amplitudes, [S, 0, 0, S])
    assert np.allclose(bell("psi-").amplitudes, [0, S, -S, 0])
    flip = np.kron(np.eye(2), pauli("x"))
    assert np.allclose(flip @ bell("psi+").amplitudes, bell("phi+").amplitudes)
    assert np.allclose(flip @ bell("psi-").amplitudes, bell("phi-").amplitudes)
    with pytest.raises(ValueError):
        bell("chi")


def test_max_entangled():
    assert np.allclose(max_entangled(2).amplitudes, bell("phi+").amplitudes)
    v = max_entangled(3).amplitudes
    assert np.allclose(v[[0, 4, 8]], 1 / np.sqrt(3)) and np.count_nonzero(v) == 3
    r = density_from_pure(max_entangled(3)).mat.reshape(3, 3, 3, 3)
    assert np.allclose(np.einsum("ijkj->ik", r), np.eye(3) / 3)


def test_bell_diagonal():
    assert np.allclose(bell_diagonal(BellDiagonalCoords((0.25,) * 4)).mat, np.eye(4) / 4)
    assert np.allclose(bell_diagonal(BellDiagonalCoords((1, 0, 0, 0))).mat, density_from_pure(bell("phi+")).mat)
    half = bell_diagonal(BellDiagonalCoords((0.5, 0.5, 0, 0))).mat
    ref = 0.5 * (density_from_pure(bell("phi+")).mat + density_from_pure(bell("psi+")).mat)
    assert np.allclose(half, ref)
    with pytest.raises(NotAState):
        bell_diagonal(BellDiagonalCoords((1.1, -0.1, 0, 0)))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_bell_coords_round_trip(seed):
    p = np.random.default_rng(seed).dirichlet(np.ones(4))
    c = BellDiagonalCoords(tuple(p))
    back = BellDiagonalCoords.from_xyz(*c.xyz)
    assert np.allclose(back.p, p, atol=1e-12)
    # sigma_y (x) sigma_y expectation is -y
    yy = np.kron(pauli("y"), pauli("y"))
    assert abs(np.trace(yy @ bell_diagonal(c).mat).real + c.xyz[1]) < 1e-12


def test_schmidt_examples():
    f = schmidt_decompose(PureState(Q2, [1, 0, 0, 0]))
    assert f.weights.k == 1 and np.allclose(f.weights.p, [1])
    f = schmidt_decompose(bell("phi+"))
    assert f.weights.k == 2 and np.allclose(f.weights.p, [0.5, 0.5])
    a = 0.8
    b = np.sqrt(1 - a * a)
    f = schmidt_decompose(minimal_measurement_state(1, a))
    assert np.allclose(f.weights.p, [(a + b) ** 2 / 2, (a - b) ** 2 / 2])


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 4), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_schmidt_reconstruction(da, db, seed):
    psi = haar_pure(BipartiteDims(da, db), np.random.default_rng(seed))
    f = schmidt_decompose(psi)
    assert abs(f.weights.p.sum() - 1) < 1e-12
    assert np.abs(f.reconstruct() - psi.amplitudes).max() < 1e-10
    u = f.left_basis
    first = u[np.argmax(np.abs(u) > 1e-12, axis=0), np.arange(u.shape[1])]
    assert np.allclose(first.imag, 0) and np.all(first.real > 0)


def _basis_set(cols):
    return {tuple(np.round(c * np.exp(-1j * np.angle(c[np.argmax(np.abs(c) > 1e-9)])), 10)) for c in cols.T}


def test_six_family_schmidt_forms():
    a = 0.9
    b = np.sqrt(1 - a * a)
    z = np.eye(2)
    x = np.array([[1, 1], [1, -1]]) * S
    y = np.array([[1, 1], [1j, -1j]]) * S
    allowed = _basis_set(z) | _basis_set(x) | _basis_set(y)
    for fam in range(1, 7):
        f = schmidt_decompose(minimal_measurement_state(fam, a, b))
        assert np.allclose(sorted(f.weights.p), sorted([(a + b) ** 2 / 2, (a - b) ** 2 / 2]))
        assert _basis_set(f.left_basis) <= allowed
        assert _basis_set(f.right_basis) <= allowed


def test_pseudo_pure(rng):
    psi = haar_pure(BipartiteDims(3, 3), rng)
    assert np.allclose(pseudo_pure(psi, 0).mat, np.eye(9) / 9)
    assert np.allclose(pseudo_pure(psi, 1).mat, np.outer(psi.amplitudes, psi.amplitudes.conj()))
    r = pseudo_pure(psi, 0.37).mat
    assert abs(np.trace(r) - 1) < 1e-12 and np.linalg.eigvalsh(r)[0] > -1e-12
    with pytest.raises(BadMixingParameter):
        pseudo_pure(psi, 1.2)


def test_amplitude_damped():
    assert np.allclose(amplitude_damped(0).mat, density_from_pure(bell("phi+")).mat)
    assert np.allclose(amplitude_damped(1).mat, np.diag([0.5, 0, 0.5, 0]))
    r = amplitude_damped(0.5).mat
    assert r[0, 3].real == pytest.approx(np.sqrt(0.5) / 2)
    assert r[2, 2].real == pytest.approx(0.25)
    with pytest.raises(BadGamma):
        amplitude_damped(-0.1)


def test_amplitude_damped_pt_sign_change():
    for g in np.arange(0, 1.0, 0.1):
        ev = np.linalg.eigvalsh(partial_transpose(amplitude_damped(g).mat, Q2))
        assert np.sum(ev < -1e-9) == 1
    assert np.linalg.eigvalsh(partial_transpose(amplitude_damped(1.0).mat, Q2))[0] > -1e-9


def test_conjugate_local(rng):
    rho = hs_density(Q2, rng)
    assert np.allclose(conjugate_local(rho, np.eye(2), np.eye(2)).mat, rho.mat)
    for sgn in ("+", "-"):
        psi = density_from_pure(bell("psi" + sgn))
        assert np.allclose(conjugate_local(psi, np.eye(2), pauli("x")).mat, density_from_pure(bell("phi" + sgn)).mat)
    u, v = random_unitary(2, rng), random_unitary(2, rng)
    assert np.allclose(np.linalg.eigvalsh(conjugate_local(rho, u, v).mat), np.linalg.eigvalsh(rho.mat))
    with pytest.raises(NotUnitary):
        conjugate_local(rho, 2 * np.eye(2), np.eye(2))


def test_density_json_round_trip(tmp_path, rng):
    rho = hs_density(BipartiteDims(2, 3), rng)
    path = tmp_path / "rho.json"
    write_density_json(rho, path)
    back = read_density_json(path)
    assert back.dims == rho.dims and np.array_equal(back.mat, rho.mat)
    d = density_to_dict(rho)
    assert set(d) == {"d_a", "d_b", "re", "im"}
    json.dumps(d)
    assert np.array_equal(density_from_dict(d).mat, rho.mat)
