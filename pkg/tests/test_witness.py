import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_unitary
from envwit.ensembles import RngStream, hs_density, random_separable_batch
from envwit.errors import DimensionMismatch, NotUnitary
from envwit.matcore import BipartiteDims, partial_transpose
from envwit.pncp import (
    ChoiParams,
    adjoint,
    generalized_choi,
    reduction_map,
    theta_params,
    transposition_map,
)
from envwit.states import (
    BellDiagonalCoords,
    SchmidtWeights,
    bell,
    bell_diagonal,
    conjugate_local,
    density_from_pure,
    max_entangled,
    minimal_measurement_state,
)
from envwit.witness import (
    DeltaMatrix,
    choi_closed_form_witness,
    delta_choi,
    delta_lambda,
    delta_t,
    envelope_tangency,
    expectation,
    family_bases,
    family_delta,
    family_witness,
    map_family_witness,
    minor_hierarchy,
    qutrit_delta_t,
    schmidt_family_witness,
)

Q2, Q3 = BipartiteDims(2, 2), BipartiteDims(3, 3)


def _proj(kind):
    return density_from_pure(bell(kind)).mat


def _bell_mix(x):
    return x * _proj("psi+") + (1 - x) * _proj("psi-")


def _swap(d):
    s = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            s[i * d + j, j * d + i] = 1
    return s


# ---- linear witnesses


def test_schmidt_family_witness_examples(rng):
    w = schmidt_family_witness(SchmidtWeights([0.5, 0.5]))
    assert np.allclose(w.mat, _swap(2) / 2)
    assert np.allclose(w.mat, partial_transpose(_proj("phi+"), Q2))
    e, f = random_unitary(3, rng), random_unitary(3, rng)
    w1 = schmidt_family_witness(SchmidtWeights([1.0]), e, f)
    v = np.kron(e[:, 0], f[:, 0])
    assert np.allclose(w1.mat, np.outer(v, v.conj()))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_schmidt_family_witness_is_pt_of_pure(d, seed):
    rng = np.random.default_rng(seed)
    p = SchmidtWeights(rng.dirichlet(np.ones(d)))
    e, f = random_unitary(d, rng), random_unitary(d, rng)
    amps = sum(np.sqrt(p.p[i]) * np.kron(e[:, i], f[:, i]) for i in range(d))
    ref = partial_transpose(np.outer(amps, amps.conj()), BipartiteDims(d, d))
    # W_T(p; E, F) uses the conjugate B basis of the Schmidt form
    assert np.abs(schmidt_family_witness(p, e, f.conj()).mat - ref).max() < 1e-12


def test_map_family_witness_examples(rng):
    p = SchmidtWeights(rng.dirichlet(np.ones(3)))
    e, ep = random_unitary(3, rng), random_unitary(3, rng)
    wt = map_family_witness(p, transposition_map(3), e, ep)
    assert np.allclose(wt.mat, schmidt_family_witness(p, e, ep.conj()).mat, atol=1e-12)
    wr = map_family_witness(SchmidtWeights.uniform(3), reduction_map(3))
    phi = density_from_pure(max_entangled(3)).mat
    assert np.allclose(wr.mat, np.eye(9) / 3 - phi, atol=1e-12)


def test_family_witnesses_are_pt_of_family_states():
    for fam in range(1, 7):
        for a in (0.1, 0.5, 0.9):
            psi = minimal_measurement_state(fam, a)
            assert np.allclose(family_witness(fam, a).mat,
                               partial_transpose(np.outer(psi.amplitudes, psi.amplitudes.conj()), Q2))


def test_choi_closed_form_examples():
    w = choi_closed_form_witness(ChoiParams(0, 1, 1))
    assert np.allclose(w.mat, np.eye(9) / 3 - density_from_pure(max_entangled(3)).mat)
    for a, b, c in [(1.0, 1.0, 0.0), (0.4, 0.7, 1.3)]:
        w = choi_closed_form_witness(ChoiParams(a, b, c)).mat
        assert w[0, 0].real == pytest.approx(a / 3)
        # tr D = 3(a + b + c + 1), so tr W = a + b + c
        assert np.trace(w).real == pytest.approx(a + b + c)


def test_expectation_examples():
    wp = partial_transpose(_proj("phi+"), Q2)
    wm = partial_transpose(_proj("phi-"), Q2)
    for x in (0.0, 0.3, 1.0):
        assert expectation(wp, _bell_mix(x)) == pytest.approx(x - 0.5, abs=1e-14)
        assert expectation(wm, _bell_mix(x)) == pytest.approx(0.5 - x, abs=1e-14)
    w = choi_closed_form_witness(ChoiParams(0.4, 0.7, 1.3))
    assert expectation(w, np.eye(9) / 9) == pytest.approx(np.trace(w.mat).real / 9)
    with pytest.raises(DimensionMismatch):
        expectation(w, np.eye(4) / 4)


# ---- Delta matrices


def test_delta_t_examples():
    for x in (0.0, 0.25, 1.0):
        d = delta_t(_bell_mix(x))
        h = (2 * x - 1) / 2
        assert np.allclose(d.entries, [[0, h], [h, 0]], atol=1e-15)
        assert d.det == pytest.approx(-(2 * x - 1) ** 2 / 4, abs=1e-15)
    assert np.allclose(delta_t(np.eye(4) / 4).entries, np.eye(2) / 4)
    flip = np.array([[0, 1], [1, 0]])
    for x in (0.0, 0.6):
        sigma = x * _proj("phi+") + (1 - x) * _proj("phi-")
        assert delta_t(sigma, np.eye(2), flip).det == pytest.approx(-(2 * x - 1) ** 2 / 4, abs=1e-15)
        assert family_delta(sigma, 2).det == pytest.approx(-(2 * x - 1) ** 2 / 4, abs=1e-15)
    with pytest.raises(NotUnitary):
        delta_t(np.eye(4) / 4, 2 * np.eye(2))


def test_qutrit_delta_t(rng):
    assert np.allclose(qutrit_delta_t(np.eye(9) / 9).entries, np.eye(3) / 9)
    rho = hs_density(Q3, rng)
    assert np.abs(qutrit_delta_t(rho).entries - delta_t(rho).entries).max() < 1e-12
    assert qutrit_delta_t(rho).entries[0, 1] == pytest.approx(rho.mat[1, 3].real)
    with pytest.raises(DimensionMismatch):
        qutrit_delta_t(np.eye(4) / 4)


def test_delta_lambda_matches_delta_t_and_choi(rng):
    for _ in range(200):
        rho = hs_density(Q3, rng)
        assert np.abs(delta_lambda(rho, transposition_map(3)).entries - delta_t(rho).entries).max() < 1e-12
    for _ in range(20):
        rho = hs_density(Q3, rng)
        p = ChoiParams(*rng.uniform(0, 2, 3))
        got = delta_lambda(rho, adjoint(generalized_choi(p))).entries
        assert np.abs(got - delta_choi(rho, p).entries).max() < 1e-12
    with pytest.raises(DimensionMismatch):
        delta_lambda(np.eye(4) / 4, reduction_map(3))


def test_delta_choi_examples():
    p = ChoiParams(0.4, 0.7, 1.3)
    assert np.allclose(delta_choi(np.eye(9) / 9, p).entries, (p.a + p.b + p.c) / 9 * np.eye(3))
    phi = density_from_pure(max_entangled(3)).mat
    for a in (0.0, 0.5, 1.7):
        d = delta_choi(phi, ChoiParams(a, 0.3, 0.9))
        assert np.allclose(d.entries, ((a + 1) * np.eye(3) - np.ones((3, 3))) / 3)
        assert d.det == pytest.approx((a - 2) * (a + 1) ** 2 / 27)
    assert delta_choi(phi, ChoiParams(0, 1, 1)).det == pytest.approx(-2 / 27)


# ---- quadratic identity and covariance


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_quadratic_identity_transposition(d, seed):
    rng = np.random.default_rng(seed)
    rho = hs_density(BipartiteDims(d, d), rng)
    p = SchmidtWeights(rng.dirichlet(np.ones(d)))
    e, f = random_unitary(d, rng), random_unitary(d, rng)
    lhs = expectation(schmidt_family_witness(p, e, f), rho)
    assert abs(lhs - delta_t(rho, e, f).quadratic_form(p)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["reduction2", "reduction3", "choi0", "choi1", "choi2"]), st.integers(0, 2**32 - 1))
def test_quadratic_identity_maps(name, seed):
    rng = np.random.default_rng(seed)
    if name.startswith("reduction"):
        lam = reduction_map(int(name[-1]))
    else:
        lam = generalized_choi(theta_params(rng.uniform(0, 2 * np.pi)))
    d = lam.d_in
    rho = hs_density(BipartiteDims(d, d), rng)
    p = SchmidtWeights(rng.dirichlet(np.ones(d)))
    e, ep = random_unitary(d, rng), random_unitary(d, rng)
    lhs = expectation(map_family_witness(p, lam, e, ep), rho)
    assert abs(lhs - delta_lambda(rho, lam, e, ep).quadratic_form(p)) < 1e-10


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_basis_covariance(d, seed):
    rng = np.random.default_rng(seed)
    rho = hs_density(BipartiteDims(d, d), rng)
    e, f, u, v = (random_unitary(d, rng) for _ in range(4))
    lhs = delta_t(rho, u @ e, v @ f).entries
    rhs = delta_t(conjugate_local(rho, u, v), e, f).entries
    assert np.abs(lhs - rhs).max() < 1e-12


def test_family_quadratic_identity(rng):
    # tr(W_i rho) = c^T Delta c with the signed Schmidt coefficients c of psi_i
    for fam in range(1, 7):
        e, f_conj = family_bases(fam)
        f = f_conj.conj()
        for _ in range(20):
            rho = hs_density(Q2, rng)
            a = rng.uniform(0, 1)
            b = np.sqrt(1 - a * a)
            amps = minimal_measurement_state(fam, a, b).amplitudes
            c = np.array([np.vdot(np.kron(e[:, i], f[:, i]), amps) for i in range(2)])
            assert np.allclose(np.abs(c) ** 2, [(a + b) ** 2 / 2, (a - b) ** 2 / 2])
            assert np.allclose(c.imag, 0, atol=1e-12)
            c = c.real
            lhs = expectation(family_witness(fam, a), rho)
            assert abs(lhs - c @ family_delta(rho, fam).entries @ c) < 1e-12


# ---- separability and detection


def test_separable_delta_psd():
    rhos = random_separable_batch(2000, Q3, 4, RngStream(41))
    maps = [reduction_map(3)] + [generalized_choi(theta_params(t)) for t in (0, np.pi / 2, np.pi)]
    for r in rhos:
        assert delta_t(r).min_eigenvalue >= -1e-9
        for lam in maps:
            assert delta_lambda(r, lam).min_eigenvalue >= -1e-9
        assert not minor_hierarchy(delta_t(r)).detected


def test_minor_hierarchy_examples():
    v = minor_hierarchy(DeltaMatrix(np.diag([1.0, -1.0])))
    assert [s for s, _ in v.violating_minors] == [(1,), (0, 1)]
    assert not v.psd and v.detected
    v = minor_hierarchy(DeltaMatrix(np.eye(3)))
    assert v.psd and not v.violating_minors


def test_minor_hierarchy_embedded_qubit_block():
    # psi- placed in the (0, 1) block of two qutrits
    amps = np.zeros(9, complex)
    amps[1], amps[3] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    rho = 0.8 * np.outer(amps, amps) + 0.2 * np.eye(9) / 9
    d = delta_t(rho)
    v = minor_hierarchy(d)
    subsets = [s for s, _ in v.violating_minors]
    assert (0, 1) in subsets
    f01 = rho[0, 0].real * rho[4, 4].real - rho[1, 3].real ** 2
    val = dict(v.violating_minors)[(0, 1)]
    assert val == pytest.approx(f01)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 3), st.integers(0, 2**32 - 1))
def test_detection_dominance(d, seed):
    rng = np.random.default_rng(seed)
    rho = hs_density(BipartiteDims(d, d), rng)
    e, f = random_unitary(d, rng), random_unitary(d, rng)
    verdict = minor_hierarchy(delta_t(rho, e, f))
    for _ in range(20):
        p = SchmidtWeights(rng.dirichlet(np.ones(d) * 0.5))
        if expectation(schmidt_family_witness(p, e, f), rho) < -1e-10:
            assert verdict.detected


def test_bell_diagonal_factorization(rng):
    for _ in range(200):
        p = rng.dirichlet(np.ones(4))
        rho = bell_diagonal(BellDiagonalCoords(tuple(p)))
        lam = 0.5 - p  # lambda_i = <b_i|rho^Gamma|b_i>, b = (psi-, phi-, phi+, psi+)
        assert family_delta(rho, 1).det == pytest.approx(lam[1] * lam[2], abs=1e-12)
        assert family_delta(rho, 2).det == pytest.approx(lam[0] * lam[3], abs=1e-12)


# ---- envelope


def _bisect_to_envelope(rho_ent, noise, fn, steps=200):
    lo, hi = 0.0, 1.0  # fn(mix(lo)) >= 0, fn(mix(hi)) < 0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if fn(mid * rho_ent + (1 - mid) * noise) >= 0:
            lo = mid
        else:
            hi = mid
    return lo * rho_ent + (1 - lo) * noise


def test_envelope_tangency():
    d0 = delta_t(_bell_mix(0.5))
    p = envelope_tangency(_bell_mix(0.5), d0)
    assert p is not None
    assert abs(expectation(schmidt_family_witness(p), _bell_mix(0.5))) < 1e-12
    assert envelope_tangency(np.eye(4) / 4, delta_t(np.eye(4) / 4)) is None
    rng = RngStream(42).generator()
    for _ in range(5):
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        ent = 0.6 * _proj("psi-") + 0.4 * np.outer(psi, psi.conj()) / np.vdot(psi, psi).real
        rho = _bisect_to_envelope(ent, np.eye(4) / 4, lambda r: delta_t(r).min_eigenvalue)
        dl = delta_t(rho)
        p = envelope_tangency(rho, dl)
        if p is None:
            continue  # mixed-sign kernel: no family member is tangent
        assert abs(dl.det) < 1e-12
        assert abs(expectation(schmidt_family_witness(p), rho)) < 1e-9
