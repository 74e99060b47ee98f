import json

import numpy as np
import pytest

from quditspt.core import QuditError
from quditspt.statevector import (MeasBasis, StateVector, basis_vectors, fidelity_up_to_phase,
                                  fourier_q, new_plus_state, omega, pauli_x, pauli_z, plus_vec,
                                  s_perm, zxk_alphas)


def random_state(d, n, rng):
    v = rng.normal(size=d**n) + 1j * rng.normal(size=d**n)
    return StateVector.from_vector(d, v)


@pytest.mark.parametrize("d,n", [(2, 1), (3, 1), (3, 2)])
def test_new_plus_state(d, n):
    s = new_plus_state(d, n)
    assert np.allclose(s.vector(), d ** (-n / 2))


def test_cap_enforced():
    with pytest.raises(QuditError, match="cap"):
        new_plus_state(5, 9)
    assert new_plus_state(3, 9, cap=3**9).n == 9


def test_cz_examples():
    s = StateVector.basis(2, [1, 1]).apply_cz_pow(1, 0, 1)
    assert np.isclose(s.vector()[3], -1)
    s = StateVector.basis(3, [1, 2]).apply_cz_pow(2, 0, 1)
    assert np.isclose(s.vector()[5], omega(3))
    p = new_plus_state(3, 2)
    assert fidelity_up_to_phase(p.apply_cz_pow(0, 0, 1), p) == pytest.approx(1)
    with pytest.raises(QuditError):
        p.apply_cz_pow(1, 0, 0)


def test_ccz_examples():
    s = StateVector.basis(2, [1, 1, 1]).apply_ccz_pow(1, 0, 1, 2)
    assert np.isclose(s.vector()[7], -1)
    s = StateVector.basis(3, [1, 2, 2]).apply_ccz_pow(1, 0, 1, 2)
    assert np.isclose(s.vector()[1 * 9 + 2 * 3 + 2], omega(3))
    with pytest.raises(QuditError):
        s.apply_ccz_pow(1, 0, 1, 1)


@pytest.mark.parametrize("d", [3, 5])
def test_ccz_symmetric_and_norm_preserving(d):
    rng = np.random.default_rng(1)
    s = random_state(d, 3, rng)
    ref = s.apply_ccz_pow(2, 0, 1, 2)
    assert abs(ref.norm() - 1) < 1e-10
    for perm in [(0, 2, 1), (1, 0, 2), (2, 1, 0), (1, 2, 0)]:
        out = s.apply_ccz_pow(2, *perm)
        assert np.allclose(out.vector(), ref.vector(), atol=1e-12)


@pytest.mark.parametrize("d", [3, 5])
def test_ccz_conjugation_identity(d):
    k = 2
    r = np.arange(d)
    ccz = np.diag(omega(d) ** ((k * np.einsum("i,j,k->ijk", r, r, r)) % d).reshape(-1))
    cz = np.diag(omega(d) ** ((k * np.outer(r, r)) % d).reshape(-1))
    xa = np.kron(pauli_x(d), np.eye(d * d))
    lhs = ccz.conj().T @ xa @ ccz
    rhs = np.kron(np.eye(d), cz) @ xa
    assert np.allclose(lhs, rhs, atol=1e-10)


@pytest.mark.parametrize("d", [3, 5, 7])
def test_s_commutation(d):
    for c in range(1, d):
        s = s_perm(d, c)
        assert np.allclose(s @ pauli_x(d), pauli_x(d, c) @ s)
        assert np.allclose(s @ pauli_z(d), pauli_z(d, pow(c, -1, d)) @ s)


def test_plus_conventions():
    d = 5
    for j in range(d):
        assert np.allclose(pauli_x(d) @ plus_vec(d, j), omega(d) ** j * plus_vec(d, j))
        assert np.allclose(pauli_z(d) @ plus_vec(d, j), plus_vec(d, j + 1))


@pytest.mark.parametrize("d", [3, 5, 7])
def test_zxk_eigenbasis(d):
    for k in range(1, d):
        cols = basis_vectors(MeasBasis.zxk(k), d)
        op = pauli_z(d) @ pauli_x(d, k)
        for m in range(d):
            assert np.allclose(op @ cols[:, m], omega(d) ** m * cols[:, m], atol=1e-10)
        assert zxk_alphas(k, d)[0] == 0


@pytest.mark.parametrize("basis", [MeasBasis.computational(), MeasBasis.fourier(), MeasBasis.zxk(2),
                                   MeasBasis.fq_dagger(3)])
def test_bases_orthonormal(basis):
    cols = basis_vectors(basis, 5)
    assert np.allclose(cols.conj().T @ cols, np.eye(5), atol=1e-10)


def test_fourier_computational_unbiased():
    d = 5
    f = basis_vectors(MeasBasis.fourier(), d)
    assert np.allclose(np.abs(f), 1 / np.sqrt(d))


def test_zxk_errors():
    with pytest.raises(QuditError):
        basis_vectors(MeasBasis.zxk(0), 3)
    with pytest.raises(QuditError):
        basis_vectors(MeasBasis.zxk(1), 2)


def test_eigenbasis_labels():
    d = 5
    op = pauli_z(d) @ pauli_x(d, 3)
    cols = MeasBasis.eigenbasis(op, d).vectors(d)
    for s in range(d):
        assert np.allclose(op @ cols[:, s], omega(d) ** s * cols[:, s], atol=1e-10)


def test_measure_examples():
    s = new_plus_state(3, 1)
    assert np.allclose(s.probabilities(0, MeasBasis.computational()), 1 / 3)
    r = StateVector.basis(3, [0]).measure(0, outcome=0)
    assert r.probability == pytest.approx(1)
    with pytest.raises(QuditError, match="zero probability"):
        StateVector.basis(3, [0]).measure(0, outcome=1)


def test_measure_cz_partner_collapses():
    d = 3
    s = new_plus_state(d, 2).apply_cz_pow(1, 0, 1)
    r = s.measure(0, MeasBasis.computational(), outcome=1, discard=True)
    # direct 9-amplitude computation: row k_a=1 of w^{k_a k_b}/3
    expected = np.array([omega(d) ** kb for kb in range(d)]) / np.sqrt(d)
    assert np.allclose(r.state.vector(), expected)
    assert np.allclose(expected, plus_vec(d, 1))
    assert r.probability == pytest.approx(1 / 3)


@pytest.mark.parametrize("basis", [MeasBasis.computational(), MeasBasis.fourier(), MeasBasis.zxk(1)])
def test_probabilities_sum_to_one(basis):
    s = random_state(3, 3, np.random.default_rng(4))
    for site in range(3):
        assert abs(s.probabilities(site, basis).sum() - 1) < 1e-10


def test_measure_sampled_is_seeded():
    s = random_state(3, 3, np.random.default_rng(5))
    a = [s.measure(1, MeasBasis.fourier(), rng=7).outcome for _ in range(3)]
    b = [s.measure(1, MeasBasis.fourier(), rng=7).outcome for _ in range(3)]
    assert a == b


def test_measure_keeps_site_when_not_discarded():
    s = random_state(3, 2, np.random.default_rng(6))
    r = s.measure(0, MeasBasis.fourier(), outcome=2)
    assert r.state.n == 2 and abs(r.state.norm() - 1) < 1e-10
    assert r.state.probabilities(0, MeasBasis.fourier())[2] == pytest.approx(1)


def test_fidelity_examples():
    rng = np.random.default_rng(0)
    s = random_state(3, 2, rng)
    assert fidelity_up_to_phase(s, s) == pytest.approx(1)
    t = StateVector(s.dim, s.amps * omega(3), s.labels)
    assert fidelity_up_to_phase(s, t) == pytest.approx(1)
    assert fidelity_up_to_phase(StateVector.basis(3, [0]), StateVector.basis(3, [1])) == pytest.approx(0)
    with pytest.raises(QuditError):
        fidelity_up_to_phase(s, new_plus_state(3, 1))


def test_fq_is_fourier_times_s():
    d = 5
    f = basis_vectors(MeasBasis.fq_dagger(1), d).conj().T
    for q in range(1, d):
        assert np.allclose(fourier_q(d, q), f @ s_perm(d, q))


def test_apply_general_operator_matches_kron():
    d = 3
    rng = np.random.default_rng(2)
    s = random_state(d, 3, rng)
    u = np.linalg.qr(rng.normal(size=(9, 9)) + 1j * rng.normal(size=(9, 9)))[0]
    out = s.apply(u, [2, 0])
    # reference: reorder so that sites (2, 0, 1) are in order, apply kron
    ref = s.reorder([2, 0, 1])
    vec = np.kron(u, np.eye(d)) @ ref.vector()
    ref = StateVector.from_vector(d, vec, labels=[2, 0, 1])
    assert fidelity_up_to_phase(out, ref) > 1 - 1e-12


def test_json_roundtrip():
    s = random_state(3, 2, np.random.default_rng(3))
    data = json.loads(s.to_json())
    assert data["d"] == 3 and data["n"] == 2 and len(data["amps"]) == 9
    back = StateVector.from_json(s.to_json())
    assert np.allclose(back.vector(), s.vector())
