import numpy as np
import pytest

from qdverify.errors import CompletenessFailure, NotInformationallyComplete
from qdverify.linalg import dag, frobenius_norm, hermitian_eig, random_density_matrix
from qdverify.povm import (
    DualFrame,
    Povm,
    default_ic_povm,
    dual_frame,
    hermitian_basis,
    is_informationally_complete,
    probabilities,
    random_ic_povm,
    reconstruct,
    sic_qubit,
)

_PAULIS = [
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]


class TestSicQubit:
    def test_pairwise_overlaps(self, sic):
        # SIC symmetry: Tr[M_j M_k] / Tr[M_j M_j] = 1/3 for all 6 pairs
        for j in range(4):
            denom = np.trace(sic.effects[j] @ sic.effects[j]).real
            for k in range(j + 1, 4):
                ratio = np.trace(sic.effects[j] @ sic.effects[k]).real / denom
                assert ratio == pytest.approx(1 / 3, abs=1e-12)

    def test_completeness_sum(self, sic):
        total = sum(sic.effects)
        assert frobenius_norm(total - np.eye(2)) <= 1e-14

    def test_effect_spectra(self, sic):
        for e in sic.effects:
            w = hermitian_eig(e).eigenvalues
            np.testing.assert_allclose(w, [0.5, 0.0], atol=1e-12)

    def test_informationally_complete(self, sic):
        assert is_informationally_complete(sic)

    def test_tetrahedral_invariance(self, sic):
        # conjugation by each Pauli permutes the effect set
        for u in _PAULIS:
            rotated = [u @ e @ dag(u) for e in sic.effects]
            for r in rotated:
                dists = [frobenius_norm(r - e) for e in sic.effects]
                assert min(dists) <= 1e-12


class TestRandomIcPovm:
    def test_qubit_construction(self):
        p = random_ic_povm(2, seed=1)
        assert len(p.effects) == 4
        assert is_informationally_complete(p)

    def test_dim3_sum_and_count(self):
        p = random_ic_povm(3, seed=7)
        assert len(p.effects) == 9
        assert frobenius_norm(sum(p.effects) - np.eye(3)) <= 1e-10
        assert is_informationally_complete(p)

    def test_deterministic(self):
        p1 = random_ic_povm(2, seed=5)
        p2 = random_ic_povm(2, seed=5)
        for a, b in zip(p1.effects, p2.effects):
            np.testing.assert_array_equal(a, b)

    def test_effects_psd(self):
        p = random_ic_povm(4, seed=2)
        for e in p.effects:
            assert hermitian_eig(e).eigenvalues[-1] >= -1e-10


def test_projective_measurement_not_ic():
    p = Povm(2, [np.diag([1.0, 0.0]).astype(complex),
                 np.diag([0.0, 1.0]).astype(complex)])
    assert not is_informationally_complete(p)


def test_probabilities_normalized():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        rho = random_density_matrix(3, rng)
        p = random_ic_povm(3, seed=seed)
        probs = probabilities(p, rho)
        assert np.all(probs >= -1e-12)
        assert probs.sum() == pytest.approx(1.0, abs=1e-10)


class TestDualFrame:
    def test_sic_closed_form(self, sic, sic_duals):
        # dual of the SIC is 3 Pi_k - I with Pi_k the projector 2 M_k
        for n, m in zip(sic_duals.operators, sic.effects):
            np.testing.assert_allclose(n, 3 * (2 * m) - np.eye(2), atol=1e-9)

    def test_sic_reconstruction(self, sic, sic_duals):
        rng = np.random.default_rng(0)
        for _ in range(50):
            rho = random_density_matrix(2, rng)
            rec = reconstruct(sic, sic_duals, probabilities(sic, rho))
            assert frobenius_norm(rec - rho) <= 1e-12

    def test_maximally_mixed(self, sic, sic_duals):
        rec = reconstruct(sic, sic_duals, np.full(4, 0.25))
        np.testing.assert_allclose(rec, np.eye(2) / 2, atol=1e-12)

    def test_random_povm_reconstruction(self):
        p = random_ic_povm(2, seed=3)
        duals = dual_frame(p)
        rng = np.random.default_rng(1)
        for _ in range(50):
            rho = random_density_matrix(2, rng)
            rec = reconstruct(p, duals, probabilities(p, rho))
            assert frobenius_norm(rec - rho) <= 1e-9

    def test_reconstruction_on_operator_basis(self):
        # identity on all of operator space, not just on states
        for p in (sic_qubit(), random_ic_povm(3, seed=4)):
            duals = dual_frame(p)
            for basis_op in hermitian_basis(p.dim):
                coeffs = np.array([np.trace(e @ basis_op).real for e in p.effects])
                rec = reconstruct(p, duals, coeffs)
                assert frobenius_norm(rec - basis_op) <= 1e-9

    def test_requires_completeness(self):
        p = Povm(2, [np.diag([1.0, 0.0]).astype(complex),
                     np.diag([0.0, 1.0]).astype(complex)])
        with pytest.raises(NotInformationallyComplete):
            dual_frame(p)


def test_default_ic_povm_dispatch():
    assert len(default_ic_povm(2).effects) == 4
    assert len(default_ic_povm(3).effects) == 9


def test_completeness_failure_after_retries(monkeypatch):
    import qdverify.povm as povm_mod

    monkeypatch.setattr(povm_mod, "is_informationally_complete", lambda p: False)
    with pytest.raises(CompletenessFailure):
        povm_mod.random_ic_povm(2, seed=0)


def test_hermitian_basis_orthonormal():
    basis = hermitian_basis(3)
    assert len(basis) == 9
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            ip = np.trace(dag(a) @ b).real
            assert ip == pytest.approx(1.0 if i == j else 0.0, abs=1e-14)
