import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annni_battery.errors import CapacityError, DomainError, NumericalError
from annni_battery.operators import (
    ChainParams,
    SparseHamiltonian,
    apply,
    build_hamiltonian,
    dense_hamiltonian_kron,
    expectation,
    normalize,
    parity_signs,
    reflection_permutation,
)

couplings = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


def random_state(dim, seed):
    rng = np.random.default_rng(seed)
    return normalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


class TestChainParams:
    def test_kappa_accessor(self):
        p = ChainParams.from_kappa(6, 0.3, 0.4)
        assert p.J2 == pytest.approx(-0.3)
        assert p.kappa == pytest.approx(0.3)

    def test_kappa_zero_keeps_positive_zero(self):
        assert np.copysign(1.0, ChainParams.from_kappa(6, 0.0, 1.0).J2) == 1.0

    def test_kappa_undefined_without_nn_coupling(self):
        with pytest.raises(DomainError):
            ChainParams(L=4, J1=0.0, J2=0.5, h=1.0).kappa

    @pytest.mark.parametrize("L", [1, 2])
    def test_short_chain_rejects_nnn(self, L):
        with pytest.raises(DomainError):
            ChainParams(L=L, J1=1.0, J2=-0.3)

    def test_l2_without_nnn_is_fine(self):
        ChainParams(L=2, J1=1.0, J2=0.0, h=0.5)

    @pytest.mark.parametrize("kwargs", [dict(L=0), dict(L=3, boundary="periodic"), dict(L=2.5)])
    def test_invalid(self, kwargs):
        with pytest.raises(DomainError):
            ChainParams(**kwargs)

    def test_capacity(self, monkeypatch):
        monkeypatch.setenv("QB_MAX_L", "6")
        with pytest.raises(CapacityError):
            build_hamiltonian(ChainParams(L=7, h=1.0))
        assert build_hamiltonian(ChainParams(L=6, h=1.0)).dim == 64


class TestBuild:
    def test_single_spin(self):
        H = build_hamiltonian(ChainParams(L=1, J1=1.0, h=0.7))
        np.testing.assert_array_equal(H.toarray(), np.diag([-0.7, 0.7]))

    def test_single_bond_spectrum(self):
        H = build_hamiltonian(ChainParams(L=2, J1=1.0, h=0.0))
        np.testing.assert_allclose(np.linalg.eigvalsh(H.toarray()), [-1, -1, 1, 1], atol=1e-14)

    def test_basis_convention(self):
        # bit 0 <-> first site, bit value 0 <-> sigma^z = +1
        H = build_hamiltonian(ChainParams(L=3, J1=0.0, h=1.0))
        assert H.matrix[0, 0] == -3.0
        assert H.matrix[1, 1] == -1.0
        assert H.matrix[7, 7] == 3.0
        H = build_hamiltonian(ChainParams(L=3, J1=1.0, h=0.0))
        # X_0 X_1 couples |000> with |011> (index 3)
        assert H.matrix[0, 3] == -1.0
        assert H.matrix[0, 5] == 0.0

    @pytest.mark.parametrize("L,kappa,h", [(3, 0.0, 0.0), (5, 0.3, 0.4), (8, 0.6, 1.0), (10, -0.3, 0.4)])
    def test_matches_kron_oracle(self, L, kappa, h):
        params = ChainParams.from_kappa(L, kappa, h)
        # diagonal sums may differ in the last ulp from summation order
        np.testing.assert_allclose(
            build_hamiltonian(params).matrix.toarray(), dense_hamiltonian_kron(params), rtol=0, atol=1e-14
        )

    def test_general_j1(self):
        params = ChainParams(L=6, J1=0.7, J2=-0.2, h=0.3)
        np.testing.assert_allclose(
            build_hamiltonian(params).matrix.toarray(), dense_hamiltonian_kron(params), rtol=0, atol=1e-14
        )

    def test_bit_identical_rebuild(self):
        p = ChainParams.from_kappa(9, 0.35, 0.45)
        a, b = build_hamiltonian(p).matrix, build_hamiltonian(p).matrix
        assert a.data.tobytes() == b.data.tobytes()
        assert a.indices.tobytes() == b.indices.tobytes()
        assert a.indptr.tobytes() == b.indptr.tobytes()

    def test_immutable(self):
        H = build_hamiltonian(ChainParams.from_kappa(4, 0.2, 0.3))
        with pytest.raises(ValueError):
            H.matrix.data[0] = 1.0

    @settings(max_examples=25, deadline=None)
    @given(L=st.integers(3, 9), J1=couplings, J2=couplings, h=couplings)
    def test_invariants(self, L, J1, J2, h):
        H = build_hamiltonian(ChainParams(L=L, J1=J1, J2=J2, h=h))
        assert H.dim == 2**L
        assert H.hermiticity_defect() <= 1e-14
        assert H.nnz <= (3 * L - 3) * 2**L

        psi = random_state(H.dim, L)
        signs = parity_signs(L)
        assert np.linalg.norm(H @ (signs * psi) - signs * (H @ psi)) < 1e-12
        perm = reflection_permutation(L)
        # (R psi)[b] = psi[perm[b]]
        assert np.linalg.norm(H @ psi[perm] - (H @ psi)[perm]) < 1e-12


class TestDecoupledLimits:
    @pytest.mark.parametrize("L", [2, 5, 8])
    def test_field_only(self, L):
        H = build_hamiltonian(ChainParams(L=L, J1=0.0, h=0.6))
        assert np.linalg.eigvalsh(H.toarray())[0] == pytest.approx(-L * 0.6, abs=1e-12)

    @pytest.mark.parametrize("L", [2, 5, 8])
    def test_bonds_only(self, L):
        H = build_hamiltonian(ChainParams(L=L, J1=1.3, h=0.0))
        assert np.linalg.eigvalsh(H.toarray())[0] == pytest.approx(-(L - 1) * 1.3, abs=1e-12)

    def test_empty_operator(self):
        H = build_hamiltonian(ChainParams(L=3, J1=0.0, h=0.0))
        assert H.nnz == 0
        assert H.hermiticity_defect() == 0.0


class TestApply:
    def test_trivial(self):
        H = build_hamiltonian(ChainParams(L=1, h=0.7))
        np.testing.assert_array_equal(apply(H, np.array([1.0, 0.0])), [-0.7, 0.0])
        np.testing.assert_array_equal(apply(H, np.zeros(2, dtype=complex)), [0.0, 0.0])

    def test_matches_dense(self):
        params = ChainParams(L=8, J1=0.9, J2=-0.45, h=0.35)
        psi = random_state(256, 3)
        expected = dense_hamiltonian_kron(params) @ psi
        assert np.abs(apply(build_hamiltonian(params), psi) - expected).max() < 1e-12

    def test_complex_split_matches_scipy(self):
        H = build_hamiltonian(ChainParams.from_kappa(7, 0.4, 0.2))
        psi = random_state(H.dim, 5)
        np.testing.assert_array_equal(H.matvec(psi), H.matrix.dot(psi))

    def test_dimension_mismatch(self):
        H = build_hamiltonian(ChainParams(L=3, h=1.0))
        with pytest.raises(DomainError):
            apply(H, np.ones(4))
        with pytest.raises(DomainError):
            expectation(H, np.ones(4))


class TestExpectation:
    def test_trivial(self):
        H = build_hamiltonian(ChainParams(L=1, h=0.7))
        assert expectation(H, np.array([0.0, 1.0], dtype=complex)) == pytest.approx(0.7)

    def test_matches_dense_quadratic_form(self):
        params = ChainParams.from_kappa(10, 0.2, 0.4)
        psi = random_state(1024, 11)
        dense = np.vdot(psi, dense_hamiltonian_kron(params) @ psi).real
        assert abs(expectation(build_hamiltonian(params), psi) - dense) < 1e-10

    def test_rejects_non_hermitian(self):
        import scipy.sparse as sp

        broken = SparseHamiltonian(ChainParams(L=1), sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]])))
        with pytest.raises(NumericalError):
            expectation(broken, np.array([1.0, 1.0j]) / np.sqrt(2))

    def test_normalize_zero(self):
        with pytest.raises(NumericalError):
            normalize(np.zeros(4))
