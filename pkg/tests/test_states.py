import numpy as np
import pytest

from entkit import (
    Bipartition,
    DimensionCapExceeded,
    EnsembleSpec,
    MixedState,
    PureFactorState,
    build_named,
    build_rho_p,
    cut_major_matrix,
    ghz,
    max_ent,
    pure_state,
    random_product,
    random_pure,
    schmidt,
    schmidt_state,
    w_state,
)
from entkit.states import cut_major_vector, ensemble_product_vector

from conftest import (
    group_sides_oracle,
    haar_unitary,
    pt_oracle,
    rho_family_oracle,
    schmidt_oracle,
)

CUT01 = Bipartition((0,), (1,))


class TestPureFactorState:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            PureFactorState((2, 2), np.array([1.0, 1.0, 0.0, 0.0]))

    def test_pure_state_normalizes(self):
        psi = pure_state((2, 2), [1.0, 1.0, 0.0, 0.0], normalize=True)
        assert abs(np.linalg.norm(psi.amplitudes) - 1.0) < 1e-15

    def test_rejects_single_party(self):
        with pytest.raises(ValueError):
            pure_state((4,), np.array([1.0, 0, 0, 0]))

    def test_amplitudes_frozen(self):
        psi = max_ent(2)
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 1.0


class TestSchmidt:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_max_ent_coefficients(self, d):
        dec = schmidt(max_ent(d), CUT01)
        assert dec.rank == d
        assert np.abs(dec.coefficients - 1.0 / np.sqrt(d)).max() < 1e-12

    def test_product_state_rank_one(self, rng):
        psi = random_product((3, 4), seed=5)
        dec = schmidt(psi, CUT01)
        assert dec.rank == 1
        assert abs(dec.coefficients[0] - 1.0) < 1e-12

    def test_ghz_all_cuts(self):
        psi = ghz([2, 2, 2])
        for cut in (Bipartition((0,), (1, 2)), Bipartition((0, 1), (2,)), Bipartition((0, 2), (1,))):
            dec = schmidt(psi, cut)
            assert np.abs(dec.coefficients - 1.0 / np.sqrt(2)).max() < 1e-12

    def test_w_state_cut_coefficients(self):
        dec = schmidt(w_state(3), Bipartition((0,), (1, 2)))
        expected = np.array([np.sqrt(2.0 / 3.0), np.sqrt(1.0 / 3.0)])
        assert np.abs(dec.coefficients - expected).max() < 1e-12

    def test_matches_reshape_svd_oracle(self, rng):
        for _ in range(20):
            da, db = rng.integers(2, 5, size=2)
            psi = random_pure((int(da), int(db)), seed=int(rng.integers(10**6)))
            dec = schmidt(psi, CUT01)
            mu = schmidt_oracle(psi.amplitudes, da, db)
            assert np.abs(dec.coefficients - mu).max() < 1e-10

    def test_reconstruction(self, rng):
        psi = random_pure((3, 4), seed=11)
        dec = schmidt(psi, CUT01)
        rebuilt = np.zeros(12, dtype=complex)
        for s in range(dec.rank):
            rebuilt += dec.coefficients[s] * np.kron(dec.left_basis[:, s], dec.right_basis[:, s])
        assert np.linalg.norm(rebuilt - psi.amplitudes) < 1e-10

    def test_bases_orthonormal(self, rng):
        psi = random_pure((4, 4), seed=13)
        dec = schmidt(psi, CUT01)
        r = dec.rank
        assert np.abs(dec.left_basis.conj().T @ dec.left_basis - np.eye(r)).max() < 1e-10
        assert np.abs(dec.right_basis.conj().T @ dec.right_basis - np.eye(r)).max() < 1e-10

    def test_local_unitary_invariance(self, rng):
        psi = random_pure((3, 3), seed=17)
        u, v = haar_unitary(rng, 3), haar_unitary(rng, 3)
        rotated = pure_state((3, 3), (np.kron(u, v) @ psi.amplitudes))
        before = schmidt(psi, CUT01).coefficients
        after = schmidt(rotated, CUT01).coefficients
        assert np.abs(before - after).max() < 1e-9

    def test_trivial_cut_rejected(self):
        with pytest.raises(ValueError):
            Bipartition((0, 1), ())


class TestNamedStates:
    def test_max_ent_qubits(self):
        assert np.allclose(max_ent(2).amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))

    def test_schmidt_state_coefficients(self):
        psi = schmidt_state((np.sqrt(0.8), np.sqrt(0.2)))
        dec = schmidt(psi, CUT01)
        assert np.abs(dec.coefficients - [0.8944271909999159, 0.4472135954999579]).max() < 1e-12

    def test_build_named_dispatch(self):
        assert build_named("max_ent", d=3).dim == 9
        assert build_named("ghz", dims=[2, 2, 2]).n_parties == 3
        assert build_named("w", n=4).dim == 16
        assert build_named("schmidt", coeffs=[2.0, 1.0]).dim == 4
        with pytest.raises(ValueError):
            build_named("bogus")


class TestRandomStates:
    def test_deterministic_for_fixed_seed(self):
        a = random_pure((2, 3), seed=42)
        b = random_pure((2, 3), seed=42)
        assert np.array_equal(a.amplitudes, b.amplitudes)

    def test_random_pure_full_rank(self):
        ranks = [schmidt(random_pure((2, 2), seed=s), CUT01).rank for s in range(1000)]
        assert all(r == 2 for r in ranks)

    def test_random_product_rank_one_every_cut(self):
        psi = random_product((2, 3, 2), seed=9)
        for cut in (Bipartition((0,), (1, 2)), Bipartition((0, 1), (2,)), Bipartition((0, 2), (1,))):
            assert schmidt(psi, cut).rank == 1


class TestEnsembleSpec:
    def test_validates_p(self):
        with pytest.raises(ValueError):
            EnsembleSpec((max_ent(2),), 1.5)

    def test_validates_party_count(self):
        with pytest.raises(ValueError):
            EnsembleSpec((max_ent(2), ghz([2, 2, 2])), 0.5)

    def test_normalizations_derived(self):
        spec = EnsembleSpec((max_ent(2), max_ent(3)), 0.2)
        assert spec.normalizations() == (1.0 / 3.0, 1.0 / 8.0)


class TestBuildRhoP:
    def test_p_one_is_pure_product(self):
        spec = EnsembleSpec((max_ent(2), max_ent(2)), 1.0)
        rho = build_rho_p(spec)
        psi = ensemble_product_vector(spec)
        assert np.abs(rho.matrix - np.outer(psi, psi.conj())).max() < 1e-13

    def test_p_zero_product_factors_is_ppt_everywhere(self):
        spec = EnsembleSpec((random_product((2, 2), 1), random_product((2, 2), 2)), 0.0)
        rho = build_rho_p(spec)
        m, (da, db) = cut_major_matrix(rho, CUT01)
        pt = pt_oracle(m, da, db)
        assert np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0] >= -1e-12

    def test_isotropic_special_case(self):
        d, p = 3, 0.4
        rho = build_rho_p(EnsembleSpec((max_ent(d),), p))
        proj = max_ent(d).density()
        manual = (1 - p) * (np.eye(d * d) - proj) / (d * d - 1) + p * proj
        assert np.abs(rho.matrix - manual).max() < 1e-14

    def test_matches_kron_oracle(self, rng):
        f1 = random_pure((2, 2), seed=3)
        f2 = random_pure((3, 3), seed=4)
        spec = EnsembleSpec((f1, f2), 0.37)
        rho = build_rho_p(spec)
        oracle = rho_family_oracle([f1.amplitudes, f2.amplitudes], 0.37)
        assert np.abs(rho.matrix - oracle).max() < 1e-13

    def test_eigenvalue_structure(self):
        spec = EnsembleSpec((max_ent(2), random_pure((3, 3), seed=8)), 0.3)
        rho = build_rho_p(spec)
        vals = np.sort(np.linalg.eigvalsh(rho.matrix))[::-1]
        mult = (4 - 1) * (9 - 1)
        expected = np.concatenate([[0.3], np.full(mult, 0.7 / mult), np.zeros(36 - 1 - mult)])
        assert np.abs(vals - np.sort(expected)[::-1]).max() < 1e-12

    def test_state_invariants(self):
        rho = build_rho_p(EnsembleSpec((max_ent(2), max_ent(3)), 0.25))
        assert abs(np.trace(rho.matrix) - 1) < 1e-12
        assert np.abs(rho.matrix - rho.matrix.conj().T).max() < 1e-12
        assert rho.min_eigenvalue() > -1e-10

    def test_dimension_cap(self):
        spec = EnsembleSpec((max_ent(8), max_ent(8)), 0.1)
        with pytest.raises(DimensionCapExceeded):
            build_rho_p(spec, dim_cap=1000)

    def test_shapes(self):
        rho = build_rho_p(EnsembleSpec((max_ent(2), max_ent(3)), 0.2))
        assert rho.party_shape == (6, 6)
        assert rho.factor_shape == (4, 9)
        assert rho.n_parties == 2 and rho.n_factors == 2

    def test_separable_part_pt_strictly_positive(self):
        # both factors entangled with coefficients away from 0 and 1
        f1 = schmidt_state((np.sqrt(0.75), np.sqrt(0.25)))
        f2 = schmidt_state((np.sqrt(0.6), np.sqrt(0.4)))
        rho = build_rho_p(EnsembleSpec((f1, f2), 0.0))
        m, (da, db) = cut_major_matrix(rho, CUT01)
        pt = pt_oracle(m, da, db)
        assert np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0] > 1e-8


class TestCutMajor:
    def test_matches_index_oracle(self, rng):
        f1 = random_pure((2, 3), seed=21)
        f2 = random_pure((2, 2), seed=22)
        spec = EnsembleSpec((f1, f2), 0.5)
        rho = build_rho_p(spec)
        m, (da, db) = cut_major_matrix(rho, CUT01)
        oracle = group_sides_oracle(rho.matrix, [(2, 3), (2, 2)])
        assert (da, db) == (4, 6)
        assert np.abs(m - oracle).max() < 1e-13

    def test_vector_permutation_consistent(self):
        spec = EnsembleSpec((max_ent(2), max_ent(3)), 0.9)
        rho = build_rho_p(spec)
        m, _ = cut_major_matrix(rho, CUT01)
        psi = ensemble_product_vector(spec)
        psi_cm = cut_major_vector(psi, rho.factor_party_dims, CUT01)
        overlap = psi_cm.conj() @ m @ psi_cm
        # pure part weight p plus separable-part overlap zero
        assert abs(overlap - 0.9) < 1e-12

    def test_mixed_state_from_pure(self):
        rho = MixedState.from_pure(max_ent(2))
        assert rho.party_shape == (2, 2)
        assert abs(np.trace(rho.matrix) - 1) < 1e-14
