import numpy as np
import pytest
from fractions import Fraction

from entkit import (
    Bipartition,
    EnsembleSpec,
    MixedState,
    build_rho_p,
    cut_major_matrix,
    distillability_certificate,
    is_ppt,
    max_ent,
    p_gamma_closed,
    p_gamma_exact,
    p_gamma_maxent,
    pt_spectrum,
    random_product,
    random_pure,
    realignment_norm,
    realignment_norm_closed,
    realignment_norm_closed_printed,
    realignment_threshold_maxent,
    reduction_check,
    schmidt_state,
    trace_norm,
)
from entkit.criteria import pt_matrix, pure_pt_eigenvalues

from conftest import (
    p_gamma_bisect_oracle,
    random_ppt_density,
    realign_oracle,
    schmidt_oracle,
)

CUT01 = Bipartition((0,), (1,))


def pure_pt_multiset_oracle(amplitudes, da, db):
    """Expected PT spectrum of a pure state: mu_i^2 and +-mu_i mu_j plus zeros."""
    mu = schmidt_oracle(amplitudes, da, db)
    vals = list(mu**2)
    for i in range(len(mu)):
        for j in range(i + 1, len(mu)):
            vals.extend([mu[i] * mu[j], -mu[i] * mu[j]])
    vals.extend([0.0] * (da * db - len(vals)))
    return np.sort(np.asarray(vals))


class TestPtSpectrum:
    def test_bell(self):
        vals = pt_spectrum(MixedState.from_pure(max_ent(2))).eigenvalues
        assert np.abs(vals - [-0.5, 0.5, 0.5, 0.5]).max() < 1e-12

    def test_lopsided_qubit_pair(self):
        psi = schmidt_state((np.sqrt(0.8), np.sqrt(0.2)))
        vals = np.sort(pt_spectrum(MixedState.from_pure(psi)).eigenvalues)
        assert np.abs(vals - np.sort([0.8, 0.2, 0.4, -0.4])).max() < 1e-10

    def test_random_pure_matches_formula(self, rng):
        for _ in range(25):
            da, db = (int(x) for x in rng.integers(2, 5, size=2))
            psi = random_pure((da, db), seed=int(rng.integers(10**6)))
            got = np.sort(pt_spectrum(MixedState.from_pure(psi)).eigenvalues)
            want = pure_pt_multiset_oracle(psi.amplitudes, da, db)
            assert np.abs(got - want).max() < 1e-10

    def test_separable_part_positive_for_entangled_pair(self):
        spec = EnsembleSpec((max_ent(2), schmidt_state((np.sqrt(0.7), np.sqrt(0.3)))), 0.0)
        vals = pt_spectrum(build_rho_p(spec)).eigenvalues
        assert vals[0] > 1e-8

    def test_pure_pt_eigenvalue_helper_counts(self):
        vals = pure_pt_eigenvalues(np.array([0.8, 0.6]), 6)
        assert len(vals) == 6
        assert np.allclose(sorted(vals), sorted([0.64, 0.36, 0.48, -0.48, 0.0, 0.0]))


class TestIsPpt:
    def test_isotropic_threshold_sides(self):
        spec = EnsembleSpec((max_ent(2),), 0.4)
        assert is_ppt(build_rho_p(spec))
        assert not is_ppt(build_rho_p(spec.with_p(0.6)))

    def test_p_zero_always_ppt(self, rng):
        for seed in range(4):
            f1 = random_pure((2, 2), seed=seed)
            f2 = random_pure((3, 3), seed=100 + seed)
            rho = build_rho_p(EnsembleSpec((f1, f2), 0.0))
            assert is_ppt(rho)

    def test_rejects_negative_tol(self):
        with pytest.raises(ValueError):
            is_ppt(MixedState.from_pure(max_ent(2)), tol=-1.0)


class TestPGammaClosed:
    def test_two_bells(self):
        assert abs(p_gamma_closed(max_ent(2), max_ent(2)).p_gamma - 0.25) < 1e-12

    def test_bell_and_qutrit(self):
        assert abs(p_gamma_closed(max_ent(2), max_ent(3)).p_gamma - 1 / 7) < 1e-12

    def test_lopsided_pair(self):
        psi = schmidt_state((np.sqrt(0.8), np.sqrt(0.2)))
        # closed form: K = (1/9) * 0.875, threshold K / (1 + K) = 7/79
        assert abs(p_gamma_closed(psi, psi).p_gamma - 7 / 79) < 1e-12

    def test_separable_factor_gives_zero(self):
        prod = random_product((2, 2), seed=0)
        th = p_gamma_closed(prod, max_ent(2))
        assert th.p_gamma == 0.0
        assert "separable" in th.reason

    def test_both_separable_gives_one(self):
        th = p_gamma_closed(random_product((2, 2), 1), random_product((3, 3), 2))
        assert th.p_gamma == 1.0


class TestPGammaExact:
    @pytest.mark.parametrize(
        "dims,expected",
        [((2, 2), Fraction(1, 4)), ((2, 3), Fraction(1, 7)), ((3, 3), Fraction(1, 9)), ((2, 2, 2), Fraction(1, 10))],
    )
    def test_maxent_families(self, dims, expected):
        spec = EnsembleSpec(tuple(max_ent(d) for d in dims), 0.0)
        th = p_gamma_exact(spec)
        assert p_gamma_maxent(dims) == expected
        assert abs(th.p_gamma - float(expected)) < 1e-12

    def test_matches_closed_form_on_random_pairs(self, rng):
        for _ in range(30):
            d1, d2 = (int(x) for x in rng.integers(2, 4, size=2))
            f1 = random_pure((d1, d1), seed=int(rng.integers(10**6)))
            f2 = random_pure((d2, d2), seed=int(rng.integers(10**6)))
            spec = EnsembleSpec((f1, f2), 0.0)
            a = p_gamma_exact(spec).p_gamma
            b = p_gamma_closed(f1, f2).p_gamma
            assert abs(a - b) < 1e-9

    def test_matches_bisection_oracle(self):
        f1 = schmidt_state((np.sqrt(0.65), np.sqrt(0.35)))
        f2 = max_ent(3)
        spec = EnsembleSpec((f1, f2), 0.0)
        got = p_gamma_exact(spec).p_gamma
        want = p_gamma_bisect_oracle([f1.amplitudes, f2.amplitudes], [(2, 2), (3, 3)])
        assert abs(got - want) < 1e-9

    def test_dense_bisection_method_agrees(self):
        f1 = max_ent(2)
        f2 = schmidt_state((np.sqrt(0.55), np.sqrt(0.45)))
        spec = EnsembleSpec((f1, f2), 0.0)
        a = p_gamma_exact(spec, method="factor_spectrum").p_gamma
        b = p_gamma_exact(spec, method="dense_bisection").p_gamma
        assert abs(a - b) < 1e-9

    def test_mixed_separability_reports_zero_with_reason(self):
        spec = EnsembleSpec((random_product((2, 2), 3), max_ent(2)), 0.0)
        th = p_gamma_exact(spec)
        assert th.p_gamma == 0.0
        assert "separable" in th.reason

    def test_all_separable_reports_one(self):
        spec = EnsembleSpec((random_product((2, 2), 3), random_product((2, 2), 4)), 0.0)
        assert p_gamma_exact(spec).p_gamma == 1.0

    def test_witnessing_tuple_reproduces_threshold(self):
        spec = EnsembleSpec((max_ent(2), max_ent(3)), 0.0)
        th = p_gamma_exact(spec)
        lam = np.array(th.witnessing_eigentuple)
        norms = np.array(spec.normalizations())
        a = np.prod(norms * (1 - lam))
        b = np.prod(lam)
        assert b < 0
        assert abs(a / (a - b) - th.p_gamma) < 1e-12


class TestRealignmentNorm:
    def test_isotropic_qubit(self):
        rho = build_rho_p(EnsembleSpec((max_ent(2),), 0.1))
        assert abs(realignment_norm(rho) - 0.8) < 1e-12

    def test_two_bells_at_threshold(self):
        rho = build_rho_p(EnsembleSpec((max_ent(2), max_ent(2)), 0.25))
        assert abs(realignment_norm(rho) - 1.0) < 1e-10

    def test_maximally_mixed_product_below_one(self):
        rho = MixedState(np.eye(16, dtype=complex) / 16, ((2, 2), (2, 2)))
        assert realignment_norm(rho) <= 1.0 + 1e-12

    def test_matches_reshuffle_oracle(self, rng):
        rho = build_rho_p(EnsembleSpec((random_pure((2, 2), 5), random_pure((2, 2), 6)), 0.3))
        m, (da, db) = cut_major_matrix(rho, CUT01)
        want = np.linalg.svd(realign_oracle(m, da, db), compute_uv=False).sum()
        assert abs(realignment_norm(rho) - want) < 1e-10


class TestRealignmentClosedForm:
    @pytest.mark.parametrize("d", [2, 3])
    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_matches_direct_reshuffle_on_grid(self, d, m):
        factors = tuple(max_ent(d) for _ in range(m))
        for p in np.linspace(0.0, 1.0, 21):
            rho = build_rho_p(EnsembleSpec(factors, float(p)))
            direct = realignment_norm(rho)
            closed = realignment_norm_closed(d, m, float(p))
            assert abs(direct - closed) < 1e-9

    def test_reference_values(self):
        assert abs(realignment_norm_closed(2, 3, 0.1) - 1.25) < 1e-12
        assert abs(realignment_norm_closed(2, 2, 0.25) - 1.0) < 1e-12
        assert abs(realignment_norm_closed(2, 1, 1.0) - 2.0) < 1e-12
        assert abs(realignment_norm_closed(3, 2, 1.0) - 9.0) < 1e-12

    def test_isotropic_detection_threshold_is_one_over_d(self):
        for d in (2, 3):
            below = realignment_norm_closed(d, 1, 1.0 / d - 1e-9)
            above = realignment_norm_closed(d, 1, 1.0 / d + 1e-6)
            assert below <= 1.0 + 1e-12
            assert above > 1.0

    def test_printed_variant_disagrees(self):
        got = realignment_norm_closed_printed(2, 3, 0.1)
        assert abs(got - 1.0) < 1e-12
        assert abs(got - realignment_norm_closed(2, 3, 0.1)) > 0.2


class TestRealignmentThresholdMaxent:
    def test_values(self):
        assert abs(realignment_threshold_maxent(2, 2) - 0.25) < 1e-15
        assert abs(realignment_threshold_maxent(2, 4) - 3 / 28) < 1e-15
        assert abs(realignment_threshold_maxent(3, 3) - 1 / 9) < 1e-15

    def test_never_below_pt_threshold(self):
        for d1 in (2, 3):
            for d2 in range(d1, 5):
                pg = float(p_gamma_maxent([d1, d2]))
                assert realignment_threshold_maxent(d1, d2) >= pg - 1e-12

    def test_rejects_bad_order(self):
        with pytest.raises(ValueError):
            realignment_threshold_maxent(3, 2)


class TestDistillability:
    def test_npt_family_state(self):
        rho = build_rho_p(EnsembleSpec((max_ent(2), max_ent(2)), 0.3))
        cert = distillability_certificate(rho)
        assert cert is not None
        assert cert.value < 0
        assert cert.schmidt_rank_across_cut <= 2
        # the certificate value must match an actual PT expectation
        pt, _ = pt_matrix(rho, CUT01)
        val = (cert.vector.conj() @ pt @ cert.vector).real
        assert abs(val - cert.value) < 1e-10

    def test_ppt_returns_none(self):
        rho = build_rho_p(EnsembleSpec((max_ent(2), max_ent(3)), 0.1))
        assert distillability_certificate(rho) is None

    def test_nondegenerate_vector_structure(self):
        # distinct coefficients keep the minimal eigenvector unique: it factors
        # as (Schmidt-basis |kk>) (x) (antisymmetric pair), rank 2 across the cut
        f1 = schmidt_state((np.sqrt(0.7), np.sqrt(0.3)))
        f2 = schmidt_state((np.sqrt(0.6), np.sqrt(0.4)))
        spec = EnsembleSpec((f1, f2), 0.6)
        rho = build_rho_p(spec)
        cert = distillability_certificate(rho)
        assert cert is not None and cert.schmidt_rank_across_cut == 2
        # candidates |kk> (x) antisym(m, n) in both factor orders, cut-major
        pt, (da, db) = pt_matrix(rho, CUT01)
        best = None
        for kk_dim, pair_dim, order in (((2, 2), (2, 2), 0), ((2, 2), (2, 2), 1)):
            for k in range(2):
                for m in range(2):
                    for n in range(m + 1, 2):
                        kk = np.zeros(4, dtype=complex)
                        kk[k * 2 + k] = 1.0
                        anti = np.zeros(4, dtype=complex)
                        anti[m * 2 + n] = 1 / np.sqrt(2)
                        anti[n * 2 + m] = -1 / np.sqrt(2)
                        # factor-major vector, then group sides: A1 A2 | B1 B2
                        vec_fm = np.kron(kk, anti) if order == 0 else np.kron(anti, kk)
                        t = vec_fm.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(-1)
                        val = (t.conj() @ pt @ t).real
                        if best is None or val < best[0]:
                            best = (val, t)
        assert abs(best[0] - cert.value) < 1e-10
        assert abs(abs(best[1].conj() @ cert.vector) - 1.0) < 1e-8

    def test_degenerate_case_still_rank_two(self):
        # equal maximally entangled factors give a 6-fold degenerate minimum
        rho = build_rho_p(EnsembleSpec((max_ent(2), max_ent(2)), 0.9))
        cert = distillability_certificate(rho)
        assert cert is not None
        assert cert.schmidt_rank_across_cut <= 2
        assert cert.value < -1e-6


class TestReduction:
    def test_separable_passes(self):
        rho = build_rho_p(EnsembleSpec((random_product((2, 2), 7), random_product((2, 2), 8)), 0.5))
        assert reduction_check(rho)

    def test_bell_fails_with_gap_half(self):
        rho = MixedState.from_pure(max_ent(2))
        assert not reduction_check(rho)
        m, (da, db) = cut_major_matrix(rho, CUT01)
        gap = np.kron(np.eye(2) / 2, np.eye(2)) - m
        assert abs(np.linalg.eigvalsh(gap)[0] + 0.5) < 1e-12

    def test_ppt_samples_pass_and_have_unit_pt_norm(self, rng):
        for _ in range(25):
            mat = random_ppt_density(rng, 2, 2, 4)
            rho = MixedState(mat, ((2, 2),))
            assert reduction_check(rho)
            pt, _ = pt_matrix(rho, CUT01)
            assert abs(trace_norm(pt) - 1.0) < 1e-9


class TestFamilyInvariants:
    def test_npt_implies_certificate_over_random_ensembles(self, rng):
        found = 0
        for seed in range(12):
            f1 = random_pure((2, 2), seed=1000 + seed)
            f2 = random_pure((2, 2), seed=2000 + seed)
            spec0 = EnsembleSpec((f1, f2), 0.0)
            pg = p_gamma_exact(spec0).p_gamma
            if pg >= 1.0 - 1e-9:
                continue
            p = min(1.0, pg + 0.3 * (1.0 - pg) + 1e-6)
            rho = build_rho_p(spec0.with_p(p))
            cert = distillability_certificate(rho)
            assert cert is not None
            assert cert.schmidt_rank_across_cut <= 2
            assert cert.value < 0
            found += 1
        assert found >= 10
