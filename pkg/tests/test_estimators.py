import numpy as np
import pytest

from cmvlab.cmv import DomainError, build_cmv
from cmvlab.ensembles import EnsembleSpec, random_seq
from cmvlab.estimators import (
    aizenman_inequality_check,
    dynamical_localization_expectation,
    fit_decay,
    fractional_moment_expectation,
    kolmogorov_report,
    run_theorem11_experiment,
    spec_hash,
    windowed_dynamics,
)
from cmvlab.spectral import QuadratureSpec, eigendecompose_unitary
from cmvlab.verify import run_suite


def point_mass_spec(n_dim, seed=0):
    """Deterministic free ensemble: every coefficient 0, beta random."""
    return EnsembleSpec(family="iid_rotinv", radial_law="fixed_radius",
                        radial_param=0.0, n_dim=n_dim, master_seed=seed)


class TestFitDecay:
    def test_exact_exponential(self):
        d = np.arange(2, 12)
        v = 3.0 * np.exp(-0.5 * d)
        fit = fit_decay(d, v)
        assert abs(fit.prefactor - 3.0) <= 1e-9
        assert abs(fit.rate - 0.5) <= 1e-9
        assert abs(fit.r_squared - 1.0) <= 1e-12
        assert fit.rate_std_error <= 1e-9
        assert fit.fit_range == (2.0, 11.0)

    def test_constant_data(self):
        fit = fit_decay([1, 2, 3, 4], [0.7] * 4)
        assert abs(fit.rate) <= 1e-12
        assert abs(fit.prefactor - 0.7) <= 1e-12

    def test_weighted_matches_unweighted_for_equal_weights(self):
        d = np.arange(1, 8)
        v = 2.0 * np.exp(-0.3 * d) * np.exp(0.05 * np.sin(d))
        f1 = fit_decay(d, v)
        f2 = fit_decay(d, v, np.full(7, 5.0))
        assert abs(f1.rate - f2.rate) <= 1e-12
        assert abs(f1.prefactor - f2.prefactor) <= 1e-12

    def test_std_error_coverage(self):
        # lognormal noise: the 3 sigma interval should cover the true
        # rate in nearly all of 100 independent trials
        rng = np.random.default_rng(101)
        d = np.arange(2, 17)
        hits = 0
        for _ in range(100):
            v = 2.0 * np.exp(-0.4 * d) * np.exp(rng.normal(0, 0.1, len(d)))
            fit = fit_decay(d, v)
            if abs(fit.rate - 0.4) <= 3.0 * fit.rate_std_error:
                hits += 1
        assert hits >= 95

    def test_error_paths(self):
        with pytest.raises(ValueError):
            fit_decay([1, 2], [1.0, 0.5])
        with pytest.raises(DomainError):
            fit_decay([1, 2, 3], [1.0, -0.5, 0.2])
        with pytest.raises(DomainError):
            fit_decay([1, 2, 3], [1.0, 0.5, 0.2], [1.0, 0.0, 1.0])


class TestWindowedDynamics:
    def test_diagonal_reaches_one(self):
        rng = np.random.default_rng(5)
        sd = eigendecompose_unitary(build_cmv(random_seq(rng, 8)))
        sup, bound = windowed_dynamics(sd, 3, 3, 10)
        # n = 0 contributes sum of weights = 1 on the diagonal
        assert sup >= 1.0 - 1e-12
        assert bound >= sup - 1e-12

    def test_sup_below_bound_off_diagonal(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            sd = eigendecompose_unitary(build_cmv(random_seq(rng, 8)))
            k, l = rng.integers(8, size=2)
            sup, bound = windowed_dynamics(sd, int(k), int(l), 32)
            assert sup <= bound + 1e-12

    def test_window_monotone(self):
        rng = np.random.default_rng(7)
        sd = eigendecompose_unitary(build_cmv(random_seq(rng, 8)))
        s1, _ = windowed_dynamics(sd, 0, 5, 4)
        s2, _ = windowed_dynamics(sd, 0, 5, 64)
        assert s2 >= s1 - 1e-15


class TestFractionalMomentExpectation:
    def test_point_mass_matches_single_atom_value(self):
        # deterministic free case: the boundary half-integral equals
        # sec(p pi / 2) = sqrt(2) at p = 1/2
        spec = point_mass_spec(128)
        est = fractional_moment_expectation(spec, 0, 0, 0.5, 2)
        assert abs(est.value - 1.4142135623730951) <= 1e-3
        assert est.std_error <= 1e-6
        assert est.pair == (0, 0) and est.n_samples == 2

    def test_spec_hash_stability(self):
        spec = point_mass_spec(16, seed=4)
        assert spec_hash(spec) == spec_hash(point_mass_spec(16, seed=4))
        assert spec_hash(spec) != spec_hash(point_mass_spec(16, seed=5))


class TestDynamicalLocalizationExpectation:
    def test_point_mass_free_case(self):
        # free dynamics is ballistic: off-diagonal amplitudes stay large
        spec = point_mass_spec(64)
        est = dynamical_localization_expectation(spec, 20, 26, 256, 2)
        assert est.windowed_sup_mean >= 0.3
        assert est.rigorous_bound_mean >= est.windowed_sup_mean - 1e-12
        assert est.windowed_sup_std_error <= 1e-6


class TestAizenmanCheck:
    def test_small_sweep(self):
        rng = np.random.default_rng(9)
        quad = QuadratureSpec()
        for _ in range(5):
            seq = random_seq(rng, 8)
            for p in (0.3, 0.5, 0.7):
                rec = aizenman_inequality_check(seq, 2, 5, p, 16, quad)
                assert rec["margin"] >= -1e-8
                assert rec["lhs"] >= 0.0 and rec["rhs"] >= 0.0

    def test_rejects_equal_sites(self):
        rng = np.random.default_rng(10)
        with pytest.raises(DomainError):
            aizenman_inequality_check(random_seq(rng, 8), 2, 2, 0.5, 8)

    def test_rejects_bad_p(self):
        rng = np.random.default_rng(11)
        with pytest.raises(DomainError):
            aizenman_inequality_check(random_seq(rng, 8), 0, 3, 1.2, 8)


class TestKolmogorovReport:
    def test_small_p_ratio_near_half(self):
        # as p -> 0 the integral tends to 1 and the candidate bound to 2
        rng = np.random.default_rng(12)
        rec = kolmogorov_report(random_seq(rng, 8), 1, 1, 0.01)
        assert abs(rec["ratio"] - 0.5) <= 0.02
        assert not rec["exceeds_bound"]

    def test_fields_consistent(self):
        rng = np.random.default_rng(13)
        rec = kolmogorov_report(random_seq(rng, 8), 0, 4, 0.5)
        assert abs(rec["candidate_bound"] - 2.0 / np.cos(np.pi / 4)) <= 1e-14
        assert abs(rec["ratio"] - rec["integral"] / rec["candidate_bound"]) \
            <= 1e-15


class TestExperiment:
    def test_free_ensemble_flat_bound(self):
        spec = point_mass_spec(32)
        pairs = [(10, 12), (10, 14), (10, 16), (10, 18), (10, 20)]
        result = run_theorem11_experiment(spec, 0.5, pairs, 2, n_window=64)
        fit = result["dynloc_fit"]
        assert fit is not None
        # free eigenvectors spread weight evenly, so the rigorous bound
        # is essentially distance independent
        assert abs(fit.rate) <= 0.02
        assert result["dynloc_dropped_distances"] == []
        assert [r["distance"] for r in result["rows"]] == [2, 4, 6, 8, 10]

    def test_seed_reproducibility(self):
        spec = EnsembleSpec(family="iid_rotinv", radial_law="uniform_radius",
                            radial_param=0.9, n_dim=16, master_seed=42)
        pairs = [(4, 6), (4, 8), (4, 10)]
        r1 = run_theorem11_experiment(spec, 0.5, pairs, 3, n_window=32)
        r2 = run_theorem11_experiment(spec, 0.5, pairs, 3, n_window=32)
        assert r1["rows"] == r2["rows"]
        assert r1["spec_hash"] == r2["spec_hash"]

    def test_moments_decay_with_distance(self):
        spec = EnsembleSpec(family="iid_rotinv", radial_law="uniform_radius",
                            radial_param=0.9, n_dim=24, master_seed=3)
        pairs = [(6, 8), (6, 12), (6, 16)]
        result = run_theorem11_experiment(spec, 0.5, pairs, 8, n_window=48)
        moments = [r["moment"] for r in result["rows"]]
        assert moments[0] > moments[-1]


class TestVerifySuite:
    def test_all_checks_pass(self):
        results = run_suite(1234, dims=(4, 5, 6))
        names = [r.name for r in results]
        assert len(names) == len(set(names))
        failing = [(r.name, r.max_residual, r.threshold)
                   for r in results if not r.passed]
        assert failing == []
