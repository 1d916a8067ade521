import numpy as np
import pytest
from scipy.integrate import quad as scipy_quad

from cmvlab.cmv import DomainError, VerblunskySeq, build_cmv
from cmvlab.ensembles import random_seq
from cmvlab.spectral import (
    QuadratureSpec,
    SingularityError,
    SpectralDecomposition,
    boundary_p_integral,
    boundary_schur_value,
    caratheodory_boundary,
    caratheodory_element,
    eigendecompose_unitary,
    g_function,
    schur_oracle,
    schur_value,
)


def single_atom_sd(theta):
    return SpectralDecomposition(phases=np.array([theta]),
                                 vectors=np.array([[1.0 + 0.0j]]))


def free_seq(n_dim, beta=1.0):
    return VerblunskySeq(alphas=(0,) * (n_dim - 1), beta=beta)


class TestEigendecompose:
    def test_swap_matrix(self):
        sd = eigendecompose_unitary(np.array([[0.0, 1.0], [1.0, 0.0]],
                                             dtype=complex))
        np.testing.assert_allclose(sd.phases, [0.0, np.pi], atol=1e-14)
        w = sd.weights(0, 0).real
        np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-14)

    def test_identity_reconstruction(self):
        sd = eigendecompose_unitary(np.eye(3, dtype=complex))
        np.testing.assert_allclose(sd.phases, 0.0, atol=1e-14)
        for k in range(3):
            assert abs(np.sum(sd.weights(k, k)) - 1.0) <= 1e-12

    def test_random_cmv_reconstruction(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            C = build_cmv(random_seq(rng, 8))
            sd = eigendecompose_unitary(C)
            for n in (1, 3):
                rec = (np.exp(1j * n * sd.phases)[None, :]
                       * sd.vectors) @ sd.vectors.conj().T
                direct = np.linalg.matrix_power(C.entries, n)
                assert np.max(np.abs(rec - direct)) <= 1e-10

    def test_eigenpair_residual(self):
        rng = np.random.default_rng(9)
        C = build_cmv(random_seq(rng, 16))
        sd = eigendecompose_unitary(C)
        res = C.entries @ sd.vectors - sd.vectors * sd.eigenvalues[None, :]
        assert np.max(np.abs(res)) <= 1e-10

    def test_rejects_non_unitary(self):
        with pytest.raises(DomainError):
            eigendecompose_unitary(np.diag([1.0, 2.0]).astype(complex))


class TestCaratheodoryElement:
    def test_z_zero_is_kronecker(self):
        rng = np.random.default_rng(4)
        C = build_cmv(random_seq(rng, 6))
        assert abs(caratheodory_element(C, 2, 2, 0.0) - 1.0) <= 1e-13
        assert abs(caratheodory_element(C, 1, 4, 0.0)) <= 1e-13

    def test_free_case_near_one(self):
        C = build_cmv(free_seq(64))
        for z in (0.3, 0.4j, -0.25 + 0.3j):
            assert abs(caratheodory_element(C, 0, 0, z) - 1.0) <= 1e-8

    def test_single_coefficient_oracle(self):
        # Schur recursion with one nonzero head coefficient gives
        # F(z) = (1 + a z)/(1 - a z) up to O(|z|^(N-1))
        a = 0.4 - 0.3j
        C = build_cmv(VerblunskySeq(alphas=(a,) + (0,) * 63, beta=1.0))
        for z in (0.45, -0.2 + 0.4j, 0.5j):
            expected = (1 + a * z) / (1 - a * z)
            assert abs(caratheodory_element(C, 0, 0, z) - expected) <= 1e-8

    def test_rejects_boundary_z(self):
        C = build_cmv(free_seq(4))
        with pytest.raises(DomainError):
            caratheodory_element(C, 0, 0, 1.0)

    def test_matches_spectral_sum(self):
        rng = np.random.default_rng(12)
        C = build_cmv(random_seq(rng, 8))
        sd = eigendecompose_unitary(C)
        for _ in range(100):
            z = rng.uniform(0.05, 0.9) * np.exp(2j * np.pi * rng.uniform())
            k, l = rng.integers(8, size=2)
            spectral = np.sum(sd.weights(k, l) * (sd.eigenvalues + z)
                              / (sd.eigenvalues - z))
            assert abs(caratheodory_element(C, k, l, z) - spectral) <= 1e-10


class TestCaratheodoryBoundary:
    def test_diagonal_purely_imaginary(self):
        rng = np.random.default_rng(6)
        sd = eigendecompose_unitary(build_cmv(random_seq(rng, 8)))
        for theta in (0.123, 2.5, 4.0):
            F = caratheodory_boundary(sd, 3, 3, theta)
            assert abs(F.real) <= 1e-10

    def test_single_atom_antipodal(self):
        sd = single_atom_sd(0.0)
        assert abs(caratheodory_boundary(sd, 0, 0, np.pi)) <= 1e-14

    def test_matches_radial_limit(self):
        rng = np.random.default_rng(8)
        C = build_cmv(random_seq(rng, 8))
        sd = eigendecompose_unitary(C)
        theta = 1.234
        boundary = caratheodory_boundary(sd, 0, 3, theta)
        radial = caratheodory_element(C, 0, 3,
                                      (1 - 1e-6) * np.exp(1j * theta))
        assert abs(boundary - radial) <= 1e-4

    def test_singularity_error_names_atom(self):
        sd = single_atom_sd(0.7)
        with pytest.raises(SingularityError, match="0.7"):
            caratheodory_boundary(sd, 0, 0, 0.7 + 1e-12)


class TestSchurValue:
    def test_free_case_vanishes(self):
        C = build_cmv(free_seq(64))
        for z in (0.3, -0.4j):
            assert abs(schur_value(C, 0, z)) <= 1e-8

    def test_head_coefficient(self):
        a = 0.35 + 0.2j
        C = build_cmv(VerblunskySeq(alphas=(a,) + (0,) * 63, beta=1.0))
        for z in (0.5, 0.3j):
            assert abs(schur_value(C, 0, z) - a) <= 1e-8
        assert abs(schur_value(C, 0, 0.0) - a) <= 1e-14

    def test_disk_valued(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            C = build_cmv(random_seq(rng, 8))
            z = rng.uniform(0.05, 0.95) * np.exp(2j * np.pi * rng.uniform())
            n = int(rng.integers(8))
            assert abs(schur_value(C, n, z)) <= 1.0 + 1e-10

    def test_zf_inner_toward_boundary(self):
        # |z f(z)| approaches 1 at the boundary off atoms
        rng = np.random.default_rng(23)
        C = build_cmv(random_seq(rng, 8))
        sd = eigendecompose_unitary(C)
        theta = float(sd.phases[0] + 0.5 * (sd.phases[1] - sd.phases[0]))
        z = (1 - 1e-8) * np.exp(1j * theta)
        assert abs(abs(z * schur_value(C, 0, z)) - 1.0) <= 1e-4
        f_exact = boundary_schur_value(sd, 0, theta)
        assert abs(abs(np.exp(1j * theta) * f_exact) - 1.0) <= 1e-12


class TestSchurOracle:
    def test_free_tail_decay(self):
        n_dim = 16
        coeffs = (0,) * (n_dim - 1) + (np.exp(0.9j),)
        for z in (0.5, 0.3 - 0.2j):
            assert abs(schur_oracle(coeffs, z)) <= abs(z) ** (n_dim - 1) + 1e-15

    def test_constant_with_zero_tail(self):
        assert schur_oracle((0.7j, 0.0), 0.4) == 0.7j

    def test_agreement_with_matrix_pipeline(self):
        rng = np.random.default_rng(31)
        for _ in range(10):
            seq = random_seq(rng, 64, r_max=0.9)
            C = build_cmv(seq)
            z = rng.uniform(0.05, 0.5) * np.exp(2j * np.pi * rng.uniform())
            f_matrix = schur_value(C, 0, z)
            f_oracle = schur_oracle(seq.coefficients(), z)
            assert abs(f_matrix - f_oracle) <= 1e-8


class TestGFunction:
    def test_single_atom(self):
        sd = single_atom_sd(0.9)
        theta0 = 2.2
        expected = 1.0 / abs(np.exp(1j * theta0) - np.exp(0.9j)) ** 2
        assert abs(g_function(sd, 0, theta0) - expected) <= 1e-14

    def test_antipodal_quarter(self):
        sd = single_atom_sd(0.0)
        assert abs(g_function(sd, 0, np.pi) - 0.25) <= 1e-14

    def test_parseval_cross_check(self):
        rng = np.random.default_rng(41)
        C = build_cmv(random_seq(rng, 8))
        sd = eigendecompose_unitary(C)
        n = 2
        z = 0.77 * np.exp(1.3j)
        phi = np.zeros(8, dtype=complex)
        phi[n] = 1.0
        x = np.linalg.solve(C.entries - z * np.eye(8), phi)
        vec = C.entries @ x + z * x
        lhs = float(np.vdot(vec, vec).real)
        rhs = float(np.sum(sd.weights(n, n).real
                           * np.abs(sd.eigenvalues + z) ** 2
                           / np.abs(sd.eigenvalues - z) ** 2))
        assert abs(lhs - rhs) <= 1e-9


class TestBoundaryPIntegral:
    # Independent oracle for a single atom: the integrand is
    # |cot(u/2)|^p, and (1/2pi) * integral over the circle equals
    # sec(p pi / 2); confirmed by adaptive quadrature below.

    @pytest.mark.parametrize("p,expected", [
        (0.3, 1.1223262376343608),
        (0.5, 1.4142135623730951),
        (0.7, 2.2026892645852665),
    ])
    def test_single_atom_frozen_values(self, p, expected):
        val, _ = scipy_quad(lambda u: np.abs(1 / np.tan(u / 2)) ** p,
                            0, np.pi, limit=200)
        assert abs(val / np.pi - expected) <= 1e-8
        sd = single_atom_sd(0.7)
        assert abs(boundary_p_integral(sd, 0, 0, p) - expected) <= 1e-4

    def test_free_case_large_n(self):
        # the finite truncation has a purely singular measure, so the
        # integral equals the single-atom value sec(p pi / 2), not 1
        sd = eigendecompose_unitary(build_cmv(free_seq(128, np.exp(0.3j))))
        val = boundary_p_integral(sd, 0, 0, 0.5)
        assert abs(val - 1.4142135623730951) <= 1e-3

    def test_small_p_limit(self):
        rng = np.random.default_rng(55)
        sd = eigendecompose_unitary(build_cmv(random_seq(rng, 8)))
        assert abs(boundary_p_integral(sd, 0, 0, 0.01) - 1.0) <= 2e-2

    def test_rejects_p_outside_interval(self):
        sd = single_atom_sd(0.0)
        with pytest.raises(DomainError):
            boundary_p_integral(sd, 0, 0, 1.5)

    def test_kolmogorov_style_uniform_bound(self):
        rng = np.random.default_rng(60)
        for _ in range(25):
            sd = eigendecompose_unitary(build_cmv(random_seq(rng, 8)))
            k, l = rng.integers(8, size=2)
            for p in (0.3, 0.5, 0.7):
                val = boundary_p_integral(sd, k, l, p)
                assert val <= 2.0 / np.cos(0.5 * np.pi * p)

    def test_quadrature_spec_validation(self):
        with pytest.raises(ValueError):
            QuadratureSpec(gauss_nodes=0)
        with pytest.raises(ValueError):
            QuadratureSpec(rel_tol=2.0)


class TestNormalization:
    def test_weights_sum_to_one(self):
        rng = np.random.default_rng(70)
        for n_dim in (4, 8, 16):
            sd = eigendecompose_unitary(build_cmv(random_seq(rng, n_dim)))
            for k in range(n_dim):
                assert abs(np.sum(sd.weights(k, k)).real - 1.0) <= 1e-12
                assert abs(np.sum(sd.weights(k, k)).imag) <= 1e-12
