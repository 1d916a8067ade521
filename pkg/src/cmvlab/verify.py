"""Seeded identity-verification suite.

Each check evaluates an operator identity that holds exactly in finite
dimensions and reports the worst residual seen against its threshold.
The suite is what the `verify` CLI command runs.
"""

from dataclasses import dataclass

import numpy as np

from .cmv import build_cmv, build_lm_factors, scaling_block, theta_block
from .ensembles import random_seq
from .perturbation import (
    clark_eigen_check,
    conjugation_residual,
    offdiag_transfer_residual,
    ratio_invariance_residual,
    spectral_average_moments,
)
from .spectral import eigendecompose_unitary, unitarity_defect


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_residual: float
    threshold: float

    @property
    def passed(self):
        return self.max_residual <= self.threshold


def _random_unimodular(rng):
    return np.exp(2j * np.pi * rng.uniform())


def _random_z(rng, r_max=0.9):
    return rng.uniform(0.05, r_max) * _random_unimodular(rng)


def check_cmv_structure(rng, dims):
    """Unitarity of L, M, C and exact pentadiagonal sparsity."""
    worst = 0.0
    for n in dims:
        for _ in range(5):
            seq = random_seq(rng, n)
            L, M = build_lm_factors(seq)
            C = build_cmv(seq)
            worst = max(worst, unitarity_defect(L), unitarity_defect(M),
                        unitarity_defect(C))
            k, l = np.indices(C.entries.shape)
            off_band = np.abs(C.entries[np.abs(k - l) > 2])
            if off_band.size and np.max(off_band) > 0.0:
                worst = max(worst, float(np.max(off_band)) + 1.0)
    return CheckResult("cmv_unitary_pentadiagonal", worst, 1e-12)


def check_block_scaling(rng, n_trials=100):
    """The 2x2 scaling lemmas behind the conjugation identity."""
    worst = 0.0
    for i in range(n_trials):
        lam = _random_unimodular(rng)
        # near-boundary coefficients; rho is ill-conditioned at |alpha| = 1
        r = 0.999 if i % 10 == 0 else rng.uniform(0.0, 0.999)
        alpha = r * _random_unimodular(rng)
        v = scaling_block(lam, "v")
        vt_inv = np.linalg.inv(scaling_block(lam, "vt"))
        lhs1 = v @ theta_block(alpha / lam) @ v
        lhs2 = vt_inv @ theta_block(alpha / lam) @ vt_inv
        worst = max(worst,
                    float(np.max(np.abs(lhs1 - lam * theta_block(alpha)))),
                    float(np.max(np.abs(lhs2 - theta_block(alpha) / lam))))
    return CheckResult("theta_block_scaling", worst, 1e-13)


def check_ratio_invariance(rng, n_trials=100, n_dim=8):
    worst = 0.0
    for _ in range(n_trials):
        seq = random_seq(rng, n_dim)
        C = build_cmv(seq)
        n = int(rng.integers(n_dim))
        psi = rng.normal(size=n_dim) + 1j * rng.normal(size=n_dim)
        worst = max(worst, ratio_invariance_residual(
            C, n, psi, _random_z(rng), _random_unimodular(rng)))
    return CheckResult("resolvent_ratio_invariance", worst, 1e-10)


def check_offdiag_transfer(rng, n_trials=100, n_dim=8):
    worst = 0.0
    for _ in range(n_trials):
        seq = random_seq(rng, n_dim)
        C = build_cmv(seq)
        n = int(rng.integers(n_dim))
        psi = rng.normal(size=n_dim) + 1j * rng.normal(size=n_dim)
        psi[n] = 0.0
        worst = max(worst, offdiag_transfer_residual(
            C, n, psi, _random_z(rng), _random_unimodular(rng)))
    return CheckResult("offdiag_transfer", worst, 1e-10)


def check_spectral_averaging(rng, n_trials=20, n_dim=8, m_max=16, grid=64):
    worst = 0.0
    for _ in range(n_trials):
        seq = random_seq(rng, n_dim)
        C = build_cmv(seq)
        n = int(rng.integers(n_dim))
        a = spectral_average_moments(C, n, m_max, grid)
        worst = max(worst, abs(a[0] - 1.0), float(np.max(np.abs(a[1:]))))
    return CheckResult("spectral_averaging_moments", worst, 1e-12)


def check_clark_formula(rng, n_trials=20, n_dim=8):
    worst_eig, worst_formula = 0.0, 0.0
    for _ in range(n_trials):
        seq = random_seq(rng, n_dim)
        C = build_cmv(seq)
        sd = eigendecompose_unitary(C)
        # pick an angle inside a random spectral gap, away from the atoms
        j = int(rng.integers(n_dim))
        a = sd.phases[j]
        b = sd.phases[(j + 1) % n_dim] + (2 * np.pi if j == n_dim - 1 else 0.0)
        theta0 = a + (b - a) * rng.uniform(0.25, 0.75)
        report = clark_eigen_check(C, int(rng.integers(n_dim)), theta0)
        worst_eig = max(worst_eig, report.eigen_residual)
        worst_formula = max(worst_formula, report.formula_residual)
    return [CheckResult("clark_eigen_residual", worst_eig, 1e-8),
            CheckResult("clark_formula_residual", worst_formula, 1e-7)]


def check_conjugation(rng, dims, n_trials=10):
    """Flagship exactness sweep of the tail-scaling conjugation identity."""
    worst = 0.0
    for n_dim in dims:
        for n in range(n_dim - 1):
            for _ in range(n_trials):
                seq = random_seq(rng, n_dim)
                worst = max(worst, conjugation_residual(
                    seq, n, _random_unimodular(rng)))
    return CheckResult("tail_scaling_conjugation", worst, 1e-12)


def check_holder_jensen(rng, n_trials=100, p_values=(0.3, 0.5, 0.7)):
    """Interpolation and concave-power inequalities on discrete measures."""
    worst = 0.0
    for _ in range(n_trials):
        n = int(rng.integers(2, 20))
        mu = rng.uniform(0.0, 1.0, n)
        mu /= np.sum(mu)
        g = rng.uniform(0.0, 5.0, n)
        for p in p_values:
            lhs = np.sum(g * mu)
            rhs = (np.sum(g**2 * mu) ** ((1 - p) / (2 - p))
                   * np.sum(g**p * mu) ** (1 / (2 - p)))
            worst = max(worst, lhs - rhs)
            h = rng.uniform(0.0, 5.0, n)
            jensen_lhs = np.sum(h ** (1 / (2 - p)) * mu)
            jensen_rhs = np.sum(h * mu) ** (1 / (2 - p))
            worst = max(worst, jensen_lhs - jensen_rhs)
    return CheckResult("holder_jensen_steps", worst, 1e-12)


def check_power_sum_rule(rng, n_trials=20, n_dim=8):
    """Row sum rule |row of C^n|^2 = 1 for random powers."""
    worst = 0.0
    for _ in range(n_trials):
        seq = random_seq(rng, n_dim)
        sd = eigendecompose_unitary(build_cmv(seq))
        n = int(rng.integers(-50, 51))
        k = int(rng.integers(n_dim))
        row = np.exp(1j * n * sd.phases)[None, :] * sd.vectors[k, :][None, :]
        row = (row @ sd.vectors.conj().T).ravel()
        worst = max(worst, abs(float(np.sum(np.abs(row) ** 2)) - 1.0))
    return CheckResult("power_row_sum_rule", worst, 1e-10)


def run_suite(seed, dims=(4, 6, 8)):
    """Run every identity check; returns a list of CheckResult."""
    rng = np.random.default_rng(seed)
    results = [
        check_cmv_structure(rng, dims),
        check_block_scaling(rng),
        check_ratio_invariance(rng),
        check_offdiag_transfer(rng),
        check_spectral_averaging(rng),
    ]
    results.extend(check_clark_formula(rng))
    results.append(check_conjugation(rng, dims))
    results.append(check_holder_jensen(rng))
    results.append(check_power_sum_rule(rng))
    return results
