"""Multiplicative rank-one perturbations of unitaries.

U_lambda acts like U off the distinguished basis vector and picks up a
unimodular factor on it; concretely it is U with one column scaled.  The
identities checked here tie the perturbed resolvents and spectral data
back to the unperturbed matrix, and specialize to CMV matrices through
the diagonal conjugation identity of the tail-scaling map.
"""

from dataclasses import dataclass

import numpy as np

from .cmv import DomainError, _check_unimodular, build_cmv, diag_pattern, scale_tail
from .spectral import (
    NumericError,
    _as_matrix,
    _check_off_atoms,
    boundary_schur_value,
    caratheodory_element,
    eigendecompose_unitary,
)


class ConsistencyError(RuntimeError):
    """An identity that must hold in exact arithmetic failed numerically."""


@dataclass(frozen=True)
class RankOneFamily:
    """Base unitary, perturbed site, and the circle parameter lambda."""

    base: np.ndarray
    site: int
    lam: complex

    def realize(self):
        return perturb(self.base, self.site, self.lam)


@dataclass(frozen=True)
class ClarkCheckReport:
    """Residuals of the boundary eigenpair formula at one angle."""

    theta0: float
    lambda0: complex
    eigen_residual: float
    formula_residual: float
    overlap: complex


def perturb(U, n, lam):
    """U_lambda = U [(1-P) + lambda P] with P projecting onto delta_n."""
    U = _as_matrix(U)
    lam = _check_unimodular(lam)
    out = U.copy()
    out[:, n] = lam * out[:, n]
    return out


def caratheodory_lambda(f_value, lam, z):
    """F for the lambda-perturbed family from the unperturbed Schur value."""
    lam = _check_unimodular(lam)
    z = complex(z)
    if abs(z) >= 1.0:
        raise DomainError(f"|z| = {abs(z)!r} not strictly inside the disk")
    t = z * complex(f_value) / lam
    if abs(1.0 - t) < 1e-300:
        raise NumericError("denominator 1 - z f / lambda vanished")
    return (1.0 + t) / (1.0 - t)


def _resolvent_apply(U, z, vec):
    return np.linalg.solve(U - z * np.eye(U.shape[0]), vec)


def ratio_invariance_residual(U, n, psi, z, lam):
    """Residual of the lambda-independence of resolvent ratios.

    <psi,(U_lam - z)^{-1} U_lam phi> / <phi, ...> is the same ratio with
    lambda = 1; returns the absolute difference of the two ratios.
    """
    U = _as_matrix(U)
    z = complex(z)
    psi = np.asarray(psi, dtype=complex)
    Ul = perturb(U, n, lam)
    phi = np.zeros(U.shape[0], dtype=complex)
    phi[n] = 1.0

    def ratio(A):
        x = _resolvent_apply(A, z, A @ phi)
        denom = x[n]
        if abs(denom) < 1e-300:
            raise NumericError("denominator <phi, (A - z)^{-1} A phi> vanished")
        return np.vdot(psi, x) / denom

    return abs(ratio(Ul) - ratio(U))


def offdiag_transfer_residual(U, n, psi, z, lam):
    """Residual of the off-diagonal transfer identity.

    For psi orthogonal to delta_n,
    <psi,(U_lam + z)(U_lam - z)^{-1} phi>
      = (1 - z f) / (1 - z f / lambda) * <psi,(U + z)(U - z)^{-1} phi>.
    """
    U = _as_matrix(U)
    lam = _check_unimodular(lam)
    z = complex(z)
    psi = np.asarray(psi, dtype=complex)
    if abs(psi[n]) > 1e-12:
        raise DomainError("psi must be orthogonal to the perturbed site vector")
    Ul = perturb(U, n, lam)
    phi = np.zeros(U.shape[0], dtype=complex)
    phi[n] = 1.0

    def cara_vec(A):
        x = _resolvent_apply(A, z, phi)
        return np.vdot(psi, A @ x + z * x)

    F = caratheodory_element(U, n, n, z)
    if abs(F + 1.0) < 1e-300:
        raise NumericError("Caratheodory value at the pole F = -1")
    zf = z * (F - 1.0) / (z * (F + 1.0))
    denom = 1.0 - zf / lam
    if abs(denom) < 1e-300:
        raise NumericError("transfer prefactor denominator vanished")
    prefactor = (1.0 - zf) / denom
    return abs(cara_vec(Ul) - prefactor * cara_vec(U))


def conjugation_residual(seq, n, lam):
    """Max-norm residual of the tail-scaling conjugation identity.

    U_n C(T_{n, 1/lam}(alpha)) U_n^{-1} = C(alpha) Delta_n(lam), with the
    closure coefficient scaled along with the tail.  Exact for both
    parities of n as long as n <= N - 2.
    """
    lam = _check_unimodular(lam)
    N = seq.n_dim
    if not 0 <= n <= N - 2:
        raise IndexError(f"tail index {n} outside 0..{N - 2}")
    Un = diag_pattern("U", n, lam, N)
    Un_inv = np.conj(Un)
    delta = diag_pattern("Delta", n, lam, N)
    scaled = scale_tail(seq, n, 1.0 / lam)
    lhs = Un @ build_cmv(scaled).entries @ Un_inv
    rhs = build_cmv(seq).entries @ delta
    return float(np.max(np.abs(lhs - rhs)))


def clark_eigen_check(C, n, theta0):
    """Verify the boundary eigenpair formula at angle theta0.

    lambda0 = z0 f(z0) is unimodular off the spectrum; z0 must then be an
    eigenvalue of the lambda0-perturbed matrix, and the eigenvector
    coordinate ratio matches the conjugated resolvent formula.
    """
    U = _as_matrix(C)
    N = U.shape[0]
    sd = eigendecompose_unitary(U)
    _check_off_atoms(sd.phases, theta0)
    z0 = np.exp(1j * float(theta0))
    f0 = boundary_schur_value(sd, n, theta0)
    lam0 = z0 * f0
    if abs(abs(lam0) - 1.0) > 1e-8:
        raise ConsistencyError(f"|z0 f(z0)| = {abs(lam0)!r} not unimodular")
    lam0 = lam0 / abs(lam0)

    Ul = perturb(U, n, lam0)
    sdl = eigendecompose_unitary(Ul)
    dist = np.abs(np.exp(1j * sdl.phases) - z0)
    j = int(np.argmin(dist))
    if dist[j] > 1e-8:
        raise ConsistencyError(
            f"no eigenvalue of the perturbed matrix within 1e-8 of z0 "
            f"(closest at distance {dist[j]:.3e})"
        )
    # within a degenerate cluster, pick the eigenvector with the largest
    # overlap against the perturbed site vector
    cluster = np.nonzero(dist <= dist[j] + 1e-9)[0]
    overlaps = np.abs(sdl.vectors[n, cluster])
    j = int(cluster[np.argmax(overlaps)])
    eta = sdl.vectors[:, j]
    eigen_residual = float(np.max(np.abs(Ul @ eta - z0 * eta)))

    overlap = eta[n]
    if abs(overlap) < 1e-12:
        raise ConsistencyError("eigenvector overlap with the site vector vanished")

    x = np.linalg.solve(U - z0 * np.eye(N), np.eye(N)[:, n])
    scale = np.conj((1.0 - lam0) * z0)
    formula_residual = 0.0
    for m in range(N):
        if m == n:
            continue
        lhs = np.conj(eta[m]) / np.conj(eta[n])
        rhs = scale * np.conj(x[m])
        formula_residual = max(formula_residual, abs(lhs - rhs))

    return ClarkCheckReport(
        theta0=float(theta0),
        lambda0=complex(lam0),
        eigen_residual=eigen_residual,
        formula_residual=float(formula_residual),
        overlap=complex(overlap),
    )


def spectral_average_moments(C, n, m_max, grid_m):
    """Grid averages of <delta_n, U_lambda^m delta_n> over uniform lambda.

    The integrand is a trigonometric polynomial of degree <= m in lambda,
    so the uniform grid average over grid_m > m_max points is the exact
    circle average: 1 for m = 0, and 0 for 1 <= m <= m_max.
    """
    if grid_m <= m_max:
        raise ValueError(f"grid size {grid_m} must exceed m_max = {m_max}")
    U = _as_matrix(C)
    N = U.shape[0]
    phi = np.zeros(N, dtype=complex)
    phi[n] = 1.0
    acc = np.zeros(m_max + 1, dtype=complex)
    for j in range(grid_m):
        lam = np.exp(2j * np.pi * j / grid_m)
        Ul = perturb(U, n, lam)
        x = phi
        acc[0] += 1.0
        for m in range(1, m_max + 1):
            x = Ul @ x
            acc[m] += x[n]
    return acc / grid_m
