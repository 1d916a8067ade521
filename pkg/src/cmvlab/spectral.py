"""Exact spectral data of finite unitaries.

Finite unitary matrices have pure point spectrum, so the spectral measure
attached to a pair of basis vectors is a finite sum of atoms.  Boundary
values of the Caratheodory matrix elements are therefore exact off the
atoms, and the fractional boundary integrals reduce to quadrature of an
explicit function with known singularity locations.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .cmv import CmvMatrix, DomainError

TWO_PI = 2.0 * np.pi

#: angular exclusion radius around atoms for boundary evaluation
DELTA_MIN = 1e-9

#: phases closer than this are merged into a single atom
CLUSTER_TOL = 1e-9


class SingularityError(ValueError):
    """Boundary evaluation requested too close to an atom."""


class NumericError(RuntimeError):
    """A numerical routine failed to reach its accuracy contract."""


class ConvergenceError(NumericError):
    """Quadrature refinement stalled; carries the last two estimates."""

    def __init__(self, message, estimates):
        super().__init__(message)
        self.estimates = estimates


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls the graded Gauss quadrature for boundary integrals."""

    panels_per_gap: int = 4
    gauss_nodes: int = 16
    grading: float = 3.0
    rel_tol: float = 1e-6
    max_doublings: int = 7

    def __post_init__(self):
        if self.panels_per_gap <= 0 or self.gauss_nodes <= 0:
            raise ValueError("panel and node counts must be positive")
        if self.grading <= 0:
            raise ValueError("grading exponent must be positive")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("relative tolerance must lie in (0, 1)")


@dataclass(frozen=True)
class SpectralDecomposition:
    """Sorted eigenphases and a unitary eigenbasis of a finite unitary."""

    phases: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float)
        vectors = np.asarray(self.vectors, dtype=complex)
        phases.setflags(write=False)
        vectors.setflags(write=False)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "vectors", vectors)

    @property
    def n_dim(self):
        return self.phases.shape[0]

    @property
    def eigenvalues(self):
        return np.exp(1j * self.phases)

    def weights(self, k, l):
        """Rank-one spectral weights w_j(k, l) = <delta_k, P_j delta_l>."""
        return self.vectors[k, :] * np.conj(self.vectors[l, :])

    def merged_atoms(self, k, l):
        """(phases, weights) with clusters within CLUSTER_TOL merged."""
        w = self.weights(k, l)
        phases = self.phases
        out_phases, out_weights = [], []
        j = 0
        n = len(phases)
        while j < n:
            m = j + 1
            while m < n and phases[m] - phases[m - 1] <= CLUSTER_TOL:
                m += 1
            block = slice(j, m)
            out_phases.append(np.mean(phases[block]))
            out_weights.append(np.sum(w[block]))
            j = m
        return np.asarray(out_phases), np.asarray(out_weights)


def _as_matrix(C):
    return C.entries if isinstance(C, CmvMatrix) else np.asarray(C, dtype=complex)


def unitarity_defect(U):
    U = _as_matrix(U)
    return np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0])))


def eigendecompose_unitary(C):
    """Spectral decomposition of a unitary via its complex Schur form.

    For a normal matrix the Schur triangle is diagonal up to rounding, so
    the Schur basis is an orthonormal eigenbasis.  Columns are reordered
    by eigenphase in [0, 2pi).
    """
    U = _as_matrix(C)
    defect = unitarity_defect(U)
    if defect > 1e-10:
        raise DomainError(f"matrix is not unitary: max defect {defect:.3e}")
    T, Z = scipy.linalg.schur(U, output="complex")
    eigvals = np.diag(T)
    phases = np.mod(np.angle(eigvals), TWO_PI)
    order = np.argsort(phases, kind="stable")
    phases = phases[order]
    Z = Z[:, order]
    residual = np.max(np.abs(U @ Z - Z * np.exp(1j * phases)[None, :]))
    if residual > 1e-10:
        raise NumericError(
            f"eigenpair residual {residual:.3e} exceeds 1e-10 "
            f"(unitarity defect {defect:.3e}, "
            f"condition estimate {np.linalg.cond(U):.3e})"
        )
    return SpectralDecomposition(phases=phases, vectors=Z)


def caratheodory_element(C, k, l, z):
    """[(C+z)(C-z)^{-1}]_{kl} for |z| < 1 by a single linear solve."""
    U = _as_matrix(C)
    z = complex(z)
    if abs(z) >= 1.0:
        raise DomainError(f"|z| = {abs(z)!r} not strictly inside the disk")
    n = U.shape[0]
    rhs = np.zeros(n, dtype=complex)
    rhs[l] = 1.0
    x = np.linalg.solve(U - z * np.eye(n), rhs)
    return (U @ x)[k] + z * x[k]


def _check_off_atoms(phases, theta, delta_min=DELTA_MIN):
    d = np.abs(np.angle(np.exp(1j * (phases - theta))))
    j = int(np.argmin(d))
    if d[j] < delta_min:
        raise SingularityError(
            f"theta = {theta!r} within {delta_min} of eigenphase {phases[j]!r}"
        )


def caratheodory_boundary(sd, k, l, theta):
    """Boundary value of F_{kl} from the pure point spectral form.

    Exact off atoms for finite matrices; raises SingularityError within
    DELTA_MIN of any eigenphase.
    """
    _check_off_atoms(sd.phases, theta)
    z = np.exp(1j * float(theta))
    zj = sd.eigenvalues
    return np.sum(sd.weights(k, l) * (zj + z) / (zj - z))


def schur_value(C, n, z):
    """Schur function f of the spectral measure of (C, delta_n) at z.

    Defined through F = (1 + z f)/(1 - z f); at z = 0 the limiting value
    F'(0)/2 = conj(C_nn) is returned directly.
    """
    U = _as_matrix(C)
    z = complex(z)
    if abs(z) >= 1.0:
        raise DomainError(f"|z| = {abs(z)!r} not strictly inside the disk")
    if z == 0:
        return np.conj(U[n, n])
    F = caratheodory_element(U, n, n, z)
    if abs(F + 1.0) < 1e-300:
        raise NumericError("Caratheodory value at the pole F = -1")
    return (F - 1.0) / (z * (F + 1.0))


def boundary_schur_value(sd, n, theta):
    """Exact boundary Schur value from the pure point Caratheodory form."""
    F = caratheodory_boundary(sd, n, n, theta)
    z = np.exp(1j * float(theta))
    if abs(F + 1.0) < 1e-300:
        raise NumericError("Caratheodory boundary value at the pole F = -1")
    return (F - 1.0) / (z * (F + 1.0))


def schur_oracle(coefficients, z):
    """Classical Schur-algorithm recursion, independent of any matrix.

    coefficients holds the full list ending with the closure; the
    recursion runs backwards from f = last entry:
    f_j = (a_j + z f_{j+1}) / (1 + conj(a_j) z f_{j+1}).
    """
    z = complex(z)
    if abs(z) >= 1.0:
        raise DomainError(f"|z| = {abs(z)!r} not strictly inside the disk")
    coefficients = [complex(a) for a in coefficients]
    f = coefficients[-1]
    for a in reversed(coefficients[:-1]):
        f = (a + z * f) / (1.0 + np.conj(a) * z * f)
    return f


def g_function(sd, n, theta0):
    """G(e^{i theta0}) = sum_j w_j(n,n) / |e^{i theta0} - e^{i theta_j}|^2."""
    _check_off_atoms(sd.phases, theta0)
    z = np.exp(1j * float(theta0))
    w = sd.weights(n, n).real
    return float(np.sum(w / np.abs(z - sd.eigenvalues) ** 2))


def _gauss_rule(nodes):
    return _gauss_rule_cached(int(nodes))


@lru_cache(maxsize=8)
def _gauss_rule_cached(nodes):
    x, w = np.polynomial.legendre.leggauss(nodes)
    # map from [-1, 1] to [0, 1]
    return 0.5 * (x + 1.0), 0.5 * w


def _graded_offsets(h, m, quad, s):
    """Signed-magnitude offsets and weights for one half-gap of width h.

    Substitutes u = h * t^s on m equal t-subpanels; the Jacobian absorbs
    the |u|^{-p} endpoint singularity.  Offsets are kept separate from
    the absolute atom angle so the singular term can be evaluated without
    catastrophic rounding.
    """
    x, w = _gauss_rule(quad.gauss_nodes)
    edges = np.linspace(0.0, 1.0, m + 1)
    t = (edges[:-1, None] + np.diff(edges)[:, None] * x[None, :]).ravel()
    wt = (np.diff(edges)[:, None] * w[None, :]).ravel()
    return h * t ** s, wt * h * s * t ** (s - 1.0)


def _eval_abs_F_p(phases, weights, atom_idx, atom_angle, offsets, p):
    """|F|^p at angles atom_angle + offsets, summed over atoms.

    The term of the adjacent atom is computed from the offset via expm1,
    which stays accurate when the offset is far below the rounding
    granularity of the absolute angle.
    """
    out = np.empty_like(offsets)
    zj = np.delete(np.exp(1j * phases), atom_idx)
    wj = np.delete(weights, atom_idx)
    wa = weights[atom_idx]
    chunk = max(1, 8_388_608 // max(len(phases), 1))
    for start in range(0, len(offsets), chunk):
        u = offsets[start:start + chunk]
        z = np.exp(1j * (atom_angle + u))
        F = np.sum(wj[None, :] * (zj[None, :] + z[:, None])
                   / (zj[None, :] - z[:, None]), axis=1)
        F += wa * (1.0 + np.exp(1j * u)) / (-np.expm1(1j * u))
        out[start:start + chunk] = np.abs(F) ** p
    return out


def _p_integral_estimate(phases, weights, p, quad, m):
    s = max(quad.grading, 2.0 / (1.0 - p))
    n = len(phases)
    total = 0.0
    for i in range(n):
        a = phases[i]
        b = phases[(i + 1) % n] + (TWO_PI if i == n - 1 else 0.0)
        half = 0.5 * (b - a)
        u, w = _graded_offsets(half, m, quad, s)
        total += float(np.dot(w, _eval_abs_F_p(
            phases, weights, i, a, u, p)))
        total += float(np.dot(w, _eval_abs_F_p(
            phases, weights, (i + 1) % n, b, -u, p)))
    return total / TWO_PI


def boundary_p_integral(sd, k, l, p, quad=QuadratureSpec()):
    """Integral of |F_{kl}(e^{i theta})|^p d theta / 2 pi for 0 < p < 1.

    Composite Gauss quadrature on panels between consecutive merged
    eigenphases, with a power substitution that resolves the integrable
    |theta - theta_j|^{-p} endpoint singularities.  Converged by panel
    doubling to quad.rel_tol.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"p = {p!r} outside (0, 1)")
    phases, weights = sd.merged_atoms(k, l)
    m = quad.panels_per_gap
    prev = _p_integral_estimate(phases, weights, p, quad, m)
    for _ in range(quad.max_doublings):
        m *= 2
        cur = _p_integral_estimate(phases, weights, p, quad, m)
        if abs(cur - prev) <= quad.rel_tol * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise ConvergenceError(
        f"p-integral failed to converge to rel tol {quad.rel_tol}",
        estimates=(prev, cur),
    )
