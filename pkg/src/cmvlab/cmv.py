"""Finite CMV matrices from Verblunsky coefficients.

A finite unitary of dimension N is obtained by closing the half-line
operator with a unimodular coefficient beta in the last slot; the
corresponding 2x2 block degenerates to a 1x1 entry and decouples the
top-left N x N block exactly.  Everything downstream (spectral data,
perturbation identities, Monte Carlo) runs on these finite matrices.
"""

from dataclasses import dataclass, field

import numpy as np


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


UNIMODULAR_TOL = 1e-10


def _check_unimodular(lam, name="lambda"):
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > UNIMODULAR_TOL:
        raise DomainError(f"{name} must be unimodular, got |{name}| = {abs(lam)!r}")
    return lam


@dataclass(frozen=True)
class VerblunskySeq:
    """Coefficients alpha_0..alpha_{N-2} in the open disk plus the closure beta.

    beta (|beta| = 1) plays the role of the final coefficient alpha_{N-1};
    it makes the dimension-N truncation exactly unitary.
    """

    alphas: tuple
    beta: complex = 1.0 + 0.0j

    def __post_init__(self):
        alphas = tuple(complex(a) for a in self.alphas)
        beta = complex(self.beta)
        n = len(alphas) + 1
        if n < 2:
            raise DomainError(f"need dimension N >= 2, got N = {n}")
        for j, a in enumerate(alphas):
            if abs(a) >= 1.0:
                raise DomainError(f"|alpha_{j}| = {abs(a)!r} not strictly below 1")
        if abs(abs(beta) - 1.0) > 1e-12:
            raise DomainError(f"|beta| = {abs(beta)!r} not unimodular within 1e-12")
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "beta", beta)

    @property
    def n_dim(self):
        return len(self.alphas) + 1

    @property
    def is_odd(self):
        """True when N is odd; the closure entry then sits in the L factor."""
        return self.n_dim % 2 == 1

    def coefficients(self):
        """All N coefficients, with beta in the last slot."""
        return self.alphas + (self.beta,)


@dataclass(frozen=True)
class CmvMatrix:
    """Dense pentadiagonal unitary together with its defining coefficients."""

    entries: np.ndarray = field(repr=False)
    source: VerblunskySeq

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def n_dim(self):
        return self.entries.shape[0]


def theta_block(alpha):
    """2x2 unitary block [[conj(a), rho], [rho, -a]] with rho = sqrt(1-|a|^2).

    Accepts |alpha| = 1 (rho = 0, block decouples); rejects |alpha| > 1.
    """
    alpha = complex(alpha)
    m2 = abs(alpha) ** 2
    if m2 > 1.0 + 1e-14:
        raise DomainError(f"|alpha| = {abs(alpha)!r} exceeds 1")
    rho = np.sqrt(max(1.0 - m2, 0.0))
    return np.array([[np.conj(alpha), rho], [rho, -alpha]], dtype=complex)


def _block_diag_factor(n_dim, coeffs, start):
    """Direct sum of theta blocks at rows start, start+2, ...

    A block whose 2x2 footprint would straddle row n_dim-1 is replaced by
    the 1x1 entry conj(coeffs[n_dim-1]); that coefficient is unimodular by
    construction, so the replacement is exact.
    """
    out = np.eye(n_dim, dtype=complex)
    j = start
    while j <= n_dim - 1:
        if j == n_dim - 1:
            out[j, j] = np.conj(coeffs[j])
        else:
            out[j:j + 2, j:j + 2] = theta_block(coeffs[j])
        j += 2
    return out


def build_lm_factors(seq):
    """The two block-diagonal unitaries L (even slots) and M (odd slots).

    L carries theta blocks at coefficient indices 0, 2, 4, ...; M starts
    with a 1x1 identity and carries blocks at indices 1, 3, 5, ...
    """
    n = seq.n_dim
    coeffs = seq.coefficients()
    L = _block_diag_factor(n, coeffs, 0)
    M = _block_diag_factor(n, coeffs, 1)
    return L, M


def build_cmv(seq):
    """CMV matrix C = L @ M for the given coefficients."""
    L, M = build_lm_factors(seq)
    return CmvMatrix(entries=L @ M, source=seq)


def scale_tail(seq, n, lam):
    """Multiply every coefficient with index >= n (including beta) by lam.

    With |lam| = 1 this preserves all moduli, so the result is again a
    valid coefficient sequence.
    """
    lam = _check_unimodular(lam)
    N = seq.n_dim
    if not 0 <= n <= N - 1:
        raise IndexError(f"tail start {n} outside 0..{N - 1}")
    alphas = tuple(a if j < n else lam * a for j, a in enumerate(seq.alphas))
    beta = seq.beta if n > N - 1 else lam * seq.beta
    # renormalize beta exactly onto the circle against accumulated rounding
    beta = beta / abs(beta)
    return VerblunskySeq(alphas=alphas, beta=beta)


def diag_pattern(kind, n, lam, n_dim):
    """Diagonal unitary pattern matrices, truncated to n_dim entries.

    kind "U":     the conjugating diagonal for tail index n; for odd
                  n = 2k-1 it is 1^(2k) followed by alternating (1, lam),
                  for even n = 2k it is lam^(2k) followed by (1, lam).
    kind "Delta": ones with a single lam in slot n.
    kind "W":     lam^(-1) repeated n+1 times, then ones.
    kind "Wt":    lam repeated n times, then ones.
    """
    lam = _check_unimodular(lam)
    if n < 0 or n >= n_dim:
        raise IndexError(f"pattern index {n} outside 0..{n_dim - 1}")
    d = np.ones(n_dim, dtype=complex)
    if kind == "Delta":
        d[n] = lam
    elif kind == "U":
        head = n + 1 if n % 2 == 1 else n
        head_val = 1.0 if n % 2 == 1 else lam
        d[:head] = head_val
        tail = np.arange(n_dim - head)
        d[head:] = np.where(tail % 2 == 0, 1.0, lam)
    elif kind == "W":
        d[:n + 1] = 1.0 / lam
    elif kind == "Wt":
        d[:n] = lam
    else:
        raise ValueError(f"unknown diagonal pattern kind {kind!r}")
    return np.diag(d)


def scaling_block(lam, variant="v"):
    """The 2x2 diagonals diag(1, lam) ("v") and diag(lam, 1) ("vt")."""
    lam = _check_unimodular(lam)
    if variant == "v":
        return np.diag([1.0 + 0.0j, lam])
    if variant == "vt":
        return np.diag([lam, 1.0 + 0.0j])
    raise ValueError(f"unknown scaling block variant {variant!r}")
