"""Seeded random Verblunsky coefficient ensembles.

Two families: rotation-invariant i.i.d. coefficients, and a
quasi-invariant chain whose phases perform a random walk while the
magnitudes stay i.i.d.  Sample i is a pure function of
(master_seed, i): each sample owns a disjoint 2^128-spaced block of a
Philox counter stream, so streams never overlap and any sample can be
regenerated in isolation.
"""

from dataclasses import dataclass

import numpy as np

from .cmv import VerblunskySeq

FAMILIES = ("iid_rotinv", "phase_walk")
RADIAL_LAWS = ("uniform_radius", "fixed_radius", "uniform_disk")
INCREMENT_LAWS = ("uniform", "wrapped_normal")


@dataclass(frozen=True)
class EnsembleSpec:
    """Distribution family, parameters, and master seed."""

    family: str
    radial_law: str
    radial_param: float
    n_dim: int
    master_seed: int
    increment_law: str = "uniform"
    increment_sigma: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown ensemble family {self.family!r}")
        if self.radial_law not in RADIAL_LAWS:
            raise ValueError(f"unknown radial law {self.radial_law!r}")
        if not 0.0 <= self.radial_param < 1.0:
            raise ValueError(
                f"radial parameter {self.radial_param!r} outside [0, 1)"
            )
        # fixed_radius admits 0 so point-mass free ensembles are expressible
        if self.radial_law != "fixed_radius" and self.radial_param <= 0.0:
            raise ValueError("radial scale must be positive")
        if self.increment_law not in INCREMENT_LAWS:
            raise ValueError(f"unknown increment law {self.increment_law!r}")
        if self.increment_sigma <= 0.0:
            raise ValueError("increment sigma must be positive")
        if self.n_dim < 2:
            raise ValueError(f"dimension {self.n_dim} below 2")

    def rng(self, i):
        """Generator for sample i; disjoint counter blocks per sample."""
        bit_gen = np.random.Philox(key=self.master_seed & (2**64 - 1),
                                   counter=int(i) << 128)
        return np.random.Generator(bit_gen)


def _radii(spec, rng, size):
    if spec.radial_law == "fixed_radius":
        return np.full(size, spec.radial_param)
    if spec.radial_law == "uniform_radius":
        return rng.uniform(0.0, spec.radial_param, size)
    # uniform on the disk of radius r_max
    return spec.radial_param * np.sqrt(rng.uniform(0.0, 1.0, size))


def sample_iid_rotinv(spec, i):
    """Independent coefficients with uniform phases; beta uniform."""
    rng = spec.rng(i)
    n_alphas = spec.n_dim - 1
    r = _radii(spec, rng, n_alphas)
    phases = rng.uniform(0.0, 2.0 * np.pi, n_alphas)
    beta_phase = rng.uniform(0.0, 2.0 * np.pi)
    alphas = r * np.exp(1j * phases)
    return VerblunskySeq(alphas=tuple(alphas), beta=np.exp(1j * beta_phase))


def sample_phase_walk(spec, i):
    """Magnitudes i.i.d.; phases walk with i.i.d. increments; beta ends it."""
    rng = spec.rng(i)
    n_alphas = spec.n_dim - 1
    r = _radii(spec, rng, n_alphas)
    if spec.increment_law == "uniform":
        increments = rng.uniform(0.0, 2.0 * np.pi, n_alphas)
    else:
        increments = rng.normal(0.0, spec.increment_sigma, n_alphas)
    phi0 = rng.uniform(0.0, 2.0 * np.pi)
    phases = np.mod(phi0 + np.concatenate([[0.0], np.cumsum(increments)]),
                    2.0 * np.pi)
    alphas = r * np.exp(1j * phases[:-1])
    return VerblunskySeq(alphas=tuple(alphas), beta=np.exp(1j * phases[-1]))


def random_seq(rng, n_dim, r_max=0.95):
    """Convenience draw of one coefficient sequence from a raw generator.

    Magnitudes uniform on a disk of radius r_max, phases uniform; used by
    the verification suite and tests where no ensemble bookkeeping is
    needed.
    """
    n_alphas = n_dim - 1
    r = r_max * np.sqrt(rng.uniform(0.0, 1.0, n_alphas))
    phases = rng.uniform(0.0, 2.0 * np.pi, n_alphas)
    beta = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
    return VerblunskySeq(alphas=tuple(r * np.exp(1j * phases)), beta=beta)


def sample(spec, i):
    if spec.family == "iid_rotinv":
        return sample_iid_rotinv(spec, i)
    return sample_phase_walk(spec, i)


@dataclass(frozen=True)
class SampleStream:
    """Cursor over the sample sequence of one ensemble."""

    spec: EnsembleSpec
    index: int = 0

    def draw(self):
        return sample(self.spec, self.index), SampleStream(self.spec, self.index + 1)

    def __iter__(self):
        i = self.index
        while True:
            yield sample(self.spec, i)
            i += 1
