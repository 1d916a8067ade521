"""Property-based checks over generated coefficient data."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from cmvlab.cmv import VerblunskySeq, build_cmv, scale_tail, theta_block
from cmvlab.reporting import fmt
from cmvlab.spectral import schur_oracle

disk_point = st.tuples(
    st.floats(0.0, 0.95), st.floats(0.0, 2 * np.pi),
).map(lambda r_t: r_t[0] * np.exp(1j * r_t[1]))

circle_point = st.floats(0.0, 2 * np.pi).map(lambda t: np.exp(1j * t))

alpha_lists = st.lists(disk_point, min_size=1, max_size=8)


def make_seq(alphas, beta):
    return VerblunskySeq(alphas=tuple(alphas), beta=beta)


@given(disk_point)
def test_theta_block_always_unitary(alpha):
    T = theta_block(alpha)
    assert np.max(np.abs(T.conj().T @ T - np.eye(2))) <= 1e-14


@given(alpha_lists, circle_point)
@settings(max_examples=50)
def test_cmv_always_unitary(alphas, beta):
    C = build_cmv(make_seq(alphas, beta)).entries
    n = C.shape[0]
    assert np.max(np.abs(C.conj().T @ C - np.eye(n))) <= 1e-12


@given(alpha_lists, circle_point, circle_point, circle_point,
       st.integers(0, 7))
@settings(max_examples=50)
def test_scale_tail_composes(alphas, beta, lam, mu, n):
    seq = make_seq(alphas, beta)
    n = min(n, seq.n_dim - 1)
    twice = scale_tail(scale_tail(seq, n, lam), n, mu)
    once = scale_tail(seq, n, lam * mu)
    assert np.max(np.abs(np.array(twice.alphas) - np.array(once.alphas))) \
        <= 1e-14
    assert abs(twice.beta - once.beta) <= 1e-14


@given(alpha_lists, circle_point, disk_point)
@settings(max_examples=100)
def test_schur_recursion_disk_valued(alphas, beta, z):
    seq = make_seq(alphas, beta)
    if abs(z) >= 1.0:
        return
    assert abs(schur_oracle(seq.coefficients(), z)) <= 1.0 + 1e-12


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips_floats(x):
    assert float(fmt(x)) == x
