import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regulator.balred import (balanced_truncate, evaluation_noise, frequency_grid, gramians,
                              hankel_values, sampled_hinf_error)
from regulator.errors import NotStable, RankCollapse
from regulator.linalg import lyapunov_residual, spectral_abscissa
from regulator.model import StateSpace, transfer_value

from conftest import random_system


@st.composite
def stable_systems(draw, max_n=10):
    seed = draw(st.integers(0, 2**31 - 1))
    n = draw(st.integers(2, max_n))
    return random_system(np.random.default_rng(seed), n, draw(st.integers(1, 2)),
                         draw(st.integers(1, 2)), stable=True, shift=0.3)


def test_scalar_gramians():
    P, Q = gramians(StateSpace([[-1.0]], [[1.0]], [[1.0]]))
    assert P[0, 0] == pytest.approx(0.5) and Q[0, 0] == pytest.approx(0.5)
    assert hankel_values(P, Q) == pytest.approx([0.5])


def test_zero_input_gramian():
    P, _ = gramians(StateSpace(-np.eye(3), np.zeros((3, 1)), np.ones((1, 3))))
    assert np.all(P == 0)


def test_gramians_reject_unstable():
    with pytest.raises(NotStable):
        gramians(StateSpace([[1.0]], [[1.0]], [[1.0]]))


def test_random_gramian_residuals(rng):
    sys = random_system(rng, 15, 2, 2, stable=True)
    P, Q = gramians(sys)
    assert lyapunov_residual(sys.A, P, sys.B @ sys.B.T) <= 1e-9
    assert lyapunov_residual(sys.A.T, Q, sys.C.T @ sys.C) <= 1e-9


def test_hankel_values_examples():
    assert hankel_values(np.diag([1.0, 0.0]), np.eye(2)) == pytest.approx([1.0, 0.0])


@given(stable_systems(), st.integers(0, 1000))
def test_hankel_values_similarity_invariant(sys, seed):
    T = np.random.default_rng(seed).standard_normal((sys.n, sys.n)) + 3 * np.eye(sys.n)
    s1 = hankel_values(*gramians(sys))
    s2 = hankel_values(*gramians(sys.transformed(T)))
    assert np.allclose(s1, s2, rtol=1e-7, atol=1e-8 * s1[0])
    assert np.all(np.diff(s1) <= 0)


def test_full_order_keeps_transfer_function(rng):
    sys = random_system(rng, 6, 1, 1, stable=True)
    tr = balanced_truncate(sys, 6)
    assert tr.order == 6 and tr.bound == 0.0
    for w in (0.0, 0.5, 3.0, 40.0):
        assert np.allclose(transfer_value(tr.reduced, 1j * w), transfer_value(sys, 1j * w),
                           rtol=1e-10, atol=1e-12)


def test_two_state_truncation_keeps_slow_mode():
    eps = 1e-6
    a = np.array([-1.0, -100.0])
    b = np.array([1.0, eps])
    sys = StateSpace(np.diag(a), b[:, None], b[None, :])
    # oracle: explicit Gramians of a diagonal system, P_ij = b_i b_j / -(a_i + a_j)
    P = np.outer(b, b) / -(a[:, None] + a[None, :])
    sig = np.sqrt(np.sort(np.linalg.eigvals(P @ P).real)[::-1])
    tr = balanced_truncate(sys, 1)
    assert tr.hankel == pytest.approx(sig, rel=1e-8, abs=1e-12)
    assert tr.reduced.A[0, 0] == pytest.approx(-1.0, rel=1e-8)
    assert (tr.reduced.B @ tr.reduced.C)[0, 0] == pytest.approx(1.0, rel=1e-8)


def test_truncate_validates_order(rng):
    sys = random_system(rng, 4, 1, 1, stable=True)
    with pytest.raises(ValueError):
        balanced_truncate(sys, 0)
    with pytest.raises(ValueError):
        balanced_truncate(sys, 5)
    with pytest.raises(RankCollapse):
        balanced_truncate(StateSpace(-np.eye(2), np.zeros((2, 1)), np.ones((1, 2))), 1)


def test_sampled_error_examples(rng):
    sys = random_system(rng, 4, 1, 1, stable=True)
    grid = frequency_grid()
    assert sampled_hinf_error(sys, sys, grid) == 0.0
    shifted = StateSpace(sys.A, sys.B, sys.C, sys.D + 1)
    assert sampled_hinf_error(sys, shifted, grid) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sampled_hinf_error(sys, random_system(rng, 3, 2, 1, stable=True), grid)


def test_frequency_grid_layout():
    g = frequency_grid((1.0, 2.0, 3.0, 4.0))
    assert len(g) == 204 and g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1e4)
    assert np.all(np.diff(g) > 0)


@given(stable_systems(max_n=12), st.integers(1, 11))
def test_truncation_properties(sys, r):
    r = min(r, sys.n)
    tr = balanced_truncate(sys, r)
    assert spectral_abscissa(tr.reduced.A) < 0
    assert tr.reduced.n == tr.order <= r
    err = sampled_hinf_error(sys, tr.reduced, frequency_grid())
    assert err <= tr.bound + 1e-6
    sig_r = hankel_values(*gramians(tr.reduced))
    assert np.allclose(sig_r, tr.hankel[:tr.order], rtol=1e-7, atol=1e-7 * tr.hankel[0])


@given(stable_systems(max_n=10))
def test_bound_nonincreasing_in_r(sys):
    bounds = [balanced_truncate(sys, r).bound for r in range(1, sys.n + 1)]
    assert all(b2 <= b1 + 1e-15 for b1, b2 in zip(bounds, bounds[1:]))


def test_evaluation_noise_tiny_for_benign_system(rng):
    sys = random_system(rng, 8, 1, 1, stable=True)
    assert evaluation_noise(sys, frequency_grid()) <= 1e-10
