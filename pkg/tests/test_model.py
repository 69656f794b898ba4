import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given
from hypothesis import strategies as st

from regulator.errors import NotPositiveDefinite, SingularResolvent
from regulator.fem import Coefficient1D, assemble_heat_1d
from regulator.model import (GalerkinSystem, SignalSpec, StateSpace, eval_signal,
                             rosenbrock_full_rank, to_standard_form, transfer_value)

from conftest import small_systems


def heat_plant(N):
    G = assemble_heat_1d(lambda x: (2 - x) / 4, lambda x: 12 * x,
                         [Coefficient1D.indicator(0.25, 0.5, 4)],
                         [Coefficient1D.indicator(0.5, 0.75, 4)], N)
    return G, to_standard_form(G)[0]


# ---- to_standard_form ----------------------------------------------------------

def test_identity_mass_is_passthrough(rng):
    A, B, C = rng.standard_normal((4, 4)), rng.standard_normal((4, 2)), rng.standard_normal((1, 4))
    sys, _, _ = to_standard_form(GalerkinSystem(np.eye(4), A, B, C))
    assert np.allclose(sys.A, A) and np.allclose(sys.B, B) and np.allclose(sys.C, C)


def test_scalar_mass():
    sys, T, _ = to_standard_form(GalerkinSystem(np.array([[4.0]]), np.array([[-4.0]]),
                                                np.ones((1, 1)), np.ones((1, 1))))
    assert sys.A[0, 0] == pytest.approx(-1.0)
    assert T.L[0, 0] == pytest.approx(2.0)


def test_standard_form_matches_generalized_eigenvalues():
    G, sys = heat_plant(10)
    ev = np.sort(np.linalg.eigvals(sys.A).real)
    gev = np.sort(sla.eigh(G.dense("A_f"), G.dense("M"), eigvals_only=True))
    assert np.allclose(ev, gev, rtol=1e-10, atol=1e-10)


def test_indefinite_mass_rejected():
    with pytest.raises(NotPositiveDefinite):
        to_standard_form(GalerkinSystem(np.diag([1.0, -1.0]), np.eye(2), np.ones(2), np.ones(2)))


def test_standard_form_preserves_transfer_function():
    G, sys = heat_plant(20)
    M, Af = G.dense("M"), G.dense("A_f")
    for lam in (0.3j, 2.0 + 1j, 10j):
        direct = G.C_f @ np.linalg.solve(lam * M - Af, G.B_f)
        assert np.allclose(transfer_value(sys, lam), direct, rtol=1e-10)


def test_cholesky_transform_roundtrip(rng):
    G, _ = heat_plant(8)
    _, T, _ = to_standard_form(G)
    c = rng.standard_normal(G.n)
    assert np.allclose(T.from_standard(T.to_standard(c)), c)


# ---- transfer_value ------------------------------------------------------------

def test_transfer_scalar():
    sys = StateSpace([[-1.0]], [[1.0]], [[1.0]])
    assert transfer_value(sys, 0.0)[0, 0] == pytest.approx(1.0)


@given(small_systems(max_n=6, stable=True))
def test_transfer_decays_at_infinity(sys):
    assert np.linalg.norm(transfer_value(sys, 1e6) - sys.D) <= 1e-4 * max(
        1.0, np.linalg.norm(sys.B) * np.linalg.norm(sys.C))


def test_transfer_singular_resolvent():
    with pytest.raises(SingularResolvent):
        transfer_value(StateSpace([[0.0]], [[1.0]], [[1.0]]), 0.0)


def test_heat_transfer_agrees_across_refinement():
    _, s100 = heat_plant(100)
    _, s200 = heat_plant(200)
    a, b = transfer_value(s100, 1j)[0, 0], transfer_value(s200, 1j)[0, 0]
    assert abs(a - b) <= 5e-4 * abs(b)


# ---- signals -------------------------------------------------------------------

def test_reference_at_zero():
    ref = SignalSpec.harmonic(1, [(1, 1, 0), (2, 0, 0.5), (3, -2, 0)])
    assert eval_signal(ref, 0.0)[0] == pytest.approx(-1.0)
    t = 0.7
    assert ref(t)[0] == pytest.approx(np.cos(t) + 0.5 * np.sin(2 * t) - 2 * np.cos(3 * t))


def test_zero_signal():
    s = SignalSpec((1.0, 2.0), (((0.0,),), ((0.0,),)), (((0.0,),), ((0.0,),)), 1)
    assert np.all(eval_signal(s, np.linspace(0, 5, 11)) == 0)


def test_constant_at_zero_frequency():
    s = SignalSpec((0.0,), (((2.5,),),), (((0.0,),),), 1)
    assert np.allclose(s(np.linspace(0, 10, 7)), 2.5)


def test_polynomial_coefficients():
    s = SignalSpec((1.0,), (((1.0, 2.0),),), (((0.0, 0.0, 3.0),),), 1)
    t = 1.3
    assert s(t)[0] == pytest.approx((1 + 2 * t) * np.cos(t) + 3 * t**2 * np.sin(t))
    assert s.orders == (3,)


def test_signal_validation():
    with pytest.raises(ValueError):
        SignalSpec((2.0, 1.0), (), (), 1)
    with pytest.raises(ValueError):
        SignalSpec((1.0,), (((1.0, 1.0),),), (), 1, orders=(1,))


coeff = st.floats(-5, 5, allow_nan=False)


@given(st.lists(st.tuples(st.sampled_from([0.0, 1.0, 2.5]), coeff, coeff), min_size=1, max_size=4),
       st.lists(st.tuples(st.sampled_from([0.0, 1.0, 2.5]), coeff, coeff), min_size=1, max_size=4),
       coeff, st.floats(0, 20))
def test_eval_signal_is_linear(terms1, terms2, a, t):
    s1, s2 = SignalSpec.harmonic(1, terms1), SignalSpec.harmonic(1, terms2)
    combo = SignalSpec.harmonic(1, [(w, a * c, a * s) for w, c, s in terms1] + terms2)
    assert combo(t)[0] == pytest.approx(a * s1(t)[0] + s2(t)[0], abs=1e-9)


# ---- Rosenbrock ----------------------------------------------------------------

def test_rosenbrock_examples():
    sys = StateSpace([[-1.0]], [[1.0]], [[1.0]])
    assert rosenbrock_full_rank(sys, 0.0)[0]
    dead = StateSpace([[-1.0]], [[0.0]], [[1.0]])
    for w in (0.0, 1.0, 3.0):
        assert not rosenbrock_full_rank(dead, w)[0]


def test_rosenbrock_heat_frequencies():
    _, sys = heat_plant(100)
    for w in (1, 2, 3, 4):
        assert rosenbrock_full_rank(sys, w)[0]


def test_rosenbrock_detects_transmission_zero():
    # P(s) = (s^2 + 1) / (s + 1)^3 vanishes at s = i
    A = np.array([[-3.0, -3.0, -1.0], [1, 0, 0], [0, 1, 0]])
    sys = StateSpace(A, [[1.0], [0], [0]], [[1.0, 0.0, 1.0]])
    assert not rosenbrock_full_rank(sys, 1.0)[0]
    assert rosenbrock_full_rank(sys, 2.0)[0]


@given(small_systems(max_n=5), st.integers(0, 2**31 - 1), st.floats(0, 5))
def test_rosenbrock_invariant_under_state_feedback(sys, seed, w):
    K = np.random.default_rng(seed).standard_normal((sys.m, sys.n))
    fb = StateSpace(sys.A + sys.B @ K, sys.B, sys.C + sys.D @ K, sys.D)
    ok1, m1 = rosenbrock_full_rank(sys, w, 1e-6)
    ok2, m2 = rosenbrock_full_rank(fb, w, 1e-6)
    if min(m1, m2) > 1e-4 or max(m1, m2) < 1e-9:
        assert ok1 == ok2
