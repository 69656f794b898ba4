import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regulator import linalg
from regulator.errors import ImaginaryAxisEigenvalue, NotStable, StabilizabilityFailure

from conftest import random_system, small_systems


def kron_lyapunov(A, W):
    """Independent oracle: the vectorized n^2 x n^2 linear system."""
    n = A.shape[0]
    L = np.kron(np.eye(n), A) + np.kron(A, np.eye(n))
    return np.linalg.solve(L, -W.reshape(-1, order="F")).reshape((n, n), order="F")


# ---- Lyapunov ---------------------------------------------------------------

@pytest.mark.parametrize("a, w, x", [(-2.0, 4.0, 1.0), (-1.0, 1.0, 0.5)])
def test_lyapunov_scalar(a, w, x):
    X = linalg.solve_lyapunov(np.array([[a]]), np.array([[w]]))
    assert X[0, 0] == pytest.approx(x, rel=1e-14)


def test_lyapunov_2x2_against_vectorized_system():
    A = np.array([[-1.0, 1.0], [0.0, -2.0]])
    W = np.eye(2)
    X = linalg.solve_lyapunov(A, W)
    assert np.allclose(X, kron_lyapunov(A, W), atol=1e-14)
    assert np.linalg.norm(A @ X + X @ A.T + W) <= 1e-10


def test_lyapunov_rejects_unstable():
    with pytest.raises(NotStable):
        linalg.solve_lyapunov(np.array([[0.1]]), np.array([[1.0]]))


def test_lyapunov_shape_mismatch():
    with pytest.raises(ValueError):
        linalg.solve_lyapunov(-np.eye(2), np.eye(3))


@given(small_systems(max_n=8, stable=True))
def test_lyapunov_residual_symmetry_and_psd(sys):
    W = sys.B @ sys.B.T
    X = linalg.solve_lyapunov(sys.A, W)
    assert linalg.lyapunov_residual(sys.A, X, W) <= linalg.LYAP_TOL
    assert np.array_equal(X, X.T)
    assert np.linalg.eigvalsh(X).min() >= -1e-8 * max(1.0, np.abs(X).max())
    assert np.allclose(X, kron_lyapunov(sys.A, W), rtol=1e-7, atol=1e-9)


# ---- CARE -------------------------------------------------------------------

def test_care_scalar_positive_root():
    X = linalg.solve_care(np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]),
                          np.array([[1.0]]))
    assert X[0, 0] == pytest.approx(1 + np.sqrt(2), rel=1e-12)


def test_care_zero_input_stable_plant():
    X = linalg.solve_care(np.array([[-1.0]]), np.array([[0.0]]), np.array([[1.0]]),
                          np.array([[0.0]]))
    assert abs(X[0, 0]) <= 1e-14


def test_care_random_n20(rng):
    sys = random_system(rng, 20, 2, 2)
    X = linalg.solve_care(sys.A, sys.B, np.eye(2), np.eye(20))
    assert linalg.care_residual(sys.A, sys.B, np.eye(2), np.eye(20), X) <= 1e-8
    assert linalg.spectral_abscissa(sys.A - sys.B @ sys.B.T @ X) < 0


def test_care_against_scipy(rng):
    import scipy.linalg as sla
    sys = random_system(rng, 12, 3, 1)
    R = np.diag([1.0, 2.0, 0.5])
    X = linalg.solve_care(sys.A, sys.B, R, np.eye(12))
    Xs = sla.solve_continuous_are(sys.A, sys.B, np.eye(12), R)
    assert np.allclose(X, Xs, rtol=1e-8, atol=1e-10)


def test_care_imaginary_axis_hamiltonian():
    # undamped oscillator without input: Hamiltonian eigenvalues sit on the axis
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    with pytest.raises(StabilizabilityFailure):
        linalg.solve_care(A, np.zeros((2, 1)), np.eye(1), np.eye(2))


def test_imaginary_axis_error_is_stabilizability_failure():
    assert issubclass(ImaginaryAxisEigenvalue, StabilizabilityFailure)


@given(small_systems(max_n=7))
def test_care_properties(sys):
    n, m = sys.n, sys.m
    X = linalg.solve_care(sys.A, sys.B, np.eye(m), np.eye(n))
    assert linalg.care_residual(sys.A, sys.B, np.eye(m), np.eye(n), X) <= linalg.CARE_TOL
    assert np.array_equal(X, X.T)
    assert np.linalg.eigvalsh(X).min() >= -1e-8 * max(1.0, np.abs(X).max())
    assert linalg.spectral_abscissa(sys.A - sys.B @ sys.B.T @ X) < 0


@given(small_systems(max_n=7))
def test_filter_care_is_transposed_care(sys):
    n, p = sys.n, sys.p
    S = linalg.solve_filter_care(sys.A, sys.C, np.eye(p), np.eye(n))
    res = sys.A @ S + S @ sys.A.T - S @ sys.C.T @ sys.C @ S + np.eye(n)
    scale = np.linalg.norm(sys.A @ S) * 2 + np.linalg.norm(S @ sys.C.T @ sys.C @ S) + np.sqrt(n)
    assert np.linalg.norm(res) / max(1.0, scale) <= linalg.CARE_TOL
    assert linalg.spectral_abscissa(sys.A - S @ sys.C.T @ sys.C) < 0


# ---- eigenvalues and singular values ------------------------------------------

def test_eigenvalues_examples():
    ev = linalg.eigenvalues(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert np.allclose(sorted(ev, key=lambda z: z.imag), [-1j, 1j])
    assert np.allclose(linalg.eigenvalues(np.array([[2.0]])), [2.0])
    companion = np.array([[3.0, -2.0], [1.0, 0.0]])  # lambda^2 - 3 lambda + 2
    assert np.allclose(np.sort(linalg.eigenvalues(companion).real), np.sort(np.roots([1, -3, 2])))


def test_spectral_abscissa_examples():
    assert linalg.spectral_abscissa(np.diag([-1.0, -3.0])) == pytest.approx(-1.0)
    assert linalg.spectral_abscissa(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx(0.0, abs=1e-15)
    assert linalg.spectral_abscissa(np.zeros((0, 0))) == -np.inf


def test_min_singular_value_examples():
    assert linalg.min_singular_value(np.eye(2)) == pytest.approx(1.0)
    assert linalg.min_singular_value(np.array([[1.0, 0.0], [0.0, 0.0]])) == 0.0
    assert linalg.min_singular_value(np.array([[3.0, 0.0], [4.0, 0.0]])) == pytest.approx(0.0, abs=1e-15)


@given(st.integers(0, 2**31 - 1), st.integers(1, 12))
def test_real_eigenvalues_come_in_conjugate_pairs(seed, n):
    A = np.random.default_rng(seed).standard_normal((n, n))
    ev = linalg.eigenvalues(A)
    assert np.allclose(np.sort_complex(ev), np.sort_complex(ev.conj()), atol=1e-10)
