"""Dense control-oriented linear algebra.

Lyapunov and Riccati solvers return symmetrized matrices and verify their
own residuals before returning.
"""
import logging

import numpy as np
import scipy.linalg as sla

from .errors import (ImaginaryAxisEigenvalue, NoConvergence, NotStable,
                     StabilizabilityFailure)

log = logging.getLogger(__name__)

LYAP_TOL = 1e-8
CARE_TOL = 1e-8
HAM_TOL = 1e-8


def _sym(X):
    return 0.5 * (X + X.T)


def eigenvalues(A):
    """All eigenvalues of a square matrix, with multiplicity."""
    A = np.atleast_2d(np.asarray(A))
    if A.shape[0] != A.shape[1]:
        raise ValueError(f"matrix must be square, got {A.shape}")
    if A.size == 0:
        return np.zeros(0, dtype=complex)
    try:
        return np.linalg.eigvals(A).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def spectral_abscissa(A):
    """Largest real part of the spectrum (``-inf`` for an empty matrix)."""
    ev = eigenvalues(A)
    if ev.size == 0:
        return -np.inf
    return float(np.max(ev.real))


def min_singular_value(M):
    M = np.atleast_2d(np.asarray(M))
    if M.size == 0:
        return 0.0
    return float(sla.svdvals(M)[-1]) if min(M.shape) > 0 else 0.0


def lyapunov_residual(A, X, W):
    """Relative residual of ``AX + XA' + W = 0``, normalized by
    ``||AX|| + ||XA'|| + ||W||`` (floored at 1)."""
    AX = A @ X
    R = AX + AX.T + W
    scale = 2 * np.linalg.norm(AX) + np.linalg.norm(W)
    return np.linalg.norm(R) / max(1.0, scale)


def care_residual(A, B, R, Q, X):
    """Relative residual of ``A'X + XA - X B R^-1 B' X + Q = 0``.

    Normalized by the sum of the norms of the three terms, so the measure
    stays meaningful when ``||X||`` is large.
    """
    G = B @ np.linalg.solve(np.atleast_2d(R), B.T)
    lin = A.T @ X + X @ A
    quad = X @ G @ X
    res = lin - quad + Q
    scale = np.linalg.norm(Q) + np.linalg.norm(lin) + np.linalg.norm(quad)
    return np.linalg.norm(res) / max(1.0, scale)


def solve_lyapunov(A, W, tol=LYAP_TOL, check_stable=True):
    """Solve ``A X + X A' + W = 0`` for a Hurwitz ``A``.

    Uses the Bartels-Stewart algorithm (real Schur form). One step of
    iterative refinement is attempted if the residual misses ``tol``.

    Raises
    ------
    NotStable
        If the spectral abscissa of ``A`` is not negative.
    NoConvergence
        If the refined residual still exceeds ``tol``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    W = np.atleast_2d(np.asarray(W, dtype=float))
    n = A.shape[0]
    if A.shape != (n, n) or W.shape != (n, n):
        raise ValueError(f"incompatible shapes {A.shape}, {W.shape}")
    if check_stable:
        abscissa = spectral_abscissa(A)
        if abscissa >= 0:
            raise NotStable(f"spectral abscissa {abscissa:.3e} >= 0")

    def solve(a, w):
        return sla.solve_continuous_lyapunov(a, -w)

    X = _sym(solve(A, W))
    if tol is None:
        return X
    res = lyapunov_residual(A, X, W)
    if res > tol:
        # iterative refinement: correction solves the same equation with the residual
        E = solve(A, A @ X + X @ A.T + W)
        X = _sym(X + E)
        res = lyapunov_residual(A, X, W)
        if res > tol:
            raise NoConvergence(f"Lyapunov residual {res:.2e} > {tol:.1e}")
    return X


def _matrix_sign(Z, tol=1e-12, max_iter=100):
    """Newton iteration for sign(Z) with determinant scaling."""
    n = Z.shape[0]
    Z = Z.copy()
    prev = np.inf
    for it in range(max_iter):
        Zi = np.linalg.inv(Z)
        _, logdet = np.linalg.slogdet(Z)
        c = np.exp(logdet / n)
        Znew = 0.5 * (Z / c + c * Zi)
        delta = np.linalg.norm(Znew - Z, 1) / np.linalg.norm(Znew, 1)
        Z = Znew
        if delta < tol:
            return Z, it + 1
        # stagnation at rounding level: the Newton-Kleinman sweep polishes
        if delta < 1e-8 and delta >= prev:
            return Z, it + 1
        prev = delta
    raise NoConvergence(f"sign iteration stalled after {max_iter} steps")


def _line_search(Rs, V, W):
    """Step length in [0, 2] minimizing ``||Rs + t V - t^2 W||_F``."""
    ip = lambda P, Q: float(np.sum(P * Q))  # noqa: E731
    a, b, c = ip(Rs, Rs), ip(Rs, V), ip(V, V)
    d, e, w = ip(Rs, W), ip(V, W), ip(W, W)
    f = np.poly1d([w, -2 * e, c - 2 * d, 2 * b, a])
    cands = [0.0, 1.0, 2.0] + [r.real for r in f.deriv().roots
                               if abs(r.imag) < 1e-12 and 0 < r.real < 2]
    return min(cands[1:], key=f) if min(cands, key=f) != 0.0 else 1.0


def solve_care(A, B, R, Q, tol=CARE_TOL, ham_tol=HAM_TOL, max_newton=30):
    """Stabilizing solution of ``A'X + XA - X B R^-1 B' X + Q = 0``.

    The matrix sign function of the Hamiltonian gives an initial
    stabilizing solution (graph of an orthonormal basis of the stable
    invariant subspace), which Newton-Kleinman steps then refine until the
    relative residual is below ``tol``.

    Filter equations ``A S + S A' - S C' R^-1 C S + Q = 0`` are solved by
    passing ``(A.T, C.T)``.

    Raises
    ------
    ImaginaryAxisEigenvalue
        The Hamiltonian has eigenvalues within ``ham_tol * ||H||`` of the
        imaginary axis.
    StabilizabilityFailure
        The stable invariant subspace is not a graph or the computed
        solution is not stabilizing.
    NoConvergence
        The Newton refinement does not reach ``tol``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float).reshape(A.shape[0], -1)
    R = np.atleast_2d(np.asarray(R, dtype=float))
    Q = _sym(np.atleast_2d(np.asarray(Q, dtype=float)))
    n = A.shape[0]
    G = _sym(B @ np.linalg.solve(R, B.T))

    H = np.block([[A, -G], [-Q, -A.T]])
    hnorm = max(1.0, np.linalg.norm(H, 1))
    ham_ev = eigenvalues(H)
    gap = float(np.min(np.abs(ham_ev.real)))
    if gap <= ham_tol * hnorm:
        raise ImaginaryAxisEigenvalue(
            f"Hamiltonian eigenvalue at distance {gap:.2e} from the imaginary axis")

    Z, iters = _matrix_sign(H / hnorm)
    # orthonormal basis [U1; U2] of the stable subspace range(I - sign(H))
    Qf, _, _ = sla.qr(np.eye(2 * n) - Z, pivoting=True)
    U1, U2 = Qf[:n, :n], Qf[n:, :n]
    if min_singular_value(U1) <= 1e-15 * max(1.0, np.linalg.norm(U1, 2)):
        raise StabilizabilityFailure("stable invariant subspace is not a graph")
    X = _sym(np.linalg.solve(U1.T, U2.T).T)
    log.debug("sign iteration: %d steps, n=%d", iters, n)

    K = np.linalg.solve(R, B.T @ X)
    if spectral_abscissa(A - B @ K) >= 0:
        raise StabilizabilityFailure(
            "Riccati solution is not stabilizing; (A, B) not stabilizable "
            "or (Q, A) not detectable")

    res = care_residual(A, B, R, Q, X)
    steps = 0
    while res > tol:
        if steps >= max_newton:
            raise NoConvergence(f"CARE residual {res:.2e} > {tol:.1e} after "
                                f"{steps} Newton steps")
        # Newton step in correction form: the right-hand side is the current
        # residual, so rounding scales with it rather than with ||X||
        Ac = A - G @ X
        defect = _sym(A.T @ X + X @ A - X @ G @ X + Q)
        D = solve_lyapunov(Ac.T, defect, tol=None, check_stable=False)
        t = _line_search(defect, _sym(Ac.T @ D + D @ Ac), _sym(D @ G @ D))
        Xn = _sym(X + t * D)
        new_res = care_residual(A, B, R, Q, Xn)
        steps += 1
        if new_res >= res:
            raise NoConvergence(f"Newton refinement stalled at residual {res:.2e}")
        X, res = Xn, new_res
        K = np.linalg.solve(R, B.T @ X)

    if spectral_abscissa(A - B @ K) >= 0:
        raise StabilizabilityFailure("refined Riccati solution is not stabilizing")
    return X


def solve_filter_care(A, C, R, Q, **kwargs):
    """Stabilizing solution of ``A S + S A' - S C' R^-1 C S + Q = 0``."""
    return solve_care(np.asarray(A).T, np.asarray(C).T, R, Q, **kwargs)
