"""Gramians, Hankel singular values and square-root balanced truncation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import linalg
from .errors import NotStable, RankCollapse
from .model import StateSpace, transfer_value

HANKEL_TOL = 1e-10


def gramians(sys: StateSpace, tol=linalg.LYAP_TOL):
    """Controllability and observability Gramians of a stable system."""
    abscissa = linalg.spectral_abscissa(sys.A)
    if abscissa >= 0:
        raise NotStable(f"spectral abscissa {abscissa:.3e} >= 0")
    P = linalg.solve_lyapunov(sys.A, sys.B @ sys.B.T, tol=tol, check_stable=False)
    Q = linalg.solve_lyapunov(sys.A.T, sys.C.T @ sys.C, tol=tol, check_stable=False)
    return P, Q


def psd_factor(P):
    """Square factor ``S`` with ``S S' = P`` (negative eigenvalues clipped)."""
    w, U = np.linalg.eigh(0.5 * (P + P.T))
    return U * np.sqrt(np.clip(w, 0.0, None))


def _cross_svd(P, Q):
    S, R = psd_factor(P), psd_factor(Q)
    U, s, Vt = np.linalg.svd(R.T @ S)
    return S, R, U, s, Vt


def hankel_values(P, Q):
    """Hankel singular values (square roots of eig(PQ)), nonincreasing.

    Computed as singular values of ``R' S`` for factors ``P = S S'``,
    ``Q = R R'``, which avoids squaring the condition number.
    """
    return _cross_svd(P, Q)[3]


@dataclass
class Truncation:
    reduced: StateSpace
    hankel: np.ndarray
    bound: float
    order: int


def balanced_truncate(sys: StateSpace, r: int, hankel_tol=HANKEL_TOL, lyap_tol=linalg.LYAP_TOL):
    """Square-root balanced truncation to order ``r' = min(r, numerical rank)``.

    The numerical rank counts Hankel values above ``hankel_tol * sigma_1``.
    The returned bound is ``2 * sum(sigma_k, k > r')``, the H-infinity error
    bound of balanced truncation.
    """
    if not 1 <= r <= sys.n:
        raise ValueError(f"reduction order {r} outside [1, {sys.n}]")
    P, Q = gramians(sys, tol=lyap_tol)
    S, R, U, s, Vt = _cross_svd(P, Q)
    rank = int(np.sum(s > hankel_tol * s[0])) if s.size and s[0] > 0 else 0
    rr = min(r, rank)
    if rr == 0:
        raise RankCollapse("all Hankel singular values are numerically zero")
    scale = 1.0 / np.sqrt(s[:rr])
    T = S @ Vt[:rr].T * scale          # right projection
    W = R @ U[:, :rr] * scale          # left projection, W' T = I
    red = StateSpace(W.T @ sys.A @ T, W.T @ sys.B, sys.C @ T, sys.D)
    if linalg.spectral_abscissa(red.A) >= 0:
        raise NotStable("reduced model lost stability")
    return Truncation(red, s, float(2.0 * s[rr:].sum()), rr)


def frequency_grid(extra=(), n=200, lo=1e-3, hi=1e4):
    """Logarithmic diagnostic grid plus the given frequencies, sorted."""
    return np.unique(np.concatenate([np.logspace(np.log10(lo), np.log10(hi), n),
                                     np.asarray(extra, dtype=float)]))


def sampled_hinf_error(sys1: StateSpace, sys2: StateSpace, grid) -> float:
    """Largest ``||P1(iw) - P2(iw)||_2`` over the grid."""
    if (sys1.p, sys1.m) != (sys2.p, sys2.m):
        raise ValueError("systems have different input/output dimensions")
    err = 0.0
    for w in grid:
        E = transfer_value(sys1, 1j * w) - transfer_value(sys2, 1j * w)
        err = max(err, sla.svdvals(E)[0] if E.size else 0.0)
    return float(err)


def evaluation_noise(sys: StateSpace, grid, seed: int = 0) -> float:
    """Sampled difference between ``sys`` and a random orthogonal similarity
    transform of it.

    Both realizations have the same transfer function, so the difference
    measures the rounding floor of evaluating it on ``grid``; for stiff
    systems this floor can exceed a small truncation bound.
    """
    rng = np.random.default_rng(seed)
    Qm, _ = np.linalg.qr(rng.standard_normal((sys.n, sys.n)))
    return sampled_hinf_error(sys, sys.transformed(Qm, Qm.T), grid)
