"""System types, the reference/disturbance signal class, and plant checks."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import DimensionMismatch, NotPositiveDefinite, SingularResolvent

ZERO_TOL = 1e-7


@dataclass(frozen=True)
class StateSpace:
    """Real dense quadruple ``x' = Ax + Bu, y = Cx + Du``."""
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: Optional[np.ndarray] = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        B = np.asarray(self.B, dtype=float).reshape(n, -1)
        C = np.asarray(self.C, dtype=float)
        C = C.reshape(-1, n) if C.size or n == 0 else np.zeros((0, n))
        p, m = C.shape[0], B.shape[1]
        D = np.zeros((p, m)) if self.D is None else np.asarray(self.D, dtype=float).reshape(p, m)
        if A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        for name, X in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(X)):
                raise ValueError(f"{name} has non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.C.shape[0]

    def transformed(self, T, Tinv=None) -> "StateSpace":
        """Realization in coordinates ``x = T x_new``."""
        Tinv = np.linalg.inv(T) if Tinv is None else Tinv
        return StateSpace(Tinv @ self.A @ T, Tinv @ self.B, self.C @ T, self.D)


@dataclass(frozen=True)
class CholeskyTransform:
    """Links FEM coefficients ``c`` to standard coordinates ``x = L' c``
    where ``M = L L'``."""
    L: np.ndarray

    def to_standard(self, c):
        return self.L.T @ c

    def from_standard(self, x):
        return sla.solve_triangular(self.L, x, lower=True, trans="T")


@dataclass
class GalerkinSystem:
    """FEM-native generalized system ``M x' = A_f x + B_f u + d_f w``,
    ``y = C_f x + D u``.

    ``M`` and ``A_f`` may be dense arrays or scipy sparse matrices. ``kind``
    and ``nodes`` describe the discretization so initial data can be mapped
    into coefficients (see :func:`regulator.fem.initial_state`).
    """
    M: object
    A_f: object
    B_f: np.ndarray
    C_f: np.ndarray
    d_f: Optional[np.ndarray] = None
    D: Optional[np.ndarray] = None
    kind: str = "matrices"
    nodes: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.M.shape[0]
        if self.M.shape != (n, n) or self.A_f.shape != (n, n):
            raise DimensionMismatch("M and A_f must be square and of equal size")
        self.B_f = np.asarray(self.B_f, dtype=float).reshape(n, -1)
        self.C_f = np.asarray(self.C_f, dtype=float).reshape(-1, n)
        self.d_f = (np.zeros((n, 0)) if self.d_f is None
                    else np.asarray(self.d_f, dtype=float).reshape(n, -1))
        p, m = self.C_f.shape[0], self.B_f.shape[1]
        self.D = np.zeros((p, m)) if self.D is None else np.asarray(self.D, dtype=float).reshape(p, m)

    @property
    def n(self) -> int:
        return self.M.shape[0]

    def dense(self, name):
        X = getattr(self, name)
        return X.toarray() if sp.issparse(X) else np.asarray(X, dtype=float)


def to_standard_form(G: GalerkinSystem):
    """Standard-form realization of a mass-matrix system.

    With ``M = L L'`` the state ``x = L' c`` gives ``A = L^-1 A_f L^-T``,
    ``B = L^-1 B_f``, ``C = C_f L^-T``, so Euclidean adjoints in the returned
    coordinates are adjoints in the FEM (mass-weighted) inner product.

    Returns
    -------
    (StateSpace, CholeskyTransform, Bd)
        ``Bd = L^-1 d_f`` is the disturbance input in standard coordinates.
    """
    M = G.dense("M")
    try:
        L = np.linalg.cholesky(0.5 * (M + M.T))
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("mass matrix is not positive definite") from exc
    Af = G.dense("A_f")
    tri = lambda X: sla.solve_triangular(L, X, lower=True)  # noqa: E731
    A = tri(tri(Af).T).T
    B = tri(G.B_f)
    C = tri(G.C_f.T).T
    Bd = tri(G.d_f)
    return StateSpace(A, B, C, G.D), CholeskyTransform(L), Bd


def transfer_value(sys: StateSpace, lam):
    """``P(lam) = C (lam I - A)^-1 B + D`` as a complex p x m array."""
    n = sys.n
    if n == 0:
        return sys.D.astype(complex)
    Z = lam * np.eye(n) - sys.A
    with warnings.catch_warnings():
        # singularity is detected from the pivots below
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(Z, check_finite=False)
    d = np.abs(np.diag(lu))
    if d.min() <= 1e-14 * max(d.max(), 1.0):
        raise SingularResolvent(f"lam={lam} is (numerically) an eigenvalue of A")
    X = sla.lu_solve((lu, piv), sys.B.astype(complex), check_finite=False)
    return sys.C @ X + sys.D


def rosenbrock_margin(sys: StateSpace, omega: float) -> float:
    """The (n+p)-th singular value of [iwI-A, B; C, D], relative to the
    input/output scale ``max(1, ||B||, ||C||, ||D||)``.

    The scale deliberately excludes ``A``: for discretized PDEs ``||A||``
    grows with the mesh while the smallest singular values track
    ``P(iw)``.
    """
    n, m, p = sys.n, sys.m, sys.p
    R = np.block([[1j * omega * np.eye(n) - sys.A, sys.B.astype(complex)],
                  [sys.C.astype(complex), sys.D.astype(complex)]])
    s = sla.svdvals(R)
    if n + p > n + m:
        return 0.0
    scale = max(1.0, *(np.linalg.norm(X, 2) if X.size else 0.0
                       for X in (sys.B, sys.C, sys.D)))
    return float(s[n + p - 1] / scale)


def rosenbrock_full_rank(sys: StateSpace, omega: float, zero_tol=ZERO_TOL):
    """Check that ``i*omega`` is not an invariant zero.

    True iff the Rosenbrock matrix has full row rank n+p. The returned
    margin is described in ``rosenbrock_margin``.
    """
    margin = rosenbrock_margin(sys, omega)
    return margin > zero_tol, margin


@dataclass(frozen=True)
class SignalSpec:
    """Sum of polynomial-modulated harmonics.

    ``cos_coeffs[k][j]`` and ``sin_coeffs[k][j]`` hold ascending polynomial
    coefficients of channel ``j`` at ``frequencies[k]``. ``orders[k]`` is the
    declared bound n_k (polynomial degree at most n_k - 1).
    """
    frequencies: tuple
    cos_coeffs: tuple
    sin_coeffs: tuple
    channels: int
    orders: tuple = ()

    def __post_init__(self):
        freqs = tuple(float(w) for w in self.frequencies)
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("frequencies must be strictly increasing")
        if freqs and freqs[0] < 0:
            raise ValueError("frequencies must be nonnegative")
        q = len(freqs)
        cos = _coeff_table(self.cos_coeffs, q, self.channels)
        sin = _coeff_table(self.sin_coeffs, q, self.channels)
        orders = tuple(self.orders) if self.orders else tuple(
            max([1] + [len(c) for c in cos[k]] + [len(c) for c in sin[k]]) for k in range(q))
        if len(orders) != q:
            raise ValueError("one order per frequency expected")
        for k in range(q):
            for poly in cos[k] + sin[k]:
                if len(np.trim_zeros(np.asarray(poly, float), "b")) > orders[k]:
                    raise ValueError(f"polynomial degree exceeds declared order at w={freqs[k]}")
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "cos_coeffs", cos)
        object.__setattr__(self, "sin_coeffs", sin)
        object.__setattr__(self, "orders", orders)

    @classmethod
    def zero(cls, channels: int) -> "SignalSpec":
        return cls((), (), (), channels)

    @classmethod
    def harmonic(cls, channels: int, terms: Sequence) -> "SignalSpec":
        """Build from ``(omega, cos_amplitudes, sin_amplitudes)`` triples of
        constant amplitudes, merging repeated frequencies."""
        table = {}
        for w, a, b in terms:
            ca, sa = table.setdefault(float(w), (np.zeros(channels), np.zeros(channels)))
            ca += np.broadcast_to(np.asarray(a, float), (channels,))
            sa += np.broadcast_to(np.asarray(b, float), (channels,))
        freqs = sorted(table)
        cos = tuple(tuple((float(v),) for v in table[w][0]) for w in freqs)
        sin = tuple(tuple((float(v),) for v in table[w][1]) for w in freqs)
        return cls(tuple(freqs), cos, sin, channels)

    def __call__(self, t):
        return eval_signal(self, t)


def _coeff_table(table, q, channels):
    table = tuple(table) if table else tuple(() for _ in range(q))
    if len(table) != q:
        raise ValueError("one coefficient entry per frequency expected")
    out = []
    for entry in table:
        entry = tuple(entry) if len(entry) else tuple((0.0,) for _ in range(channels))
        if len(entry) != channels:
            raise ValueError(f"expected {channels} channels, got {len(entry)}")
        out.append(tuple(tuple(float(c) for c in np.atleast_1d(poly)) for poly in entry))
    return tuple(out)


def eval_signal(s: SignalSpec, t):
    """Evaluate the signal at scalar ``t`` (vector of length ``channels``)
    or at an array of times (shape ``(len(t), channels)``)."""
    t_arr = np.asarray(t, dtype=float)
    ts = np.atleast_1d(t_arr)
    out = np.zeros((ts.size, s.channels))
    for w, cos_k, sin_k in zip(s.frequencies, s.cos_coeffs, s.sin_coeffs):
        c, sn = np.cos(w * ts), np.sin(w * ts)
        for j in range(s.channels):
            # polyval wants descending order
            out[:, j] += np.polyval(cos_k[j][::-1], ts) * c
            if w != 0.0:
                out[:, j] += np.polyval(sin_k[j][::-1], ts) * sn
    return out[0] if t_arr.ndim == 0 else out
