"""Closed-loop assembly, stability margins and Crank-Nicolson simulation."""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import linalg
from .errors import DimensionMismatch, SingularStep
from .model import GalerkinSystem, SignalSpec, StateSpace

log = logging.getLogger(__name__)

OVERFLOW = 1e12


class InstabilityWarning(RuntimeWarning):
    pass


@dataclass
class ClosedLoop:
    A_e: np.ndarray
    B_e: np.ndarray
    C_e: np.ndarray
    D_e: np.ndarray
    n_plant: int
    n_ctrl: int


def _check_dims(n, m, p, ctrl):
    G1c = np.atleast_2d(ctrl.G1c) if np.size(ctrl.G1c) else np.zeros((0, 0))
    nz = G1c.shape[0]
    G2c = np.asarray(ctrl.G2c, dtype=float).reshape(nz, -1) if nz else np.zeros((0, p))
    Kc = np.asarray(ctrl.Kc, dtype=float).reshape(-1, nz) if nz else np.zeros((m, 0))
    if G1c.shape != (nz, nz) or G2c.shape != (nz, p) or Kc.shape != (m, nz):
        raise DimensionMismatch(
            f"controller (G1c {G1c.shape}, G2c {G2c.shape}, Kc {Kc.shape}) does not fit "
            f"a plant with n={n}, m={m}, p={p}")
    return G1c, G2c, Kc


def assemble_closed_loop(plant: StateSpace, ctrl, Bd=None, Dd=None) -> ClosedLoop:
    """Interconnection of the plant with ``z' = G1c z + G2c e, u = Kc z``.

    Inputs of the closed loop are the disturbance followed by the reference;
    its output is the regulation error.
    """
    n, m, p = plant.n, plant.m, plant.p
    G1c, G2c, Kc = _check_dims(n, m, p, ctrl)
    nz = G1c.shape[0]
    Bd = np.zeros((n, 0)) if Bd is None else np.asarray(Bd, dtype=float).reshape(n, -1)
    md = Bd.shape[1]
    Dd = np.zeros((p, md)) if Dd is None else np.asarray(Dd, dtype=float)
    if Dd.shape != (p, md):
        raise DimensionMismatch(f"Dd has shape {Dd.shape}, expected {(p, md)}")
    A, B, C, D = plant.A, plant.B, plant.C, plant.D
    A_e = np.block([[A, B @ Kc], [G2c @ C, G1c + G2c @ D @ Kc]])
    B_e = np.block([[Bd, np.zeros((n, p))], [G2c @ Dd, -G2c]])
    C_e = np.hstack([C, D @ Kc])
    D_e = np.hstack([Dd, -np.eye(p)])
    return ClosedLoop(A_e, B_e, C_e, D_e, n, nz)


def stability_margin(cl) -> float:
    """``-spectral_abscissa(A_e)``; positive iff the closed loop is stable.

    Also accepts a plain ``StateSpace`` or a square matrix.
    """
    if isinstance(cl, ClosedLoop):
        A = cl.A_e
    elif isinstance(cl, StateSpace):
        A = cl.A
    else:
        A = cl
    return -linalg.spectral_abscissa(A)


@dataclass
class Trajectory:
    t: np.ndarray          # (k,)
    y: np.ndarray          # (k, p)
    yref: np.ndarray       # (k, p)
    e: np.ndarray          # (k, p)
    u: np.ndarray          # (k, m)
    x: np.ndarray          # (k_s, n) plant coefficients every state_stride steps
    z: np.ndarray          # (k_s, nz)
    diverged: bool = False

    def __post_init__(self):
        k = len(self.t)
        if not (len(self.y) == len(self.yref) == len(self.e) == len(self.u) == k):
            raise ValueError("inconsistent trajectory lengths")


def simulate(plantG: GalerkinSystem, ctrl, ref: SignalSpec, dist: SignalSpec | None = None,
             x0=None, z0=None, t_end: float = 10.0, dt: float = 1e-2, Dd=None,
             state_stride: int | None = None) -> Trajectory:
    """Trapezoidal-rule integration of the coupled plant and controller.

    The plant is used in its Galerkin coordinates ``M x' = A_f x + B_f u
    + d_f w``; the block matrix ``M_e - dt/2 A_e`` is factored once.
    """
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    n, m, p = plantG.n, plantG.B_f.shape[1], plantG.C_f.shape[0]
    G1c, G2c, Kc = _check_dims(n, m, p, ctrl)
    nz = G1c.shape[0]
    if ref.channels != p:
        raise DimensionMismatch(f"reference has {ref.channels} channels, plant has p={p}")
    d_f = plantG.d_f
    md = d_f.shape[1]
    if dist is None:
        dist = SignalSpec.zero(max(md, 1))
    if md and dist.channels != md:
        raise DimensionMismatch(f"disturbance has {dist.channels} channels, model has {md}")
    Dd = np.zeros((p, md)) if Dd is None else np.asarray(Dd, dtype=float).reshape(p, md)
    D = plantG.D
    Bf, Cf = plantG.B_f, plantG.C_f

    M = sp.csr_matrix(plantG.M)
    Af = sp.csr_matrix(plantG.A_f)
    Ahat = sp.bmat([[Af, sp.csr_matrix(Bf @ Kc)],
                    [sp.csr_matrix(G2c @ Cf), sp.csr_matrix(G1c + G2c @ D @ Kc)]], format="csc")
    Me = sp.block_diag([M, sp.identity(nz)], format="csc")
    try:
        lu = spla.splu((Me - 0.5 * dt * Ahat).tocsc())
    except RuntimeError as exc:
        raise SingularStep(str(exc)) from exc
    rhs_op = (Me + 0.5 * dt * Ahat).tocsr()

    steps = int(round(t_end / dt))
    t = np.arange(steps + 1) * dt
    stride = state_stride or max(1, steps // 200)
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).reshape(n)
    z = np.zeros(nz) if z0 is None else np.broadcast_to(np.asarray(z0, dtype=float), (nz,)).copy()
    X = np.concatenate([x, z])

    wmid = dist(t[:-1] + 0.5 * dt).reshape(steps, -1) if md else None
    rmid = ref(t[:-1] + 0.5 * dt).reshape(steps, p)
    wgrid = dist(t).reshape(steps + 1, -1) if md else np.zeros((steps + 1, 0))
    rgrid = ref(t).reshape(steps + 1, p)

    ys, us, xs, zs = [], [], [], []
    diverged = False
    Fx = d_f if md else None
    for k in range(steps + 1):
        xk, zk = X[:n], X[n:]
        uk = Kc @ zk
        yk = Cf @ xk + D @ uk + (Dd @ wgrid[k] if md else 0.0)
        ys.append(yk)
        us.append(uk)
        if k % stride == 0 or k == steps:
            xs.append(xk.copy())
            zs.append(zk.copy())
        if k == steps:
            break
        F = np.zeros(n + nz)
        if md:
            F[:n] = Fx @ wmid[k]
            F[n:] = G2c @ (Dd @ wmid[k])
        F[n:] -= G2c @ rmid[k]
        X = lu.solve(rhs_op @ X + dt * F)
        if not np.all(np.isfinite(X)) or np.abs(X).max() > OVERFLOW:
            warnings.warn(f"state norm exceeded {OVERFLOW:g} at t={t[k + 1]:.4g}",
                          InstabilityWarning, stacklevel=2)
            diverged = True
            t = t[:k + 1]
            rgrid = rgrid[:k + 1]
            break
    y = np.array(ys)
    return Trajectory(t, y, rgrid, y - rgrid, np.array(us), np.array(xs), np.array(zs), diverged)


def window_rms(traj: Trajectory, t0: float, t1: float) -> float:
    """RMS of the error norm over samples with ``t0 <= t <= t1``
    (``inf`` if the simulation diverged before ``t1``)."""
    if traj.diverged and traj.t[-1] < t1:
        return float("inf")
    sel = (traj.t >= t0 - 1e-12) & (traj.t <= t1 + 1e-12)
    if not sel.any():
        raise ValueError(f"no samples in [{t0}, {t1}]")
    en = np.linalg.norm(traj.e[sel], axis=1)
    return float(np.sqrt(np.mean(en**2)))


def regulation_metrics(traj: Trajectory, settle_fraction: float = 0.1) -> dict:
    """Tail and head RMS of ``||e(t)||`` and a fitted exponential decay rate.

    The rate is the least-squares slope of ``-log`` of the suffix-maximum
    envelope of the error norm; it is ``nan`` (flagged undefined) if the
    error vanishes identically.
    """
    if not 0 < settle_fraction < 1:
        raise ValueError("settle_fraction must lie in (0, 1)")
    t0, t1 = traj.t[0], traj.t[-1]
    span = settle_fraction * (t1 - t0)
    tail = window_rms(traj, t1 - span, t1)
    head = window_rms(traj, t0, t0 + span)
    en = np.linalg.norm(traj.e, axis=1)
    env = np.maximum.accumulate(en[::-1])[::-1]
    pos = env > 0
    if pos.sum() >= 2:
        slope = np.polyfit(traj.t[pos], np.log(env[pos]), 1)[0]
        decay, defined = float(-slope), True
    else:
        decay, defined = float("nan"), False
    return {"tail_rms": tail, "head_rms": head,
            "ratio": tail / head if head > 0 else float("nan"),
            "decay_estimate": decay, "decay_defined": defined, "diverged": traj.diverged}
