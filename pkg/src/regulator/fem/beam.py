"""Cubic Hermite FEM for a clamped-free Euler-Bernoulli beam with
Kelvin-Voigt damping, in first-order form for the state (v, v_t)."""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import InvalidParameters
from ..model import GalerkinSystem
from .coefficients import Coefficient1D, split_points
from .heat1d import _as_list

QUAD_POINTS = 4


def hermite_basis(s, h):
    """Values and second x-derivatives of the four Hermite shape functions
    (value/slope at the left node, then at the right node)."""
    s = np.asarray(s, dtype=float)
    val = np.stack([1 - 3 * s**2 + 2 * s**3,
                    h * (s - 2 * s**2 + s**3),
                    3 * s**2 - 2 * s**3,
                    h * (-s**2 + s**3)])
    dd = np.stack([(-6 + 12 * s) / h**2,
                   (-4 + 6 * s) / h,
                   (6 - 12 * s) / h**2,
                   (-2 + 6 * s) / h])
    return val, dd


def beam_matrices(nodes):
    """Bending (V0 Gram) matrix S and L2 mass matrix on clamped DOFs."""
    ne = len(nodes) - 1
    ndof = 2 * (ne + 1)
    S = np.zeros((ndof, ndof))
    M = np.zeros((ndof, ndof))
    for e in range(ne):
        x0, x1 = nodes[e], nodes[e + 1]
        h = x1 - x0
        _, wq, s = split_points(x0, x1, (), QUAD_POINTS)
        val, dd = hermite_basis(s, h)
        idx = np.arange(2 * e, 2 * e + 4)
        S[np.ix_(idx, idx)] += (dd * wq) @ dd.T
        M[np.ix_(idx, idx)] += (val * wq) @ val.T
    free = slice(2, None)
    return S[free, free], M[free, free]


def beam_loads(nodes, fs):
    ne = len(nodes) - 1
    out = np.zeros((2 * (ne + 1), len(fs)))
    for k, f in enumerate(fs):
        for e in range(ne):
            x0, x1 = nodes[e], nodes[e + 1]
            xq, wq, s = split_points(x0, x1, f.breakpoints, QUAD_POINTS)
            val, _ = hermite_basis(s, x1 - x0)
            out[2 * e:2 * e + 4, k] += val @ (wq * f(xq))
    return out[2:]


def assemble_beam_1d(length, alpha, beta, gamma, b, c_deflection=None, c_velocity=None,
                     disturbance=None, elements: int = 15) -> GalerkinSystem:
    """Galerkin system of the damped beam on ``(0, length)``, clamped at 0.

    With bending matrix S and mass matrix M0 the system is
    ``diag(S, M0) x' = [[0, S], [-alpha S, -beta S - gamma M0]] x + ...``
    for ``x = (deflection, velocity)`` coefficients. Inputs act on the
    velocity equation through ``int b_k phi``; outputs are
    ``int c_deflection v + int c_velocity v_t``.
    """
    if alpha <= 0 or beta <= 0 or gamma < 0 or length <= 0 or elements < 1:
        raise InvalidParameters("need alpha, beta, length > 0, gamma >= 0, elements >= 1")
    nodes = np.linspace(0.0, length, elements + 1)
    S, M0 = beam_matrices(nodes)
    nv = S.shape[0]
    Z = np.zeros((nv, nv))
    M = np.block([[S, Z], [Z, M0]])
    A_f = np.block([[Z, S], [-alpha * S, -beta * S - gamma * M0]])

    bs = _as_list(b)
    B_f = np.vstack([np.zeros((nv, len(bs))), beam_loads(nodes, bs)])
    cd, cv = _as_list(c_deflection), _as_list(c_velocity)
    p = max(len(cd), len(cv))
    C_f = np.zeros((p, 2 * nv))
    if cd:
        C_f[:len(cd), :nv] = beam_loads(nodes, cd).T
    if cv:
        C_f[:len(cv), nv:] = beam_loads(nodes, cv).T
    ds = _as_list(disturbance)
    d_f = np.vstack([np.zeros((nv, len(ds))), beam_loads(nodes, ds)]) if ds else None
    return GalerkinSystem(sp.csr_matrix(M), sp.csr_matrix(A_f), B_f, C_f, d_f, kind="beam1d",
                          nodes=nodes,
                          meta={"elements": elements, "length": float(length), "alpha": alpha,
                                "beta": beta, "gamma": gamma})


def beam_elements_for_order(order: int) -> int:
    """Element count whose first-order state dimension (4 per element) is
    closest to ``order`` from above."""
    return max(1, int(np.ceil(order / 4)))


def project_deflection(G: GalerkinSystem, v0, v1=None):
    """L2 projections of initial deflection and velocity onto the Hermite
    space, stacked as a state coefficient vector."""
    nodes = G.nodes
    ne = len(nodes) - 1
    _, M0 = beam_matrices(nodes)
    out = []
    for f in (v0, v1):
        if f is None:
            out.append(np.zeros(M0.shape[0]))
            continue
        rhs = beam_loads(nodes, [Coefficient1D.of(f)])[:, 0]
        out.append(np.linalg.solve(M0, rhs))
    assert len(out[0]) == 2 * ne
    return np.concatenate(out)
