"""Piecewise linear FEM for 1D reaction-diffusion with Neumann ends."""
from __future__ import annotations

from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..errors import InvalidCoefficient, InvalidParameters
from ..model import GalerkinSystem
from .coefficients import Coefficient1D, split_points

QUAD_POINTS = 3


def _as_list(fs):
    if fs is None:
        return []
    if isinstance(fs, (list, tuple)):
        return [Coefficient1D.of(f) for f in fs]
    return [Coefficient1D.of(fs)]


def p1_matrices(nodes, alpha: Coefficient1D, gamma: Coefficient1D, alpha_min=0.0):
    """Mass, diffusion stiffness and reaction mass matrices on a 1D grid."""
    ne = len(nodes) - 1
    rows, cols = [], []
    mvals, kvals, gvals = [], [], []
    breaks = alpha.breakpoints + gamma.breakpoints
    for e in range(ne):
        x0, x1 = nodes[e], nodes[e + 1]
        h = x1 - x0
        xq, wq, s = split_points(x0, x1, breaks, QUAD_POINTS)
        a = alpha(xq)
        if np.any(a <= alpha_min):
            raise InvalidCoefficient(
                f"diffusion coefficient {a.min():.3g} <= {alpha_min} on ({x0:.4g}, {x1:.4g})")
        g = gamma(xq)
        phi = np.stack([1.0 - s, s])
        dphi = np.array([-1.0, 1.0]) / h
        for i in range(2):
            for j in range(2):
                rows.append(e + i)
                cols.append(e + j)
                mvals.append(np.sum(wq * phi[i] * phi[j]))
                kvals.append(np.sum(wq * a) * dphi[i] * dphi[j])
                gvals.append(np.sum(wq * g * phi[i] * phi[j]))
    n = ne + 1
    build = lambda v: sp.csr_matrix((v, (rows, cols)), shape=(n, n))  # noqa: E731
    return build(mvals), build(kvals), build(gvals)


def p1_loads(nodes, fs: Sequence[Coefficient1D]):
    """Columns ``int f_k phi_j`` for each function ``f_k``."""
    n = len(nodes)
    out = np.zeros((n, len(fs)))
    for k, f in enumerate(fs):
        for e in range(n - 1):
            x0, x1 = nodes[e], nodes[e + 1]
            xq, wq, s = split_points(x0, x1, f.breakpoints, QUAD_POINTS)
            fv = f(xq)
            out[e, k] += np.sum(wq * fv * (1.0 - s))
            out[e + 1, k] += np.sum(wq * fv * s)
    return out


def assemble_heat_1d(alpha, gamma, b, c, N: int, length: float = 1.0,
                     neumann_disturbance: bool = True, alpha_min: float = 0.0):
    """Galerkin system for ``x_t = (alpha x_xi)_xi + gamma x + b u``,
    ``x_xi(0) = w_dist``, ``x_xi(1) = 0``, ``y = int c x``.

    ``b`` and ``c`` may be single coefficients or lists (one per input /
    output). Every node is a degree of freedom. The disturbance load is
    ``-alpha(0)`` at the left node, from the boundary term of the weak form.
    """
    if N < 2:
        raise InvalidParameters("need at least two elements")
    alpha = Coefficient1D.of(alpha)
    gamma = Coefficient1D.of(gamma)
    bs, cs = _as_list(b), _as_list(c)
    nodes = np.linspace(0.0, length, N + 1)
    M, K, Mg = p1_matrices(nodes, alpha, gamma, alpha_min)
    A_f = (-K + Mg).tocsr()
    B_f = p1_loads(nodes, bs)
    C_f = p1_loads(nodes, cs).T
    d_f = None
    if neumann_disturbance:
        d_f = np.zeros((N + 1, 1))
        d_f[0, 0] = -float(alpha(np.array([0.0]))[0])
    return GalerkinSystem(M, A_f, B_f, C_f, d_f, kind="heat1d", nodes=nodes,
                          meta={"elements": N, "length": length})
