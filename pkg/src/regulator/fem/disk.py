"""Triangular meshes of the unit disk and P1 reaction-diffusion-convection
assembly with homogeneous Dirichlet conditions."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..errors import EmptyActuator, InvalidCoefficient
from ..model import GalerkinSystem
from .coefficients import TRI3_BARY, TRI3_W, TRI7_BARY, TRI7_W, Field2D


@dataclass
class Mesh2D:
    nodes: np.ndarray        # (n, 2)
    triangles: np.ndarray    # (t, 3), counter-clockwise
    boundary_nodes: np.ndarray

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 2)
        self.triangles = np.asarray(self.triangles, dtype=int).reshape(-1, 3)
        self.boundary_nodes = np.asarray(self.boundary_nodes, dtype=int)
        n = len(self.nodes)
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= n):
            raise ValueError("triangle references a missing node")
        if self.boundary_nodes.size and (self.boundary_nodes.min() < 0
                                         or self.boundary_nodes.max() >= n):
            raise ValueError("boundary node index out of range")
        if np.any(self.areas() <= 0):
            raise ValueError("triangles must be positively oriented and non-degenerate")

    def areas(self):
        p = self.nodes[self.triangles]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def interior_nodes(self):
        mask = np.ones(len(self.nodes), dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    def to_json(self) -> str:
        return json.dumps({"nodes": self.nodes.tolist(),
                           "triangles": self.triangles.tolist(),
                           "boundary_nodes": self.boundary_nodes.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "Mesh2D":
        d = json.loads(text)
        return cls(np.array(d["nodes"]), np.array(d["triangles"]), np.array(d["boundary_nodes"]))


def disk_mesh(level: int, rings: int | None = None) -> Mesh2D:
    """Concentric-ring triangulation of a polygon inscribed in the unit circle.

    Ring ``j`` (radius ``j/R``) carries ``6j`` equally spaced nodes, with
    ``R = 2**level`` rings unless given explicitly. Level 0 is the hexagon
    fan of six triangles.
    """
    if level < 0:
        raise ValueError("level must be nonnegative")
    R = 2 ** level if rings is None else int(rings)
    nodes = [(0.0, 0.0)]
    start = [0]
    for j in range(1, R + 1):
        start.append(len(nodes))
        theta = 2 * np.pi * np.arange(6 * j) / (6 * j)
        nodes.extend(zip(j / R * np.cos(theta), j / R * np.sin(theta)))
    tris = []
    for j in range(1, R + 1):
        outer = lambda i: start[j] + i % (6 * j)  # noqa: E731
        inner = (lambda i: 0) if j == 1 else (lambda i: start[j - 1] + i % (6 * (j - 1)))  # noqa: E731
        for s in range(6):
            # sextant s: outer nodes s*j .. s*j+j, inner nodes s*(j-1) .. s*(j-1)+(j-1)
            for i in range(j):
                o0, o1 = outer(s * j + i), outer(s * j + i + 1)
                i0 = inner(s * (j - 1) + i)
                tris.append((i0, o0, o1))
                if i < j - 1:
                    i1 = inner(s * (j - 1) + i + 1)
                    tris.append((i0, o1, i1))
    boundary = np.arange(start[R], len(nodes)) if R > 0 else np.array([], dtype=int)
    return Mesh2D(np.array(nodes), np.array(tris), boundary)


def _geometry(mesh: Mesh2D):
    p = mesh.nodes[mesh.triangles]                      # (t, 3, 2)
    area = mesh.areas()
    # gradients of barycentric coordinates, (t, 3, 2)
    x, y = p[:, :, 0], p[:, :, 1]
    grad = np.empty_like(p)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        grad[:, i, 0] = (y[:, j] - y[:, k]) / (2 * area)
        grad[:, i, 1] = (x[:, k] - x[:, j]) / (2 * area)
    return p, area, grad


def _at_bary(p, bary):
    """Physical coordinates of barycentric points, (t, q, 2)."""
    return np.einsum("qi,tid->tqd", bary, p)


def _clip_box(poly, box):
    """Sutherland-Hodgman clipping of a convex polygon by an axis-aligned box."""
    (xa, xb), (ya, yb) = box
    planes = [(0, xa, 1.0), (0, xb, -1.0), (1, ya, 1.0), (1, yb, -1.0)]
    for axis, val, sgn in planes:
        if not poly:
            break
        out = []
        for k in range(len(poly)):
            P, Q = poly[k], poly[(k + 1) % len(poly)]
            dp, dq = sgn * (P[axis] - val), sgn * (Q[axis] - val)
            if dp >= 0:
                out.append(P)
            if dp * dq < 0:
                t = dp / (dp - dq)
                out.append(P + t * (Q - P))
        poly = out
    return poly


def _indicator_load(mesh, p, area, f: Field2D):
    """Exact ``int_{T cap box} value * phi_i`` for all nodes."""
    n = len(mesh.nodes)
    out = np.zeros(n)
    (xa, xb), (ya, yb) = f.rectangle
    lo, hi = p.min(axis=1), p.max(axis=1)
    cand = np.flatnonzero((hi[:, 0] > xa) & (lo[:, 0] < xb) & (hi[:, 1] > ya) & (lo[:, 1] < yb))
    covered = 0.0
    for t in cand:
        poly = _clip_box([p[t, 0], p[t, 1], p[t, 2]], f.rectangle)
        if len(poly) < 3:
            continue
        # barycentric map of the parent triangle
        T = np.column_stack([p[t, 1] - p[t, 0], p[t, 2] - p[t, 0]])
        Tinv = np.linalg.inv(T)
        for k in range(1, len(poly) - 1):
            a, b, c = poly[0], poly[k], poly[k + 1]
            sub = 0.5 * abs((b - a)[0] * (c - a)[1] - (b - a)[1] * (c - a)[0])
            if sub == 0.0:
                continue
            lam12 = Tinv @ ((a + b + c) / 3 - p[t, 0])
            lam = np.array([1 - lam12.sum(), lam12[0], lam12[1]])
            out[mesh.triangles[t]] += f.value * sub * lam
            covered += sub
    if covered <= 0.0:
        raise EmptyActuator(f"region {f.rectangle} does not intersect the mesh")
    return out


def _field_load(mesh, p, area, f: Field2D):
    if f.rectangle is not None:
        return _indicator_load(mesh, p, area, f)
    xq = _at_bary(p, TRI7_BARY)
    fv = f(xq[..., 0], xq[..., 1])                    # (t, q)
    local = np.einsum("tq,q,qi->ti", fv, TRI7_W, TRI7_BARY) * area[:, None]
    out = np.zeros(len(mesh.nodes))
    np.add.at(out, mesh.triangles, local)
    return out


def p1_loads_2d(mesh: Mesh2D, fields: Sequence) -> np.ndarray:
    p, area, _ = _geometry(mesh)
    cols = [_field_load(mesh, p, area, Field2D.of(f)) for f in fields]
    return np.column_stack(cols) if cols else np.zeros((len(mesh.nodes), 0))


def assemble_rdc_2d(mesh: Mesh2D, alpha, gamma, beta, b: Sequence, c: Sequence,
                    alpha_min: float = 0.0) -> GalerkinSystem:
    """Galerkin system for ``x_t = div(alpha grad x) + div(beta x) + gamma x
    + sum b_k u_k`` with ``x = 0`` on the boundary and ``y_k = int c_k x``.

    ``beta`` is a pair of fields. Matrices use the edge-midpoint rule;
    general loads a 7-point rule; box indicators are integrated exactly.
    """
    alpha, gamma = Field2D.of(alpha), Field2D.of(gamma)
    beta = [Field2D.of(f) for f in beta]
    p, area, grad = _geometry(mesh)
    xq = _at_bary(p, TRI3_BARY)                         # (t, 3, 2)
    a_q = alpha(xq[..., 0], xq[..., 1])
    if np.any(a_q <= alpha_min):
        raise InvalidCoefficient(f"diffusion coefficient {a_q.min():.3g} <= {alpha_min}")
    g_q = gamma(xq[..., 0], xq[..., 1])
    b_q = np.stack([beta[0](xq[..., 0], xq[..., 1]), beta[1](xq[..., 0], xq[..., 1])], -1)

    a_int = (a_q @ TRI3_W) * area                     # int alpha over T
    K = a_int[:, None, None] * np.einsum("tid,tjd->tij", grad, grad)
    Mm = np.einsum("q,qi,qj->ij", TRI3_W, TRI3_BARY, TRI3_BARY)[None] * area[:, None, None]
    Mg = np.einsum("tq,q,qi,qj->tij", g_q, TRI3_W, TRI3_BARY, TRI3_BARY) * area[:, None, None]
    # convection: row i (test), col j (trial): int phi_j beta . grad phi_i
    bphi = np.einsum("tqd,q,qj->tjd", b_q, TRI3_W, TRI3_BARY) * area[:, None, None]
    Cv = np.einsum("tid,tjd->tij", grad, bphi)

    n = len(mesh.nodes)
    r = np.repeat(mesh.triangles, 3, axis=1).ravel()
    cc = np.tile(mesh.triangles, (1, 3)).ravel()
    build = lambda loc: sp.csr_matrix((loc.ravel(), (r, cc)), shape=(n, n))  # noqa: E731
    M = build(np.broadcast_to(Mm, K.shape).copy())
    A_full = build(-K - Cv + Mg)

    dof = mesh.interior_nodes
    M = M[dof][:, dof].tocsr()
    A_f = A_full[dof][:, dof].tocsr()
    B_f = p1_loads_2d(mesh, b)[dof]
    C_f = p1_loads_2d(mesh, c)[dof].T
    return GalerkinSystem(M, A_f, B_f, C_f, None, kind="rdc2d", nodes=mesh.nodes[dof],
                          meta={"triangles": len(mesh.triangles)})
