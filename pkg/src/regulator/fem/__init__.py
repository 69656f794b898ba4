"""Galerkin assemblies for the three PDE families."""
import numpy as np

from ..model import GalerkinSystem
from .beam import assemble_beam_1d, beam_elements_for_order, project_deflection
from .coefficients import Coefficient1D, Field2D
from .disk import Mesh2D, assemble_rdc_2d, disk_mesh
from .heat1d import assemble_heat_1d

__all__ = [
    "Coefficient1D", "Field2D", "Mesh2D", "assemble_beam_1d", "assemble_heat_1d",
    "assemble_rdc_2d", "beam_elements_for_order", "disk_mesh", "initial_state",
]


def initial_state(G: GalerkinSystem, f=None, velocity=None):
    """Coefficient vector of an initial function.

    Nodal interpolation for P1 models (``f(x)`` in 1D, ``f(x1, x2)`` in 2D),
    L2 projection for the beam. ``None`` or a scalar gives a constant.
    """
    if G.kind == "beam1d":
        return project_deflection(G, f, velocity)
    if f is None:
        return np.zeros(G.n)
    if np.isscalar(f):
        return np.full(G.n, float(f))
    if G.kind == "heat1d":
        return np.asarray(f(G.nodes), dtype=float)
    if G.kind == "rdc2d":
        return np.asarray(f(G.nodes[:, 0], G.nodes[:, 1]), dtype=float)
    raise ValueError(f"no initial-state rule for model kind {G.kind!r}")
