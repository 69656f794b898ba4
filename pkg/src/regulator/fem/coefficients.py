"""Coefficient fields and element quadrature helpers."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np


@dataclass(frozen=True)
class Coefficient1D:
    """Scalar function of one variable, vectorized over numpy arrays.

    ``breakpoints`` lists points where the function may jump; element
    integrals are split there so Gauss rules stay exact on each piece.
    """
    func: Callable
    breakpoints: Tuple[float, ...] = ()
    label: str = ""

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.func(x), dtype=float), x.shape)

    @classmethod
    def constant(cls, value: float) -> "Coefficient1D":
        value = float(value)
        return cls(lambda x: np.full_like(x, value), (), f"{value:g}")

    @classmethod
    def indicator(cls, a: float, b: float, value: float = 1.0) -> "Coefficient1D":
        a, b, value = float(a), float(b), float(value)
        if b <= a:
            raise ValueError("indicator interval must satisfy a < b")
        return cls(lambda x: np.where((x > a) & (x < b), value, 0.0), (a, b),
                   f"{value:g}*chi({a:g},{b:g})")

    @classmethod
    def of(cls, f) -> "Coefficient1D":
        if isinstance(f, Coefficient1D):
            return f
        if f is None:
            return cls.constant(0.0)
        if np.isscalar(f):
            return cls.constant(f)
        return cls(f)

    def __add__(self, other: "Coefficient1D") -> "Coefficient1D":
        other = Coefficient1D.of(other)
        f, g = self.func, other.func
        return Coefficient1D(lambda x: f(x) + g(x),
                             tuple(sorted(set(self.breakpoints + other.breakpoints))))


def gauss_legendre(npts: int):
    """Nodes and weights on the reference interval [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


def split_points(x0: float, x1: float, breaks: Sequence[float], npts: int):
    """Quadrature on [x0, x1] split at interior breakpoints.

    Returns physical points, weights, and reference coordinates s in [0, 1].
    """
    cuts = [x0] + sorted(b for b in breaks if x0 < b < x1) + [x1]
    s_ref, w_ref = gauss_legendre(npts)
    xs, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        xs.append(a + (b - a) * s_ref)
        ws.append((b - a) * w_ref)
    xq = np.concatenate(xs)
    wq = np.concatenate(ws)
    return xq, wq, (xq - x0) / (x1 - x0)


@dataclass(frozen=True)
class Field2D:
    """Scalar field on the plane.

    A field with ``rectangle`` set is ``value`` times the indicator of the
    open box ``(x0, x1) x (y0, y1)``; such fields are integrated exactly by
    clipping triangles against the box.
    """
    func: Optional[Callable] = None
    rectangle: Optional[Tuple[Tuple[float, float], Tuple[float, float]]] = None
    value: float = 1.0

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.rectangle is not None:
            (a, b), (c, d) = self.rectangle
            return np.where((x > a) & (x < b) & (y > c) & (y < d), self.value, 0.0)
        return np.broadcast_to(np.asarray(self.func(x, y), dtype=float), x.shape) * self.value

    @classmethod
    def constant(cls, value: float) -> "Field2D":
        value = float(value)
        return cls(lambda x, y: np.full_like(x, value))

    @classmethod
    def box(cls, xr, yr, value: float = 1.0) -> "Field2D":
        (a, b), (c, d) = xr, yr
        if b <= a or d <= c:
            raise ValueError("rectangle bounds must be increasing")
        return cls(rectangle=((float(a), float(b)), (float(c), float(d))), value=float(value))

    @classmethod
    def of(cls, f) -> "Field2D":
        if isinstance(f, Field2D):
            return f
        if np.isscalar(f):
            return cls.constant(f)
        return cls(f)


# Dunavant degree-5 rule, barycentric coordinates and weights (sum to 1)
_A1, _B1 = 0.059715871789770, 0.470142064105115
_A2, _B2 = 0.797426985353087, 0.101286507323456
TRI7_BARY = np.array([
    [1 / 3, 1 / 3, 1 / 3],
    [_A1, _B1, _B1], [_B1, _A1, _B1], [_B1, _B1, _A1],
    [_A2, _B2, _B2], [_B2, _A2, _B2], [_B2, _B2, _A2],
])
TRI7_W = np.array([0.225] + [0.132394152788506] * 3 + [0.125939180544827] * 3)

# edge-midpoint rule, exact for quadratics
TRI3_BARY = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
TRI3_W = np.full(3, 1 / 3)
