"""Internal model blocks and Hautus-type rank diagnostics."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from . import linalg
from .errors import AssumptionViolated, SingularInternalModelCoupling
from .model import ZERO_TOL, SignalSpec, StateSpace, rosenbrock_full_rank, transfer_value

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InternalModelLayout:
    """Block layout of the internal model state.

    ``frequencies`` are the strictly positive frequencies with Jordan chain
    lengths ``orders``; the zero frequency is present iff ``include_zero``,
    with chain length ``zero_order``.
    """
    p: int
    frequencies: tuple = ()
    orders: tuple = ()
    include_zero: bool = False
    zero_order: int = 1
    offsets: tuple = field(init=False)

    def __post_init__(self):
        freqs = tuple(float(w) for w in self.frequencies)
        orders = tuple(int(n) for n in self.orders) or (1,) * len(freqs)
        if len(orders) != len(freqs):
            raise ValueError("one order per frequency expected")
        if any(w <= 0 for w in freqs) or any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("nonzero frequencies must be positive and strictly increasing")
        if self.p < 1 or any(n < 1 for n in orders) or self.zero_order < 1:
            raise ValueError("p and all orders must be positive")
        offs, pos = [], 0
        if self.include_zero:
            offs.append(pos)
            pos += self.p * self.zero_order
        for n in orders:
            offs.append(pos)
            pos += 2 * self.p * n
        object.__setattr__(self, "frequencies", freqs)
        object.__setattr__(self, "orders", orders)
        object.__setattr__(self, "offsets", tuple(offs) + (pos,))

    @property
    def dim(self) -> int:
        return self.offsets[-1]

    @property
    def all_frequencies(self):
        """Frequencies including 0 when present, with their orders."""
        ws = ((0.0,) if self.include_zero else ()) + self.frequencies
        ns = ((self.zero_order,) if self.include_zero else ()) + self.orders
        return ws, ns

    @classmethod
    def from_signals(cls, p: int, signals: Sequence[SignalSpec], include_zero=None):
        """Union of the frequencies of the given signals, with the largest
        declared order for each; 0 is included only if some signal has it."""
        table = {}
        for s in signals:
            for w, n in zip(s.frequencies, s.orders):
                table[w] = max(table.get(w, 1), n)
        has_zero = 0.0 in table
        zero_order = table.pop(0.0, 1)
        if include_zero is None:
            include_zero = has_zero
        freqs = sorted(table)
        return cls(p, tuple(freqs), tuple(table[w] for w in freqs), bool(include_zero), zero_order)

    def to_dict(self):
        return {"p": self.p, "frequencies": list(self.frequencies), "orders": list(self.orders),
                "include_zero": self.include_zero, "zero_order": self.zero_order,
                "dim": self.dim}

    @classmethod
    def from_dict(cls, d):
        return cls(int(d["p"]), tuple(d["frequencies"]), tuple(d["orders"]),
                   bool(d["include_zero"]), int(d.get("zero_order", 1)))


def _blocks(layout: InternalModelLayout):
    """Yield (offset, omega, order) per frequency block."""
    ws, ns = layout.all_frequencies
    for off, w, n in zip(layout.offsets[:-1], ws, ns):
        yield off, w, n


def build_g1(layout: InternalModelLayout) -> np.ndarray:
    """Block-diagonal generator with Jordan chains at each ``+-i w_k``."""
    p = layout.p
    G1 = np.zeros((layout.dim, layout.dim))
    for off, w, n in _blocks(layout):
        if w == 0.0:
            for i in range(n - 1):
                r = off + i * p
                G1[r:r + p, r + p:r + 2 * p] = np.eye(p)
            continue
        Om = np.block([[np.zeros((p, p)), w * np.eye(p)], [-w * np.eye(p), np.zeros((p, p))]])
        for i in range(n):
            r = off + 2 * p * i
            G1[r:r + 2 * p, r:r + 2 * p] = Om
            if i < n - 1:
                G1[r:r + 2 * p, r + 2 * p:r + 4 * p] = np.eye(2 * p)
    return G1


def build_g2(layout: InternalModelLayout) -> np.ndarray:
    """Input matrix feeding the last link of every Jordan chain."""
    p = layout.p
    G2 = np.zeros((layout.dim, p))
    for off, w, n in _blocks(layout):
        if w == 0.0:
            r = off + (n - 1) * p
        else:
            r = off + 2 * p * (n - 1)
        G2[r:r + p, :] = np.eye(p)
    return G2


def _observer_gain(plant: StateSpace):
    S = linalg.solve_filter_care(plant.A, plant.C, np.eye(plant.p), np.eye(plant.n))
    return -S @ plant.C.T


def coupling_transfer(plant: StateSpace, omega: float, L=None):
    """Transfer value used to couple ``K1`` blocks at ``i*omega``.

    If ``i*omega`` is (close to) an eigenvalue of the plant, the output-
    injection stabilized ``C (iw - A - LC)^-1 (B + LD) + D`` is used instead;
    invertibility of its product with ``K1`` does not depend on ``L``.
    """
    ev = linalg.eigenvalues(plant.A)
    scale = max(1.0, np.abs(ev).max()) if ev.size else 1.0
    near = ev.size and np.min(np.abs(ev - 1j * omega)) < 1e-8 * scale
    if not near:
        return transfer_value(plant, 1j * omega)
    L = _observer_gain(plant) if L is None else L
    stab = StateSpace(plant.A + L @ plant.C, plant.B + L @ plant.D, plant.C, plant.D)
    return transfer_value(stab, 1j * omega)


def _fit_coupling(P, rng, zero_tol, tries=20):
    """Real m x p matrix K with P K close to I_p (least squares), falling
    back to seeded random draws if the fit is singular."""
    p, m = P.shape
    lhs = np.vstack([P.real, P.imag])
    rhs = np.vstack([np.eye(p), np.zeros((p, p))])
    K, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    cands = [K] + [rng.standard_normal((m, p)) for _ in range(tries)]
    scale = max(1.0, np.linalg.norm(P, 2))
    for i, K in enumerate(cands):
        if linalg.min_singular_value(P @ K) > zero_tol * scale:
            if i:
                log.warning("least-squares K1 block singular, using random draw %d", i)
            return K
    raise SingularInternalModelCoupling("no invertible P(iw) K1 block found")


def build_k1(layout: InternalModelLayout, plant: StateSpace, zero_tol=ZERO_TOL, seed=0):
    """Output matrix of the internal model for the dual observer-based design.

    Each frequency block reads only its leading p coordinates through a block
    ``K`` with ``P(iw_k) K`` invertible: the identity when m = p, a real
    least-squares right inverse otherwise.
    """
    p, m = layout.p, plant.m
    if plant.p != p:
        raise ValueError(f"layout has p={p} but the plant has {plant.p} outputs")
    K1 = np.zeros((m, layout.dim))
    rng = np.random.default_rng(seed)
    for off, w, n in _blocks(layout):
        ok, margin = rosenbrock_full_rank(plant, w, zero_tol)
        if not ok:
            raise AssumptionViolated(f"i*{w:g} is an invariant zero (margin {margin:.2e})")
        if m == p:
            Kk = np.eye(p)
        else:
            P = coupling_transfer(plant, w)
            Kk = _fit_coupling(P, rng, zero_tol)
        K1[:, off:off + p] = Kk
    return K1


def hautus_margin(A, B, shift: float = 0.0, mode: str = "stabilizability") -> float:
    """Smallest ``sigma_min([lam I - (A + shift I), B])`` over eigenvalues
    ``lam`` of ``A + shift I`` with nonnegative real part (``inf`` if none).

    ``mode="detectability"`` takes ``B`` as an output matrix and tests the
    transposed pair.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if mode == "detectability":
        A, B = A.T, B.reshape(-1, A.shape[0]).T
    elif mode != "stabilizability":
        raise ValueError(f"unknown mode {mode!r}")
    n = A.shape[0]
    B = B.reshape(n, -1)
    As = A + shift * np.eye(n)
    ev = linalg.eigenvalues(As)
    margin = np.inf
    for lam in ev[ev.real >= 0]:
        Hm = np.hstack([lam * np.eye(n) - As, B.astype(complex)])
        margin = min(margin, sla.svdvals(Hm)[-1])
    return float(margin)


def _nullity(M, tol):
    s = sla.svdvals(M)
    return int(np.sum(s <= tol * max(1.0, s[0] if s.size else 1.0)))


def verify_internal_model(G1, layout: InternalModelLayout, tol=1e-9) -> dict:
    """Check that ``G1`` carries ``p`` independent Jordan chains of length
    ``n_k`` at each ``+-i w_k`` and nothing else."""
    G1 = np.asarray(G1, dtype=float)
    dim = layout.dim
    report = {"dim": int(G1.shape[0]), "expected_dim": dim, "eigenvalues": [], "passed": True}
    if G1.shape != (dim, dim):
        report["passed"] = False
        report["error"] = f"G1 has shape {G1.shape}, layout dimension {dim}"
        return report
    p = layout.p
    total = 0
    eye = np.eye(dim)
    ev = linalg.eigenvalues(G1)
    for w, n in zip(*layout.all_frequencies):
        for lam in ((0j,) if w == 0 else (1j * w, -1j * w)):
            Z = lam * eye - G1
            geo = _nullity(Z, tol)
            alg = _nullity(np.linalg.matrix_power(Z, n), tol) if n > 1 else geo
            # full algebraic multiplicity: nullity stabilizes at power n
            alg_next = _nullity(np.linalg.matrix_power(Z, n + 1), tol)
            rank = dim - geo
            dev = float(np.min(np.abs(ev - lam))) if ev.size else np.inf
            entry = {"eigenvalue": [lam.real, lam.imag], "algebraic": alg_next,
                     "geometric": geo, "rank": rank, "expected_algebraic": p * n,
                     "nearest_computed_distance": dev}
            entry["passed"] = (geo == p and alg == alg_next == p * n and rank == dim - p)
            report["eigenvalues"].append(entry)
            report["passed"] &= entry["passed"]
            total += alg_next
    report["spectrum_accounted"] = total
    if total != dim:
        report["passed"] = False
    return report
