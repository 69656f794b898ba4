"""Observer-based and dual observer-based reduced order controller synthesis.

Both pipelines follow the same pattern: build the internal model, stabilize
a Galerkin model with two Riccati-based gains, reduce the stabilized
(finite-dimensional, stable) part by balanced truncation and assemble the
error feedback controller ``z' = G1c z + G2c e, u = Kc z``.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from . import linalg
from .balred import HANKEL_TOL, balanced_truncate, gramians, hankel_values
from .errors import AssumptionViolated, RegulatorError
from .imodel import (InternalModelLayout, build_g1, build_g2, build_k1, hautus_margin,
                     verify_internal_model)
from .model import ZERO_TOL, StateSpace, rosenbrock_full_rank

log = logging.getLogger(__name__)

HAUTUS_MIN = 1e-8
OBSERVER = "observer"
DUAL = "dual-observer"


@dataclass
class SynthesisOptions:
    """Design parameters.

    ``R1`` and ``R2`` may be positive scalars or SPD matrices. The state
    weights are ``q1 * I``, ``q2 * I`` in standard coordinates and
    ``q0 * I`` on the internal model. ``r`` at or above the stabilized
    system order disables truncation.
    """
    alpha1: float = 0.0
    alpha2: float = 0.0
    R1: float | np.ndarray = 1.0
    R2: float | np.ndarray = 1.0
    q0: float = 1.0
    q1: float = 1.0
    q2: float = 1.0
    r: int = 10
    N: int | None = None
    care_tol: float = linalg.CARE_TOL
    lyap_tol: float = linalg.LYAP_TOL
    hankel_tol: float = HANKEL_TOL
    zero_tol: float = ZERO_TOL
    seed: int = 0

    def __post_init__(self):
        if self.alpha1 < 0 or self.alpha2 < 0:
            raise ValueError("alpha1 and alpha2 must be nonnegative")
        if self.r < 1:
            raise ValueError("reduction order must be at least 1")
        if min(self.q0, self.q1, self.q2) <= 0:
            raise ValueError("state weights must be positive")

    def weight(self, name: str, k: int) -> np.ndarray:
        R = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
        if R.shape == (1, 1):
            R = R[0, 0] * np.eye(k)
        if R.shape != (k, k) or not np.allclose(R, R.T):
            raise ValueError(f"{name} must be a positive scalar or a symmetric {k}x{k} matrix")
        if np.linalg.eigvalsh(R).min() <= 0:
            raise ValueError(f"{name} must be positive definite")
        return R

    def to_dict(self):
        d = asdict(self)
        for k in ("R1", "R2"):
            d[k] = np.asarray(d[k]).tolist()
        return d


@dataclass
class Controller:
    """Finite-dimensional error feedback controller ``(G1c, G2c, Kc)``."""
    G1c: np.ndarray
    G2c: np.ndarray
    Kc: np.ndarray
    layout: InternalModelLayout
    kind: str
    provenance: dict = field(default_factory=dict)
    # in-memory only: stabilized and reduced systems from the last synthesis
    artifacts: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.G1c = np.atleast_2d(np.asarray(self.G1c, dtype=float))
        d = self.G1c.shape[0]
        self.G2c = np.asarray(self.G2c, dtype=float).reshape(d, -1)
        self.Kc = np.asarray(self.Kc, dtype=float).reshape(-1, d)
        if self.G1c.shape != (d, d):
            raise ValueError("G1c must be square")
        if self.G2c.shape[1] != self.layout.p:
            raise ValueError(f"G2c has {self.G2c.shape[1]} columns, expected p={self.layout.p}")
        if d < self.layout.dim:
            raise ValueError("controller smaller than its internal model")
        if self.kind not in (OBSERVER, DUAL):
            raise ValueError(f"unknown controller kind {self.kind!r}")

    @property
    def dim(self) -> int:
        return self.G1c.shape[0]

    @property
    def reduced_order(self) -> int:
        return self.dim - self.layout.dim

    @property
    def p(self) -> int:
        return self.G2c.shape[1]

    @property
    def m(self) -> int:
        return self.Kc.shape[0]


def _check_rosenbrock(plant, layout, zero_tol):
    margins = {}
    for w in layout.all_frequencies[0]:
        ok, margin = rosenbrock_full_rank(plant, w, zero_tol)
        margins[w] = margin
        if not ok:
            raise AssumptionViolated(f"i*{w:g} is an invariant zero of the plant (margin {margin:.2e})")
    return margins


def _check_hautus(label, A, B, shift, mode):
    margin = hautus_margin(A, B, shift, mode)
    log.debug("Hautus %s margin %.3e", label, margin)
    if not margin > HAUTUS_MIN:
        raise AssumptionViolated(f"{label} fails the Hautus test (margin {margin:.2e})")
    return margin


def _reduce(stab: StateSpace, opts: SynthesisOptions):
    """Balanced truncation, or the identity when ``r`` covers the full order."""
    if opts.r >= stab.n:
        try:
            hankel = hankel_values(*gramians(stab, tol=None)).tolist()
        except RegulatorError as exc:
            log.warning("Hankel values unavailable: %s", exc)
            hankel = []
        return stab, {"hankel": hankel, "bound": 0.0, "order": stab.n, "tail_sum": 0.0,
                      "truncated": False}
    tr = balanced_truncate(stab, opts.r, hankel_tol=opts.hankel_tol, lyap_tol=opts.lyap_tol)
    if tr.order < opts.r:
        log.info("numerical rank caps the reduction order at %d < %d", tr.order, opts.r)
    tail = float(tr.hankel[tr.order:].sum())
    return tr.reduced, {"hankel": tr.hankel.tolist(), "bound": tr.bound, "order": tr.order,
                        "tail_sum": tail, "truncated": True}


def _prepare(plant, layout, opts):
    if layout.p != plant.p:
        raise ValueError(f"layout has p={layout.p} but the plant has {plant.p} outputs")
    rb = _check_rosenbrock(plant, layout, opts.zero_tol)
    return build_g1(layout), rb


def synthesize_observer_based(plant: StateSpace, layout: InternalModelLayout,
                              opts: SynthesisOptions) -> Controller:
    """Observer-based controller with a reduced order observer part."""
    n, m, p = plant.n, plant.m, plant.p
    A, B, C, D = plant.A, plant.B, plant.C, plant.D
    G1, rb = _prepare(plant, layout, opts)
    G2 = build_g2(layout)
    R1, R2 = opts.weight("R1", p), opts.weight("R2", m)
    nz = layout.dim
    As = np.block([[G1, G2 @ C], [np.zeros((n, nz)), A]])
    Bs = np.vstack([G2 @ D, B])
    hautus = {
        "detectability": _check_hautus("(A + alpha1 I, C)", A, C, opts.alpha1, "detectability"),
        "stabilizability": _check_hautus("(As + alpha2 I, Bs)", As, Bs, opts.alpha2,
                                         "stabilizability"),
    }

    # output injection for the plant
    Aa = A + opts.alpha1 * np.eye(n)
    Q1 = opts.q1 * np.eye(n)
    Sig = linalg.solve_filter_care(Aa, C, R1, Q1, tol=opts.care_tol)
    L = -Sig @ C.T @ np.linalg.inv(R1)
    # state feedback for the internal model plus plant
    As_a = As + opts.alpha2 * np.eye(nz + n)
    Qs = np.diag(np.concatenate([np.full(nz, opts.q0), np.full(n, opts.q2)]))
    Pi = linalg.solve_care(As_a, Bs, R2, Qs, tol=opts.care_tol)
    K = -np.linalg.solve(R2, Bs.T @ Pi)
    K1, K2 = K[:, :nz], K[:, nz:]

    stab = StateSpace(A + L @ C, np.hstack([B + L @ D, L]), K2)
    red, trunc = _reduce(stab, opts)
    AL, BL, Lr, K2r = red.A, red.B[:, :m], red.B[:, m:], red.C
    r = red.n
    G1c = np.block([[G1, np.zeros((nz, r))], [BL @ K1, AL + BL @ K2r]])
    G2c = np.vstack([G2, -Lr])
    Kc = np.hstack([K1, K2r])

    prov = _provenance(opts, plant, trunc, rb, hautus)
    prov["residuals"] = {
        "observer_care": linalg.care_residual(Aa.T, C.T, R1, Q1, Sig),
        "control_care": linalg.care_residual(As_a, Bs, R2, Qs, Pi),
    }
    prov["step_abscissas"] = {
        "observer": linalg.spectral_abscissa(A + L @ C),
        "augmented": linalg.spectral_abscissa(As + Bs @ K),
    }
    return Controller(G1c, G2c, Kc, layout, OBSERVER, prov, {"stabilized": stab, "reduced": red})


def synthesize_dual_observer_based(plant: StateSpace, layout: InternalModelLayout,
                                   opts: SynthesisOptions) -> Controller:
    """Dual observer-based controller with a reduced order stabilizing part."""
    n, m, p = plant.n, plant.m, plant.p
    A, B, C, D = plant.A, plant.B, plant.C, plant.D
    G1, rb = _prepare(plant, layout, opts)
    K1 = build_k1(layout, plant, opts.zero_tol, seed=opts.seed)
    R1, R2 = opts.weight("R1", m), opts.weight("R2", p)
    nz = layout.dim
    As = np.block([[G1, np.zeros((nz, n))], [B @ K1, A]])
    Cs = np.hstack([D @ K1, C])
    hautus = {
        "stabilizability": _check_hautus("(A + alpha1 I, B)", A, B, opts.alpha1,
                                         "stabilizability"),
        "detectability": _check_hautus("(As + alpha2 I, Cs)", As, Cs, opts.alpha2,
                                       "detectability"),
    }

    Aa = A + opts.alpha1 * np.eye(n)
    Q1 = opts.q1 * np.eye(n)
    Sig = linalg.solve_care(Aa, B, R1, Q1, tol=opts.care_tol)
    K2 = -np.linalg.solve(R1, B.T @ Sig)
    As_a = As + opts.alpha2 * np.eye(nz + n)
    Qs = np.diag(np.concatenate([np.full(nz, opts.q0), np.full(n, opts.q2)]))
    Pi = linalg.solve_filter_care(As_a, Cs, R2, Qs, tol=opts.care_tol)
    GL = -Pi @ Cs.T @ np.linalg.inv(R2)
    G2, L = GL[:nz], GL[nz:]

    stab = StateSpace(A + B @ K2, L, np.vstack([C + D @ K2, K2]))
    red, trunc = _reduce(stab, opts)
    AK, Lr, CK, K2r = red.A, red.B, red.C[:p], red.C[p:]
    r = red.n
    G1c = np.block([[G1, G2 @ CK], [np.zeros((r, nz)), AK + Lr @ CK]])
    G2c = np.vstack([G2, Lr])
    Kc = np.hstack([K1, -K2r])

    prov = _provenance(opts, plant, trunc, rb, hautus)
    prov["residuals"] = {
        "control_care": linalg.care_residual(Aa, B, R1, Q1, Sig),
        "observer_care": linalg.care_residual(As_a.T, Cs.T, R2, Qs, Pi),
    }
    prov["step_abscissas"] = {
        "feedback": linalg.spectral_abscissa(A + B @ K2),
        "augmented": linalg.spectral_abscissa(As + GL @ Cs),
    }
    return Controller(G1c, G2c, Kc, layout, DUAL, prov, {"stabilized": stab, "reduced": red})


def _provenance(opts, plant, trunc, rb, hautus):
    return {
        "N": opts.N if opts.N is not None else plant.n,
        "plant_order": plant.n,
        "r": trunc["order"],
        "r_requested": opts.r,
        "hankel": trunc["hankel"],
        "hankel_tail_sum": trunc.get("tail_sum", 0.0),
        "truncation_bound": trunc["bound"],
        "truncated": trunc["truncated"],
        "rosenbrock_margins": {f"{w:g}": v for w, v in rb.items()},
        "hautus_margins": hautus,
        "options": opts.to_dict(),
    }


SYNTHESIZERS = {OBSERVER: synthesize_observer_based, DUAL: synthesize_dual_observer_based}


def synthesize(kind: str, plant: StateSpace, layout: InternalModelLayout,
               opts: SynthesisOptions) -> Controller:
    try:
        return SYNTHESIZERS[kind](plant, layout, opts)
    except KeyError:
        raise ValueError(f"unknown controller kind {kind!r}") from None


def synthesis_report(ctrl: Controller) -> dict:
    """Diagnostics collected during synthesis plus an internal model check."""
    prov = ctrl.provenance
    opts = prov.get("options", {})
    care_tol = opts.get("care_tol", linalg.CARE_TOL)
    residuals = prov.get("residuals", {})
    im = verify_internal_model(ctrl.G1c[:ctrl.layout.dim, :ctrl.layout.dim], ctrl.layout)
    alpha1, alpha2 = opts.get("alpha1", 0.0), opts.get("alpha2", 0.0)
    steps = prov.get("step_abscissas", {})
    slack = 1e-6
    step_ok = all(v < -a + slack for v, a in zip(
        (steps.get("observer", steps.get("feedback", -np.inf)), steps.get("augmented", -np.inf)),
        (alpha1, alpha2)))
    ok = all(v <= care_tol for v in residuals.values()) and im["passed"] and step_ok
    return {
        "kind": ctrl.kind,
        "passed": bool(ok),
        "cause": None,
        "controller_dim": ctrl.dim,
        "internal_model_dim": ctrl.layout.dim,
        "reduced_order": ctrl.reduced_order,
        "margin_target": min(alpha1, alpha2),
        "riccati_residuals": residuals,
        "step_abscissas": steps,
        "hankel_tail_sum": prov.get("hankel_tail_sum"),
        "truncation_bound": prov.get("truncation_bound"),
        "hautus_margins": prov.get("hautus_margins"),
        "rosenbrock_margins": prov.get("rosenbrock_margins"),
        "internal_model": im,
    }


def failure_report(exc: RegulatorError) -> dict:
    """Report for a synthesis that aborted with a regulator error."""
    return {"passed": False, "cause": exc.cause, "message": str(exc)}
