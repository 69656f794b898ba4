"""Command line front end for reduced-order robust regulator synthesis.

Every subcommand reads a scenario (``--config``) and writes its artifacts
under ``--out``. Failures print ``{"cause", "message"}`` as JSON on stderr
and exit with status 2; ``verify`` exits 1 when a check fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io, svg
from .balred import evaluation_noise, frequency_grid, sampled_hinf_error
from .cloop import (assemble_closed_loop, regulation_metrics, simulate, stability_margin)
from .config import Scenario, bundled_scenarios, load_scenario
from .errors import ConfigError, DimensionMismatch, RegulatorError
from .fem import initial_state
from .imodel import verify_internal_model
from .linalg import eigenvalues
from .model import to_standard_form
from .synth import Controller, synthesis_report, synthesize

log = logging.getLogger("regulator")


class _Session:
    """Scenario plus lazily built models and controller."""

    def __init__(self, args):
        self.args = args
        self.scenario: Scenario = load_scenario(_resolve_config(args.config), seed=args.seed)
        out = args.out or self.scenario.raw.get("output") or f"out/{self.scenario.name}"
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self._cache = {}

    def _get(self, key, make):
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    def plant(self):
        return self._get("plant", lambda: to_standard_form(self.scenario.synthesis_model())[0])

    def sim_model(self):
        return self._get("sim_model", self.scenario.simulation_model)

    def sim_plant(self):
        return self._get("sim_plant", lambda: to_standard_form(self.sim_model())[0])

    def controller(self, fresh=False) -> Controller:
        """Controller from ``--controller`` unless ``fresh``; otherwise synthesized."""
        if not fresh and self.args.controller:
            ctrl = self._get("loaded", lambda: io.load_controller(self.args.controller))
            if ctrl.layout != self.scenario.layout:
                raise DimensionMismatch("controller internal model does not match the scenario signals")
            return ctrl
        return self._get("synth", lambda: synthesize(self.scenario.kind, self.plant(),
                                                     self.scenario.layout, self.scenario.options))


def _resolve_config(name):
    if name is None:
        raise ConfigError("--config is required")
    path = Path(name)
    if not path.exists():
        bundled = bundled_scenarios()
        key = path.name[:-5] if path.name.endswith(".json") else path.name
        if key in bundled:
            return bundled[key]
    return path


def _emit(data):
    print(json.dumps(io._jsonable(data), indent=2, sort_keys=True))


def cmd_synthesize(s: _Session) -> int:
    """Synthesize a controller and write it with a synthesis report."""
    ctrl = s.controller(fresh=True)
    io.save_controller(ctrl, s.out / "controller")
    report = synthesis_report(ctrl)
    io.write_json(s.out / "synthesis_report.json", report)
    _emit({"controller_dir": str(s.out / "controller"), "dim": ctrl.dim,
           "reduced_order": ctrl.reduced_order, "passed": report["passed"]})
    return 0


def cmd_spectrum(s: _Session) -> int:
    """Write open- and closed-loop spectra on the simulation model."""
    ctrl = s.controller()
    pf = s.sim_plant()
    G = s.sim_model()
    open_ev = eigenvalues(pf.A)
    closed_ev = eigenvalues(assemble_closed_loop(pf, ctrl).A_e)
    io.write_spectrum(s.out / "spectrum.csv", {"open": open_ev, "closed": closed_ev})
    (s.out / "spectrum.svg").write_text(svg.scatter(
        {"open loop": open_ev, "closed loop": closed_ev},
        title=f"{s.scenario.name}: spectra (n={G.n})"))
    _emit({"open_abscissa": float(open_ev.real.max()), "closed_abscissa": float(closed_ev.real.max()),
           "n_open": len(open_ev), "n_closed": len(closed_ev)})
    return 0


def cmd_hankel(s: _Session) -> int:
    """Write the Hankel singular values of the reduced subsystem."""
    ctrl = s.controller()
    sigma = np.asarray(ctrl.provenance.get("hankel", []), dtype=float)
    io.write_hankel(s.out / "hankel.csv", sigma)
    (s.out / "hankel.svg").write_text(svg.lines(
        np.arange(1, len(sigma) + 1), {"sigma_k": sigma}, title=f"{s.scenario.name}: Hankel values",
        xlabel="k", ylabel="sigma_k", ylog=True, markers=True))
    _emit({"count": len(sigma), "r": ctrl.provenance.get("r"),
           "tail_sum": ctrl.provenance.get("hankel_tail_sum"),
           "bound": ctrl.provenance.get("truncation_bound")})
    return 0


def cmd_simulate(s: _Session) -> int:
    """Simulate the closed loop and write the trajectory and metrics."""
    ctrl = s.controller()
    sc = s.scenario
    G = s.sim_model()
    settings = sc.simulation
    x0 = initial_state(G, sc.initial_function("x0"), sc.initial_function("v1")) \
        if G.kind != "matrices" else _vector_state(G, sc.initial_function("x0"))
    traj = simulate(G, ctrl, sc.reference, sc.disturbance if G.d_f.shape[1] else None,
                    x0=x0, z0=settings.z0, t_end=settings.t_end, dt=settings.dt,
                    state_stride=settings.state_stride)
    metrics = regulation_metrics(traj, settings.settle_fraction)
    metrics["closed_loop_margin"] = stability_margin(assemble_closed_loop(s.sim_plant(), ctrl))
    io.write_trajectory(s.out / "trajectory.csv", traj)
    series = {}
    for j in range(traj.y.shape[1]):
        series[f"y_{j + 1}"] = traj.y[:, j]
        series[f"yref_{j + 1}"] = traj.yref[:, j]
    (s.out / "trajectory.svg").write_text(svg.lines(traj.t, series, title=f"{sc.name}: tracking",
                                                    ylabel="output"))
    io.write_json(s.out / "metrics.json", metrics)
    _emit(metrics)
    return 0


def _vector_state(G, x0):
    if x0 is None:
        return np.zeros(G.n)
    return np.broadcast_to(np.asarray(x0, dtype=float), (G.n,)).copy()


def cmd_verify(s: _Session) -> int:
    """Re-run all design checks; exit 1 if any fails."""
    sc = s.scenario
    plant = s.plant()
    opts = sc.options
    # assumption failures abort synthesis with AssumptionViolated
    ctrl = s.controller(fresh=True)
    rep = synthesis_report(ctrl)
    checks = {
        "rosenbrock": {"passed": True, "margins": rep["rosenbrock_margins"]},
        "hautus": {"passed": True, "margins": rep["hautus_margins"]},
    }
    checks["internal_model"] = rep["internal_model"]
    checks["riccati"] = {"passed": all(v <= opts.care_tol for v in rep["riccati_residuals"].values()),
                         "residuals": rep["riccati_residuals"], "tol": opts.care_tol}
    checks["design_margins"] = {"passed": rep["passed"], "step_abscissas": rep["step_abscissas"]}

    stab, red = ctrl.artifacts.get("stabilized"), ctrl.artifacts.get("reduced")
    bound = ctrl.provenance.get("truncation_bound", 0.0)
    if stab is not None and red is not None and red.n < stab.n:
        grid = frequency_grid(sc.layout.all_frequencies[0])
        err = sampled_hinf_error(stab, red, grid)
        # stiff models: the rounding floor of the evaluation may dominate the bound
        noise = evaluation_noise(stab, grid, seed=opts.seed)
        checks["truncation_bound"] = {"passed": err <= bound + 1e-6 + noise, "sampled_error": err,
                                      "bound": bound, "evaluation_noise": noise}
    else:
        checks["truncation_bound"] = {"passed": True, "sampled_error": 0.0, "bound": bound,
                                      "note": "no truncation performed"}

    used = s.controller()
    im = verify_internal_model(used.G1c[:used.layout.dim, :used.layout.dim], used.layout)
    checks["controller_internal_model"] = im
    m_syn = stability_margin(assemble_closed_loop(plant, used))
    m_sim = stability_margin(assemble_closed_loop(s.sim_plant(), used))
    checks["closed_loop"] = {"passed": m_syn > 0 and m_sim > 0, "synthesis_model_margin": m_syn,
                             "simulation_model_margin": m_sim}
    passed = all(c.get("passed", False) for c in checks.values())
    report = {"passed": passed, "checks": checks}
    io.write_json(s.out / "verify_report.json", report)
    _emit({k: v.get("passed") for k, v in checks.items()} | {"passed": passed})
    return 0 if passed else 1


COMMANDS = {"synthesize": cmd_synthesize, "spectrum": cmd_spectrum, "hankel": cmd_hankel,
            "simulate": cmd_simulate, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="regulator", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True,
                       help="scenario JSON file, or the name of a bundled scenario")
        p.add_argument("--out", help="output directory (default: out/<scenario name>)")
        p.add_argument("--controller", help="directory with a saved controller")
        p.add_argument("--seed", type=int, help="override the synthesis seed")
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("REGULATOR_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](_Session(args))
    except RegulatorError as exc:
        print(json.dumps({"cause": exc.cause, "message": str(exc)}), file=sys.stderr)
        return 2
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(json.dumps({"cause": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
