"""Closed-loop margin of the nominal heat controller as the reaction
coefficient is scaled; prints a CSV table.

    python scripts/gamma_sweep.py --lo 0.9 --hi 1.1 --steps 21
"""
import argparse
import csv
import json
import sys

import numpy as np

from regulator.cloop import assemble_closed_loop, stability_margin
from regulator.config import build_model, bundled_scenarios, scenario_from_dict
from regulator.model import to_standard_form
from regulator.synth import synthesize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=float, default=0.9)
    ap.add_argument("--hi", type=float, default=1.1)
    ap.add_argument("--steps", type=int, default=21)
    ap.add_argument("--sim-N", type=int, default=300)
    args = ap.parse_args()

    cfg = json.loads(bundled_scenarios()["heat1d_dual"].read_text())
    cfg["model"]["sim_N"] = args.sim_N
    sc = scenario_from_dict(cfg)
    ctrl = synthesize(sc.kind, to_standard_form(sc.synthesis_model())[0], sc.layout, sc.options)
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["scale", "open_abscissa", "closed_loop_margin"])
    for s in np.linspace(args.lo, args.hi, args.steps):
        model = {**sc.model, "gamma": f"{float(s)!r} * ({sc.model['gamma']})"}
        plant = to_standard_form(build_model(model, simulation=True))[0]
        open_abs = float(np.linalg.eigvals(plant.A).real.max())
        margin = stability_margin(assemble_closed_loop(plant, ctrl))
        out.writerow([f"{s:.4f}", f"{open_abs:.4f}", f"{margin:.4f}"])


if __name__ == "__main__":
    main()
