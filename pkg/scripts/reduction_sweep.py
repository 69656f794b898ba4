"""Closed-loop margin and truncation bound against the reduction order for
a bundled scenario; prints a CSV table.

    python scripts/reduction_sweep.py heat1d_dual 2 4 8 12 16
"""
import argparse
import csv
import json
import sys
from dataclasses import replace

from regulator.cloop import assemble_closed_loop, stability_margin
from regulator.config import bundled_scenarios, scenario_from_dict
from regulator.errors import RegulatorError
from regulator.model import to_standard_form
from regulator.synth import synthesize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("scenario")
    ap.add_argument("orders", type=int, nargs="+")
    args = ap.parse_args()

    sc = scenario_from_dict(json.loads(bundled_scenarios()[args.scenario].read_text()))
    plant = to_standard_form(sc.synthesis_model())[0]
    sim_plant = to_standard_form(sc.simulation_model())[0]
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["r", "r_used", "truncation_bound", "margin_synthesis", "margin_simulation"])
    for r in args.orders:
        try:
            ctrl = synthesize(sc.kind, plant, sc.layout, replace(sc.options, r=r))
        except RegulatorError as exc:
            out.writerow([r, "", "", exc.cause, ""])
            continue
        prov = ctrl.provenance
        out.writerow([r, prov["r"], f"{prov['truncation_bound']:.3e}",
                      f"{stability_margin(assemble_closed_loop(plant, ctrl)):.4f}",
                      f"{stability_margin(assemble_closed_loop(sim_plant, ctrl)):.4f}"])


if __name__ == "__main__":
    main()
