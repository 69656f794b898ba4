"""Galerkin diagnostics under mesh refinement: heat transfer values at the
signal frequencies and the beam spectrum near the accumulation point.

    python scripts/convergence.py
"""
import json

import numpy as np

from regulator.config import build_model, bundled_scenarios
from regulator.model import to_standard_form, transfer_value


def load(name):
    return json.loads(bundled_scenarios()[name].read_text())


def heat_table(levels=(25, 50, 100, 200, 400), freqs=(1, 2, 3, 4)):
    model = load("heat1d_dual")["model"]
    prev = None
    print("N," + ",".join(f"|dP(i{w})|" for w in freqs))
    for N in levels:
        sys = to_standard_form(build_model({**model, "N": N}))[0]
        vals = np.array([transfer_value(sys, 1j * w)[0, 0] for w in freqs])
        if prev is not None:
            print(f"{N}," + ",".join(f"{d:.3e}" for d in np.abs(vals - prev)))
        prev = vals


def beam_table(elements=(4, 8, 16, 32, 64)):
    model = load("beam1d_observer")["model"]
    target = -model["alpha"] / model["beta"]
    print("n,distance_to_accumulation_point")
    for ne in elements:
        G = build_model({**model, "elements": ne, "order": None})
        ev = np.linalg.eigvals(to_standard_form(G)[0].A)
        print(f"{G.n},{np.min(np.abs(ev - target)):.3e}")


if __name__ == "__main__":
    heat_table()
    print()
    beam_table()
