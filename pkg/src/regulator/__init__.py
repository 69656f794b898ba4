"""Reduced order robust output regulation for Galerkin models of parabolic PDEs."""
from .cloop import assemble_closed_loop, regulation_metrics, simulate, stability_margin
from .errors import RegulatorError
from .imodel import InternalModelLayout
from .model import GalerkinSystem, SignalSpec, StateSpace, to_standard_form
from .synth import (Controller, SynthesisOptions, synthesis_report,
                    synthesize_dual_observer_based, synthesize_observer_based)

__version__ = "0.1.0"

__all__ = [
    "Controller", "GalerkinSystem", "InternalModelLayout", "RegulatorError", "SignalSpec",
    "StateSpace", "SynthesisOptions", "assemble_closed_loop", "regulation_metrics", "simulate",
    "stability_margin", "synthesis_report", "synthesize_dual_observer_based",
    "synthesize_observer_based", "to_standard_form",
]
