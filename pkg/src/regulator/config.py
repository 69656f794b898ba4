"""Scenario configuration: JSON schema validation, safe coefficient
expressions, and construction of models, signals and options."""
from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional

import jsonschema
import numpy as np

from .errors import ConfigError
from .fem import (Coefficient1D, Field2D, assemble_beam_1d, assemble_heat_1d, assemble_rdc_2d,
                  beam_elements_for_order, disk_mesh)
from .fem.disk import p1_loads_2d
from .imodel import InternalModelLayout
from .io import read_matrix
from .model import GalerkinSystem, SignalSpec
from .synth import SynthesisOptions

_FUNCS = {name: getattr(np, name) for name in
          ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh", "sinh", "cosh", "arctan")}
_CONSTS = {"pi": math.pi, "e": math.e}
_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
          ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd)


def load_schema() -> dict:
    text = resources.files("regulator.scenarios").joinpath("scenario.schema.json").read_text()
    return json.loads(text)


def parse_expression(text: str, variables) -> Callable:
    """Compile an arithmetic expression in the given variables into a
    vectorized function. Only arithmetic, a fixed set of numpy functions
    and the constants ``pi`` and ``e`` are accepted."""
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse expression {text!r}: {exc.msg}") from exc
    allowed = set(variables) | set(_FUNCS) | set(_CONSTS)
    for node in ast.walk(tree):
        if not isinstance(node, _NODES):
            raise ConfigError(f"disallowed syntax {type(node).__name__} in {text!r}")
        if isinstance(node, ast.Name) and node.id not in allowed:
            raise ConfigError(f"unknown name {node.id!r} in {text!r}")
        if isinstance(node, ast.Call) and not (isinstance(node.func, ast.Name)
                                               and node.func.id in _FUNCS and not node.keywords):
            raise ConfigError(f"only plain calls to {sorted(_FUNCS)} are allowed in {text!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise ConfigError(f"non-numeric constant in {text!r}")
    code = compile(tree, "<expression>", "eval")
    env = {"__builtins__": {}, **_FUNCS, **_CONSTS}

    def f(*args):
        vals = dict(zip(variables, (np.asarray(a, dtype=float) for a in args)))
        out = eval(code, env, vals)  # names and node types whitelisted above
        return np.broadcast_to(np.asarray(out, dtype=float), np.shape(args[0]))
    return f


def field_1d(spec) -> Coefficient1D:
    if isinstance(spec, (int, float)):
        return Coefficient1D.constant(spec)
    if isinstance(spec, str):
        f = parse_expression(spec, ("x",))
        return Coefficient1D(f, (), spec)
    if "indicator" in spec:
        a, b = spec["indicator"]
        return Coefficient1D.indicator(a, b, spec.get("value", 1.0))
    raise ConfigError(f"field {spec!r} is not valid on an interval")


def field_2d(spec) -> Field2D:
    if isinstance(spec, (int, float)):
        return Field2D.constant(spec)
    if isinstance(spec, str):
        return Field2D(parse_expression(spec, ("x1", "x2")))
    if "rectangle" in spec:
        xr, yr = spec["rectangle"]
        return Field2D.box(xr, yr, spec.get("value", 1.0))
    raise ConfigError(f"field {spec!r} is not valid on a planar domain")


def signal_from_config(spec: Optional[dict], channels: Optional[int] = None) -> SignalSpec:
    """Sum of terms ``{"omega", "cos": [per channel], "sin": [...]}``;
    each channel entry is a number or ascending polynomial coefficients."""
    if spec is None:
        return SignalSpec.zero(channels or 1)
    p = int(spec["channels"])
    if channels is not None and p != channels:
        raise ConfigError(f"signal has {p} channels, expected {channels}")
    table = {}
    for term in spec.get("terms", []):
        w = float(term["omega"])
        entry = table.setdefault(w, {"cos": [np.zeros(1) for _ in range(p)],
                                     "sin": [np.zeros(1) for _ in range(p)], "order": 1})
        for key in ("cos", "sin"):
            coeffs = term.get(key, [])
            if coeffs and len(coeffs) != p:
                raise ConfigError(f"term at omega={w:g} needs {p} '{key}' entries")
            for j, c in enumerate(coeffs):
                c = np.atleast_1d(np.asarray(c, dtype=float))
                cur = entry[key][j]
                size = max(len(cur), len(c))
                entry[key][j] = np.pad(cur, (0, size - len(cur))) + np.pad(c, (0, size - len(c)))
        entry["order"] = max(entry["order"], int(term.get("order", 1)))
    freqs = sorted(table)
    cos = tuple(tuple(tuple(c) for c in table[w]["cos"]) for w in freqs)
    sin = tuple(tuple(tuple(c) for c in table[w]["sin"]) for w in freqs)
    orders = tuple(max(table[w]["order"], *(len(c) for c in table[w]["cos"] + table[w]["sin"]))
                   for w in freqs)
    try:
        return SignalSpec(tuple(freqs), cos, sin, p, orders)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _matrix(value, base: Path, name: str):
    if isinstance(value, str):
        path = Path(value) if Path(value).is_absolute() else base / value
        if not path.exists():
            raise ConfigError(f"matrix file for {name} not found: {path}")
        return read_matrix(path)
    return np.atleast_2d(np.asarray(value, dtype=float))


def build_model(spec: dict, base: Path = Path("."), simulation: bool = False) -> GalerkinSystem:
    """Galerkin system for a model section; ``simulation`` selects the
    finer discretization where one is configured."""
    kind = spec["type"]
    if kind == "heat1d":
        N = spec.get("sim_N", spec["N"]) if simulation else spec["N"]
        return assemble_heat_1d(field_1d(spec["alpha"]), field_1d(spec["gamma"]),
                                [field_1d(f) for f in spec["b"]], [field_1d(f) for f in spec["c"]],
                                N, spec.get("length", 1.0), spec.get("neumann_disturbance", True))
    if kind == "rdc2d":
        level = spec.get("sim_level", spec["level"]) if simulation else spec["level"]
        mesh = disk_mesh(level)
        G = assemble_rdc_2d(mesh, field_2d(spec["alpha"]), field_2d(spec["gamma"]),
                            [field_2d(f) for f in spec["beta"]],
                            [field_2d(f) for f in spec["b"]], [field_2d(f) for f in spec["c"]])
        if "source" in spec:
            G.d_f = p1_loads_2d(mesh, [field_2d(spec["source"])])[mesh.interior_nodes]
        G.meta["level"] = level
        return G
    if kind == "beam1d":
        elements = spec.get("elements") or beam_elements_for_order(spec.get("order", 60))
        if simulation:
            elements = spec.get("sim_elements", elements)
        opt = lambda key: [field_1d(f) for f in spec[key]] if key in spec else None  # noqa: E731
        return assemble_beam_1d(spec["length"], spec["alpha"], spec["beta"], spec["gamma"],
                                opt("b"), opt("c_deflection"), opt("c_velocity"),
                                opt("disturbance"), elements)
    if kind == "matrices":
        A = _matrix(spec["A"], base, "A")
        n = A.shape[0]
        M = _matrix(spec["M"], base, "M") if "M" in spec else np.eye(n)
        D = _matrix(spec["D"], base, "D") if "D" in spec else None
        Bd = _matrix(spec["Bd"], base, "Bd") if "Bd" in spec else None
        try:
            return GalerkinSystem(M, A, _matrix(spec["B"], base, "B"), _matrix(spec["C"], base, "C"),
                                  Bd, D, kind="matrices")
        except ValueError as exc:
            raise ConfigError(f"inconsistent matrix dimensions: {exc}") from exc
    raise ConfigError(f"unknown model type {kind!r}")


@dataclass
class SimulationSettings:
    t_end: float = 30.0
    dt: float = 2e-3
    x0: Any = None
    v1: Any = None
    z0: Any = 0.0
    settle_fraction: float = 0.1
    state_stride: Optional[int] = None


@dataclass
class Scenario:
    name: str
    model: dict
    kind: str
    reference: SignalSpec
    disturbance: SignalSpec
    layout: InternalModelLayout
    options: SynthesisOptions
    simulation: SimulationSettings
    base: Path = field(default=Path("."))
    raw: dict = field(default_factory=dict, repr=False)

    def synthesis_model(self) -> GalerkinSystem:
        return build_model(self.model, self.base)

    def simulation_model(self) -> GalerkinSystem:
        return build_model(self.model, self.base, simulation=True)

    def initial_function(self, key="x0"):
        """Initial data as a callable, scalar, vector or ``None``."""
        spec = getattr(self.simulation, key)
        if isinstance(spec, str):
            variables = ("x1", "x2") if self.model["type"] == "rdc2d" else ("x",)
            return parse_expression(spec, variables)
        if isinstance(spec, list):
            return np.asarray(spec, dtype=float)
        return spec


def validate(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid scenario at {where}: {exc.message}") from exc


def scenario_from_dict(cfg: dict, base: Path = Path("."), seed: Optional[int] = None) -> Scenario:
    validate(cfg)
    syn = dict(cfg["synthesis"])
    kind = syn.pop("kind")
    if seed is not None:
        syn["seed"] = seed
    model = cfg["model"]
    G = build_model(model, base)
    p = G.C_f.shape[0]
    sig = cfg["signals"]
    ref = signal_from_config(sig["reference"], p)
    md = G.d_f.shape[1]
    dist = signal_from_config(sig.get("disturbance"), md if md else None)
    if md == 0 and dist.frequencies:
        raise ConfigError("disturbance signal given but the model has no disturbance input")
    layout = InternalModelLayout.from_signals(p, [ref, dist], sig.get("include_zero"))
    if layout.dim == 0:
        raise ConfigError("signals contain no frequencies; the internal model would be empty")
    for key in ("R1", "R2"):
        if isinstance(syn.get(key), list):
            syn[key] = np.asarray(syn[key], dtype=float)
    try:
        opts = SynthesisOptions(N=G.n, **syn)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid synthesis options: {exc}") from exc
    sim = SimulationSettings(**cfg.get("simulation", {}))
    return Scenario(cfg.get("name", "scenario"), model, kind, ref, dist, layout, opts, sim,
                    base, cfg)


def load_scenario(path, seed: Optional[int] = None) -> Scenario:
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(cfg, path.parent, seed)


def bundled_scenarios() -> dict:
    """Names and paths of the scenarios shipped with the package."""
    root = resources.files("regulator.scenarios")
    return {p.name[:-5]: Path(str(p)) for p in root.iterdir()
            if p.name.endswith(".json") and not p.name.endswith(".schema.json")}
