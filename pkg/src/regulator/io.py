"""CSV and JSON artifacts: matrices, controllers, trajectories, spectra."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .imodel import InternalModelLayout
from .synth import Controller

FMT = "%.17g"
CONTROLLER_FILES = ("G1c.csv", "G2c.csv", "Kc.csv")


def write_matrix(path, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w") as fh:
        for row in M:
            fh.write(",".join(FMT % v for v in row) + "\n")


def read_matrix(path, shape=None) -> np.ndarray:
    try:
        rows = [line.strip() for line in Path(path).read_text().splitlines() if line.strip()]
        M = np.array([[float(v) for v in row.split(",")] for row in rows], dtype=float)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot parse matrix file {path}: {exc}") from exc
    if rows and len({len(r.split(",")) for r in rows}) != 1:
        raise ConfigError(f"ragged rows in {path}")
    if not np.all(np.isfinite(M)):
        raise ConfigError(f"non-finite entries in {path}")
    if shape is not None:
        try:
            M = M.reshape(shape)
        except ValueError as exc:
            raise ConfigError(f"{path} has shape {M.shape}, expected {shape}") from exc
    return M


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, data):
    Path(path).write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")


def save_controller(ctrl: Controller, directory) -> Path:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, M in zip(CONTROLLER_FILES, (ctrl.G1c, ctrl.G2c, ctrl.Kc)):
        write_matrix(d / name, M)
    write_json(d / "manifest.json", {"kind": ctrl.kind, "dim": ctrl.dim,
                                     "layout": ctrl.layout.to_dict(),
                                     "provenance": ctrl.provenance})
    return d


def load_controller(directory) -> Controller:
    d = Path(directory)
    try:
        manifest = json.loads((d / "manifest.json").read_text())
        layout = InternalModelLayout.from_dict(manifest["layout"])
        kind = manifest["kind"]
        dim = int(manifest["dim"])
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read controller manifest in {d}: {exc}") from exc
    G1c = read_matrix(d / "G1c.csv", (dim, dim))
    G2c = read_matrix(d / "G2c.csv", (dim, layout.p))
    Kc = read_matrix(d / "Kc.csv")
    if Kc.shape[1] != dim:
        raise ConfigError(f"Kc.csv has {Kc.shape[1]} columns, expected {dim}")
    try:
        return Controller(G1c, G2c, Kc, layout, kind, manifest.get("provenance", {}))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([FMT % v if isinstance(v, (float, np.floating)) else v for v in row])


def write_trajectory(path, traj):
    p, m = traj.y.shape[1], traj.u.shape[1]
    header = (["t"] + [f"y_{i + 1}" for i in range(p)] + [f"yref_{i + 1}" for i in range(p)]
              + [f"e_{i + 1}" for i in range(p)] + [f"u_{i + 1}" for i in range(m)])
    data = np.column_stack([traj.t, traj.y, traj.yref, traj.e, traj.u])
    _write_rows(path, header, (list(map(float, r)) for r in data))


def write_spectrum(path, sources: dict):
    """``sources`` maps a label (``open``, ``closed``) to eigenvalues."""
    rows = [(float(z.real), float(z.imag), src) for src, ev in sources.items() for z in ev]
    _write_rows(path, ["re", "im", "source"], rows)


def read_spectrum(path) -> dict:
    out = {}
    with open(path) as fh:
        for row in csv.DictReader(fh):
            out.setdefault(row["source"], []).append(complex(float(row["re"]), float(row["im"])))
    return {k: np.array(v) for k, v in out.items()}


def write_hankel(path, sigma):
    _write_rows(path, ["index", "sigma"], ((i + 1, float(s)) for i, s in enumerate(sigma)))
