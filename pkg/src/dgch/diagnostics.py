"""Conserved-quantity evaluation and CSV/JSON output."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Iterable, List

import numpy as np

from .operators import FieldState, ModelParams, momentum
from .spectral import Grid, NormFamily, derivative, integrate_periodic, sobolev_norm

TIMESERIES_HEADER = "t,mean_u,mean_m,energy,norm_h1g,min_slope,max_abs_u"
SNAPSHOT_HEADER = "x,u"


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    mean_u: float
    mean_m: float
    energy: float
    norm_h1g: float
    min_slope: float
    max_abs_u: float


def conserved_quantities(state: FieldState, params: ModelParams) -> DiagnosticsRecord:
    """Integrals of u, m and u*m by the periodic trapezoid rule, plus monitors."""
    grid, u = state.grid, state.u
    m = momentum(grid, u, params.L)
    return DiagnosticsRecord(
        time=float(state.time),
        mean_u=integrate_periodic(grid, u),
        mean_m=integrate_periodic(grid, m),
        energy=integrate_periodic(grid, u * m),
        norm_h1g=sobolev_norm(grid, u, 1.0, NormFamily.gamma(params.L)),
        min_slope=float(np.min(derivative(grid, u, 1))),
        max_abs_u=float(np.max(np.abs(u))),
    )


def energy_rate(grid: Grid, u, params: ModelParams) -> float:
    """Predicted dE/dt = (4b - 2a) * integral(u u_x m)."""
    m = momentum(grid, u, params.L)
    ux = derivative(grid, u, 1)
    return (4 * params.b - 2 * params.a) * integrate_periodic(grid, u * ux * m)


def relative_drift(values, scale: float | None = None) -> float:
    """max |q(t) - q(0)| / scale; scale defaults to |q(0)|.

    Callers pass an explicit scale for quantities whose initial value is zero.
    """
    values = np.asarray(values, dtype=float)
    ref = abs(values[0]) if scale is None else scale
    dev = float(np.max(np.abs(values - values[0])))
    if ref == 0:
        return dev
    return dev / ref


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _open_for_write(path):
    path = Path(path)
    try:
        return path.open("w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_timeseries(trail: Iterable[DiagnosticsRecord], path) -> None:
    with _open_for_write(path) as fh:
        fh.write(TIMESERIES_HEADER + "\n")
        for rec in trail:
            fh.write(",".join(_fmt(v) for v in astuple(rec)) + "\n")


def read_timeseries(path) -> List[DiagnosticsRecord]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != TIMESERIES_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [DiagnosticsRecord(*map(float, row)) for row in reader if row]


def write_snapshot(state: FieldState, path) -> None:
    with _open_for_write(path) as fh:
        fh.write(SNAPSHOT_HEADER + "\n")
        for x, u in zip(state.grid.nodes, state.u):
            fh.write(f"{_fmt(x)},{_fmt(u)}\n")


def read_snapshot(path) -> tuple:
    """Return (x, u) arrays from a snapshot file."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def write_json(payload, path) -> None:
    """Deterministic JSON (sorted keys, fixed indentation)."""
    path = Path(path)
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


RECORD_FIELDS = tuple(f.name for f in fields(DiagnosticsRecord))
