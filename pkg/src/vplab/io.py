"""CSV / NPZ / JSON exporters with declared headers."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def _path(p):
    p = Path(p)
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def write_csv(path, header, rows):
    with open(_path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, obj):
    with open(_path(path), "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)


def export_kernel(table, path):
    """Kernel table as npz (values, Fourier coefficients, metadata) or CSV in 1D."""
    path = Path(path)
    meta = dict(d=table.d, M=table.M, eps=table.eps, r=table.r, profile=table.profile,
                kind=table.kind)
    if path.suffix == ".csv":
        if table.d != 1:
            raise ValueError("CSV kernel export is one-dimensional")
        vals = table.values[0] if table.kind == "force" else table.values
        write_csv(path, ["x", "value"], zip(table.x, vals))
    else:
        np.savez(_path(path), values=table.values, fourier=table.fourier_coeffs,
                 meta=json.dumps(meta))
    return meta


def export_trajectory(run, path):
    """Particle snapshots: CSV rows (t, i, x..., v...) or npz arrays."""
    path = Path(path)
    if path.suffix == ".npz":
        np.savez(_path(path), times=run.times, positions=np.array(run.positions),
                 velocities=np.array(run.velocities))
        return
    d = run.positions[0].shape[1]
    header = ["t", "i"] + [f"x{a}" for a in range(d)] + [f"v{a}" for a in range(d)]

    def rows():
        for t, x, v in zip(run.times, run.positions, run.velocities):
            for i in range(x.shape[0]):
                yield [t, i, *x[i], *v[i]]
    write_csv(path, header, rows())


def export_energy(reports, path):
    write_csv(path, ["t", "kinetic", "potential", "total"],
              ([e.time, e.kinetic, e.potential, e.total] for e in reports))


def export_field(run, path):
    """E(t, x) on the field time grid, one row per time."""
    M = run.field.shape[1]
    write_csv(path, ["t"] + [f"E{i}" for i in range(M)],
              ([t, *row] for t, row in zip(run.field_times, run.field)))


def export_snapshots(run, path):
    np.savez(_path(path), times=run.times, f=np.array([s.f for s in run.snapshots]),
             vmax=run.snapshots[0].vmax)


def export_plan(plan, path):
    """Transport plan as (i, j, mass) triplets."""
    P = plan.plan
    write_csv(path, ["i", "j", "mass"], zip(P.row, P.col, P.data))


def export_corrector(state, t, path, frequency=None):
    from .correctors import corrector_R
    R, g = corrector_R(state, t, frequency)
    M = state.d_plus.shape[-1]
    x = -0.5 + (np.arange(M) + 0.5) / M
    dp = state.d_plus[0]
    write_csv(path, ["x", "re_d_plus", "im_d_plus", "R"],
              zip(x, dp.real, dp.imag, R.values[0]))
    return g
