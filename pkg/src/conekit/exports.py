"""Deterministic artifact writers: OBJ meshes, CSV tables, JSON reports.

All floats are written with 17 significant digits and newline-terminated
lines, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np

from .fields import Immersion, MetricField, PeriodicGrid
from .hull import Hull3, OrbitHull


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_obj(obj, path, wrap_faces: bool = False):
    """Write an Immersion (quad grid) or a hull (triangles) as OBJ.

    Immersion nodes are emitted row-major; faces are 1-based.  Periodic
    seam quads are off by default.
    """
    lines = []
    if isinstance(obj, Immersion):
        n = obj.grid.n
        vals = obj.values
        for i in range(n):
            for j in range(n):
                x, y, z = vals[i, j]
                lines.append(f"v {_fmt(x)} {_fmt(y)} {_fmt(z)}")
        limit = n if wrap_faces else n - 1
        for i in range(limit):
            for j in range(limit):
                a = i * n + j + 1
                b = ((i + 1) % n) * n + j + 1
                c = ((i + 1) % n) * n + (j + 1) % n + 1
                d = i * n + (j + 1) % n + 1
                lines.append(f"f {a} {b} {c} {d}")
    else:
        if isinstance(obj, OrbitHull):
            hull = obj.explicit()
        elif isinstance(obj, Hull3):
            hull = obj
        else:
            raise TypeError(f"cannot export {type(obj).__name__} as OBJ")
        for p in hull.points:
            lines.append(f"v {_fmt(p[0])} {_fmt(p[1])} {_fmt(p[2])}")
        for f in hull.faces:
            lines.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def export_metric_csv(field: MetricField, path):
    """Rows `x,y,E,F,G`, nodes row-major."""
    n = field.grid.n
    xs = field.grid.xs
    lines = ["x,y,E,F,G"]
    for i in range(n):
        for j in range(n):
            lines.append(
                f"{_fmt(xs[i])},{_fmt(xs[j])},{_fmt(field.E[i, j])},"
                f"{_fmt(field.F[i, j])},{_fmt(field.G[i, j])}"
            )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_metric_csv(path) -> MetricField:
    data = np.genfromtxt(path, delimiter=",", names=True)
    n = int(round(np.sqrt(len(data))))
    if n * n != len(data):
        raise ValueError("metric CSV does not hold a square grid")
    grid = PeriodicGrid(n)
    E = np.asarray(data["E"]).reshape(n, n)
    F = np.asarray(data["F"]).reshape(n, n)
    G = np.asarray(data["G"]).reshape(n, n)
    return MetricField(grid, E, F, G)


def export_scalar_csv(grid: PeriodicGrid, values, path, name: str = "value"):
    """Rows `x,y,<name>` for one coefficient field."""
    values = np.asarray(values, dtype=float)
    lines = [f"x,y,{name}"]
    xs = grid.xs
    for i in range(grid.n):
        for j in range(grid.n):
            lines.append(f"{_fmt(xs[i])},{_fmt(xs[j])},{_fmt(values[i, j])}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def export_trace_csv(trace, path):
    """Search trace rows `iter,re_w,im_w,re_G,im_G,hyp_dist,c0_err`."""
    lines = ["iter,re_w,im_w,re_G,im_G,hyp_dist,c0_err"]
    for row in trace:
        w = row["w"]
        g = row["g_of_w"]
        lines.append(
            f"{row['iter']},{_fmt(w.real)},{_fmt(w.imag)},{_fmt(g.real)},"
            f"{_fmt(g.imag)},{_fmt(row['hyp_dist'])},{_fmt(row['c0_err'])}"
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json_report(report: dict, path):
    with open(path, "w", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
