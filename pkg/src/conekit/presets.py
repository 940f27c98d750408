"""Canonical experiment setups shared by the CLI and the test suite."""

from __future__ import annotations

import numpy as np

from .corrugation import CorrugationStep, corrugate_once
from .defect import LinearFormZ
from .fields import MetricField, PeriodicGrid, c0_distance, plane_immersion, pullback

#: Peak coefficient of the banded eta field.
BAND_AMPLITUDE = 0.75


def banded_eta(grid: PeriodicGrid, amplitude: float = BAND_AMPLITUDE) -> np.ndarray:
    """amplitude * sin(pi y)^2: one band of corrugation strength across y.

    A constant coefficient field on a flat seed is corrugated exactly
    isometrically at any N, so the O(1/N) error law is only visible with
    varying data; this band is the standard probe.
    """
    _, Y = grid.mesh()
    return amplitude * np.sin(np.pi * Y) ** 2


def plateau_eta(grid: PeriodicGrid, amplitude: float = BAND_AMPLITUDE) -> np.ndarray:
    """Coefficient field vanishing identically outside [1/4,3/4]^2."""
    X, Y = grid.mesh()

    def ramp(t):
        inside = (t >= 0.25) & (t <= 0.75)
        return np.where(inside, np.sin(2.0 * np.pi * (t - 0.25)) ** 2, 0.0)

    return amplitude * ramp(X) * ramp(Y)


def corrugation_sweep(grid_n: int, n_values, amplitude: float = BAND_AMPLITUDE):
    """Corrugate the flat plane along dx with the banded eta for each N.

    Returns (rows, meshes): rows are (N, c0 error against the target
    mu = f*h - eta dx (x) dx), meshes the corrugated immersions.
    """
    grid = PeriodicGrid(grid_n)
    f = plane_immersion(grid)
    eta = banded_eta(grid, amplitude)
    shape = (grid.n, grid.n)
    mu = MetricField(grid, 1.0 - eta, np.zeros(shape), np.ones(shape))
    rows = []
    meshes = []
    for n_corr in n_values:
        F = corrugate_once(f, CorrugationStep(LinearFormZ(1, 0), eta, int(n_corr)))
        rows.append((int(n_corr), c0_distance(pullback(F), mu)))
        meshes.append(F)
    return rows, meshes


def sweep_slope(rows) -> float:
    """Log-log regression slope of error against N."""
    ns = np.log([r[0] for r in rows])
    errs = np.log([r[1] for r in rows])
    return float(np.polyfit(ns, errs, 1)[0])
