"""Decomposition of metric defects into squares of integer linear forms.

A positive semidefinite field D is written as sum_j eta_j l_j (x) l_j with
eta_j >= 0 and each l_j = a dx + b dy having a primitive integer kernel
vector, so corrugated maps built from the terms descend to the torus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DefectOutsideCone
from .fields import MetricField, PeriodicGrid

_CONE_TOL = 1e-12


@dataclass(frozen=True)
class LinearFormZ:
    """Constant form a dx + b dy with coprime integer coefficients."""

    a: int
    b: int

    def __post_init__(self):
        if (self.a, self.b) == (0, 0):
            raise ValueError("zero form")
        if math.gcd(abs(self.a), abs(self.b)) != 1:
            raise ValueError("coefficients must be coprime")

    @property
    def kernel(self):
        """Primitive integer vector spanning ker(a dx + b dy)."""
        return (-self.b, self.a)

    def square_coefficients(self):
        """(E, F, G) of l (x) l."""
        return (self.a * self.a, self.a * self.b, self.b * self.b)

    def evaluate(self, vx, vy):
        return self.a * vx + self.b * vy


#: Forms spanning the decomposition cone used throughout.
DEFAULT_DICTIONARY = (
    LinearFormZ(1, 0),
    LinearFormZ(0, 1),
    LinearFormZ(1, 1),
    LinearFormZ(1, -1),
)


@dataclass(frozen=True)
class Decomposition:
    """Ordered terms (form, coefficient field) reconstructing a defect."""

    grid: PeriodicGrid
    terms: tuple  # of (LinearFormZ, ndarray)

    def reconstruct(self) -> MetricField:
        shape = (self.grid.n, self.grid.n)
        E = np.zeros(shape)
        F = np.zeros(shape)
        G = np.zeros(shape)
        for form, eta in self.terms:
            ce, cf, cg = form.square_coefficients()
            E += eta * ce
            F += eta * cf
            G += eta * cg
        return MetricField(self.grid, E, F, G)

    def __len__(self):
        return len(self.terms)


def _split_coefficients(delta: MetricField):
    """Closed-form coefficients over the four-form dictionary.

    eta_(1,1) = max(F, 0), eta_(1,-1) = max(-F, 0), eta_(1,0) = E - |F|,
    eta_(0,1) = G - |F|; piecewise linear in (E, F, G), Lipschitz <= 2.
    """
    absF = np.abs(delta.F)
    return {
        LinearFormZ(1, 0): delta.E - absF,
        LinearFormZ(0, 1): delta.G - absF,
        LinearFormZ(1, 1): np.maximum(delta.F, 0.0),
        LinearFormZ(1, -1): np.maximum(-delta.F, 0.0),
    }


def cone_margin(delta: MetricField, dictionary=DEFAULT_DICTIONARY) -> float:
    """min over nodes of min(E - |F|, G - |F|); positive iff decompose
    succeeds with strictly positive slack."""
    absF = np.abs(delta.F)
    return float(np.minimum(delta.E - absF, delta.G - absF).min())


def decompose(delta: MetricField, dictionary=DEFAULT_DICTIONARY) -> Decomposition:
    """Write a defect field as a nonnegative combination of form squares.

    The dictionary must contain the four default forms; any extra forms
    keep coefficient zero.  Raises DefectOutsideCone when the closed-form
    diagonal coefficients dip below -1e-12 at any node.
    """
    for needed in DEFAULT_DICTIONARY:
        if needed not in dictionary:
            raise ValueError(f"dictionary must contain {needed}")
    coeffs = _split_coefficients(delta)
    worst = min(float(coeffs[LinearFormZ(1, 0)].min()), float(coeffs[LinearFormZ(0, 1)].min()))
    if worst < -_CONE_TOL:
        raise DefectOutsideCone(
            f"defect leaves the dictionary cone (slack {worst:.3e})"
        )
    terms = []
    shape = (delta.grid.n, delta.grid.n)
    for form in dictionary:
        eta = coeffs.get(form)
        if eta is None:
            eta = np.zeros(shape)
        else:
            eta = np.maximum(eta, 0.0)
        terms.append((form, eta))
    return Decomposition(delta.grid, tuple(terms))
