"""Periodic fields on the unit-square torus and ambient immersions.

Grids are n x n with node (i, j) at (i/n, j/n); all indexing wraps modulo
n in both axes.  Symmetric bilinear forms are stored by their coefficients
(E, F, G) with the convention E dx^2 + 2 F dx dy + G dy^2.  An immersion
into R^{2,1} is a linear (deck translation) part plus a periodic part, so
Z^2-equivariance holds by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, NotPositiveDefinite
from .minkowski import lorentz_dot, timelike_unit_normal


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform n x n sampling of the unit square torus."""

    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError("grid needs n >= 8")

    @property
    def spacing(self) -> float:
        return 1.0 / self.n

    @property
    def xs(self) -> np.ndarray:
        return np.arange(self.n) / self.n

    def mesh(self):
        """Coordinate arrays (X, Y) of shape (n, n) with axis 0 along x."""
        return np.meshgrid(self.xs, self.xs, indexing="ij")


@dataclass(frozen=True)
class Sym2:
    """Constant symmetric form E dx^2 + 2F dxdy + G dy^2."""

    E: float
    F: float
    G: float

    def is_positive_definite(self) -> bool:
        return self.E > 0.0 and self.G > 0.0 and self.E * self.G - self.F**2 > 0.0

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.E, self.F], [self.F, self.G]])


class MetricField:
    """Per-node symmetric forms over a periodic grid."""

    def __init__(self, grid: PeriodicGrid, E, F, G):
        shape = (grid.n, grid.n)
        E = np.asarray(E, dtype=float)
        F = np.asarray(F, dtype=float)
        G = np.asarray(G, dtype=float)
        if E.shape != shape or F.shape != shape or G.shape != shape:
            raise ValueError(f"coefficient arrays must have shape {shape}")
        if not (np.isfinite(E).all() and np.isfinite(F).all() and np.isfinite(G).all()):
            raise ValueError("metric coefficients must be finite")
        self.grid = grid
        self.E = E
        self.F = F
        self.G = G

    @staticmethod
    def constant(grid: PeriodicGrid, sym: Sym2) -> "MetricField":
        shape = (grid.n, grid.n)
        return MetricField(
            grid,
            np.full(shape, sym.E),
            np.full(shape, sym.F),
            np.full(shape, sym.G),
        )

    def at(self, i: int, j: int) -> Sym2:
        i %= self.grid.n
        j %= self.grid.n
        return Sym2(float(self.E[i, j]), float(self.F[i, j]), float(self.G[i, j]))

    def det(self) -> np.ndarray:
        return self.E * self.G - self.F**2

    def is_positive_definite(self) -> bool:
        return bool((self.E > 0.0).all() and (self.G > 0.0).all() and (self.det() > 0.0).all())

    def __add__(self, other: "MetricField") -> "MetricField":
        _require_same_grid(self, other)
        return MetricField(self.grid, self.E + other.E, self.F + other.F, self.G + other.G)

    def __sub__(self, other: "MetricField") -> "MetricField":
        _require_same_grid(self, other)
        return MetricField(self.grid, self.E - other.E, self.F - other.F, self.G - other.G)

    def __mul__(self, c: float) -> "MetricField":
        return MetricField(self.grid, c * self.E, c * self.F, c * self.G)

    __rmul__ = __mul__


def _require_same_grid(a: MetricField, b: MetricField):
    if a.grid.n != b.grid.n:
        raise GridMismatch(f"grids differ: {a.grid.n} vs {b.grid.n}")


class Immersion:
    """Periodic-plus-linear map of the torus into R^{2,1}.

    The full map is p -> p @ linear_part + periodic_part(p).  Derivatives
    come either from a stored jacobian array ("analytic" mode) or from
    second-order centered differences of the periodic part ("centered").
    """

    def __init__(self, grid: PeriodicGrid, linear_part, periodic_part,
                 derivative_mode: str = "centered", jacobian=None):
        linear_part = np.asarray(linear_part, dtype=float)
        periodic_part = np.asarray(periodic_part, dtype=float)
        if linear_part.shape != (2, 3):
            raise ValueError("linear_part must be 2x3")
        if periodic_part.shape != (grid.n, grid.n, 3):
            raise ValueError("periodic_part must be (n, n, 3)")
        if derivative_mode not in ("analytic", "centered"):
            raise ValueError(f"unknown derivative mode {derivative_mode!r}")
        if derivative_mode == "analytic":
            if jacobian is None:
                raise ValueError("analytic mode needs a jacobian array")
            jacobian = np.asarray(jacobian, dtype=float)
            if jacobian.shape != (grid.n, grid.n, 2, 3):
                raise ValueError("jacobian must be (n, n, 2, 3)")
        self.grid = grid
        self.linear_part = linear_part
        self.periodic_part = periodic_part
        self.derivative_mode = derivative_mode
        self._jac = jacobian

    @property
    def values(self) -> np.ndarray:
        """Node values of the full map, shape (n, n, 3)."""
        X, Y = self.grid.mesh()
        base = X[..., None] * self.linear_part[0] + Y[..., None] * self.linear_part[1]
        return base + self.periodic_part

    def value_at_index(self, i: int, j: int) -> np.ndarray:
        """Full map at node (i, j) with unwrapped integer indices.

        Deck translations enter additively, so equivariance
        f(p + e_k) - f(p) = linear_part[k] holds exactly.
        """
        n = self.grid.n
        base = ((i % n) / n) * self.linear_part[0] + ((j % n) / n) * self.linear_part[1]
        deck = (i // n) * self.linear_part[0] + (j // n) * self.linear_part[1]
        return base + deck + self.periodic_part[i % n, j % n]

    def jacobian(self) -> np.ndarray:
        """Tangent vectors (d/dx f, d/dy f) per node, shape (n, n, 2, 3)."""
        if self.derivative_mode == "analytic":
            return self._jac
        n = self.grid.n
        jac = np.empty((n, n, 2, 3))
        for axis in range(2):
            diff = np.roll(self.periodic_part, -1, axis=axis) - np.roll(self.periodic_part, 1, axis=axis)
            jac[:, :, axis, :] = self.linear_part[axis] + diff * (n / 2.0)
        return jac

    def with_derivative_mode(self, mode: str) -> "Immersion":
        if mode == self.derivative_mode:
            return self
        if mode == "analytic":
            raise ValueError("cannot promote to analytic mode without a jacobian")
        return Immersion(self.grid, self.linear_part, self.periodic_part, "centered")

    def normals(self) -> np.ndarray:
        """Future unit normal field, shape (n, n, 3)."""
        jac = self.jacobian()
        return timelike_unit_normal(jac[:, :, 0, :], jac[:, :, 1, :])

    def is_spacelike(self) -> bool:
        g = pullback(self)
        return g.is_positive_definite()


def plane_immersion(grid: PeriodicGrid, slope_x: float = 0.0, slope_y: float = 0.0) -> Immersion:
    """The linear torus (x, y) -> (x, y, sx*x + sy*y); spacelike iff sx^2+sy^2 < 1."""
    linear = np.array([[1.0, 0.0, slope_x], [0.0, 1.0, slope_y]])
    per = np.zeros((grid.n, grid.n, 3))
    jac = np.broadcast_to(linear, (grid.n, grid.n, 2, 3)).copy()
    return Immersion(grid, linear, per, "analytic", jac)


def graph_immersion(grid: PeriodicGrid, height, height_grad=None) -> Immersion:
    """Graph (x, y) -> (x, y, u(x, y)) for a periodic height function.

    `height` maps coordinate arrays to node heights; `height_grad`, if
    given, returns (du/dx, du/dy) and enables analytic derivatives.
    """
    X, Y = grid.mesh()
    u = np.asarray(height(X, Y), dtype=float)
    linear = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    per = np.zeros((grid.n, grid.n, 3))
    per[..., 2] = u
    if height_grad is None:
        return Immersion(grid, linear, per, "centered")
    ux, uy = height_grad(X, Y)
    jac = np.zeros((grid.n, grid.n, 2, 3))
    jac[:, :, 0, 0] = 1.0
    jac[:, :, 0, 2] = ux
    jac[:, :, 1, 1] = 1.0
    jac[:, :, 1, 2] = uy
    return Immersion(grid, linear, per, "analytic", jac)


def pullback(f: Immersion) -> MetricField:
    """Induced metric f*h of an immersion under the ambient Lorentz form.

    Non-spacelike results are representable; callers check positivity.
    """
    jac = f.jacobian()
    tx = jac[:, :, 0, :]
    ty = jac[:, :, 1, :]
    return MetricField(f.grid, lorentz_dot(tx, tx), lorentz_dot(tx, ty), lorentz_dot(ty, ty))


def c0_distance(a: MetricField, b: MetricField) -> float:
    """sup-norm of the difference field, measured by the spectral norm.

    For each node the largest absolute eigenvalue of the 2x2 coefficient
    difference is |tr/2| + sqrt((dev/2)^2 + dF^2); the result is the max
    over nodes.
    """
    _require_same_grid(a, b)
    dE = a.E - b.E
    dF = a.F - b.F
    dG = a.G - b.G
    half_tr = 0.5 * (dE + dG)
    rad = np.sqrt((0.5 * (dE - dG)) ** 2 + dF**2)
    return float((np.abs(half_tr) + rad).max())


def generalized_eigen_range(base: MetricField, other: MetricField):
    """Node-wise (min, max) eigenvalues of the pencil det(other - t*base) = 0.

    `base` must be positive definite; closed-form 2x2 quadratic, no
    iterative solver involved.
    """
    _require_same_grid(base, other)
    a = base.det()
    if not base.is_positive_definite():
        raise NotPositiveDefinite("pencil base metric must be positive definite")
    b = other.E * base.G + base.E * other.G - 2.0 * base.F * other.F
    c = other.det()
    disc = np.maximum(b * b - 4.0 * a * c, 0.0)
    root = np.sqrt(disc)
    lam_max = (b + root) / (2.0 * a)
    lam_min = (b - root) / (2.0 * a)
    return lam_min, lam_max


def dilatation_id(g1: MetricField, g2: MetricField) -> float:
    """Quasiconformality of the identity between two Riemannian fields.

    sup over nodes of sqrt(max/min directional ratio g2/g1); equals 1
    exactly when the fields are conformal.
    """
    if not g2.is_positive_definite():
        raise NotPositiveDefinite("dilatation needs positive definite fields")
    lam_min, lam_max = generalized_eigen_range(g1, g2)
    if np.any(lam_min <= 0.0):
        raise NotPositiveDefinite("pencil produced nonpositive eigenvalues")
    return float(max(np.sqrt((lam_max / lam_min).max()), 1.0))


def teich_distance_bound(g1: MetricField, g2: MetricField) -> float:
    """Upper bound (1/2) log Dil(id) for the Teichmueller distance."""
    return 0.5 * float(np.log(dilatation_id(g1, g2)))
