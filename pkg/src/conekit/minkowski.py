"""Linear algebra of the Minkowski space R^{2,1} and the solid timelike cone.

Signature convention is (+,+,-) with z the timelike axis, so the bilinear
form is <a,b> = ax*bx + ay*by - az*bz and the open solid cone is
{x^2 + y^2 < z^2, z > 0}.  Level r of the cone is the hyperboloid
sqrt(z^2 - x^2 - y^2) = r; the Klein disc is its radial projection onto
the plane z = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTangentPlane, NonPositiveHeight

#: Gram matrix of the ambient bilinear form.
MINK_J = np.diag([1.0, 1.0, -1.0])

_GRAM_TOL = 1e-12
_ISOMETRY_TOL = 1e-12


@dataclass(frozen=True)
class MinkVector:
    """A point or vector of R^{2,1}. Coordinates must be finite."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y) and np.isfinite(self.z)):
            raise ValueError("MinkVector coordinates must be finite")

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.z], dtype=dtype)

    def __add__(self, other):
        o = np.asarray(other, dtype=float)
        return MinkVector(self.x + o[0], self.y + o[1], self.z + o[2])

    def __sub__(self, other):
        o = np.asarray(other, dtype=float)
        return MinkVector(self.x - o[0], self.y - o[1], self.z - o[2])

    def __mul__(self, c: float):
        return MinkVector(c * self.x, c * self.y, c * self.z)

    __rmul__ = __mul__

    @staticmethod
    def from_array(a) -> "MinkVector":
        a = np.asarray(a, dtype=float)
        return MinkVector(float(a[0]), float(a[1]), float(a[2]))


def lorentz_dot(a, b):
    """<a,b> = ax*bx + ay*by - az*bz, broadcasting over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] - a[..., 2] * b[..., 2]


def cone_level(p):
    """Level r = sqrt(z^2 - x^2 - y^2) of a cone point, or the outside marker.

    For a single vector the marker is None; for an array input the marker
    is NaN in the returned array.
    """
    arr = np.asarray(p, dtype=float)
    q = arr[..., 2] ** 2 - arr[..., 0] ** 2 - arr[..., 1] ** 2
    inside = (arr[..., 2] > 0.0) & (q > 0.0)
    if arr.ndim == 1:
        return float(np.sqrt(q)) if inside else None
    out = np.full(arr.shape[:-1], np.nan)
    np.sqrt(q, out=out, where=inside)
    return out


def klein_project(p):
    """Radial projection (x,y,z) -> (x/z, y/z). Requires z > 0."""
    arr = np.asarray(p, dtype=float)
    z = arr[..., 2]
    if np.any(z <= 0.0):
        raise NonPositiveHeight("klein_project needs z > 0")
    if arr.ndim == 1:
        return (float(arr[0] / z), float(arr[1] / z))
    return np.stack([arr[..., 0] / z, arr[..., 1] / z], axis=-1)


def timelike_unit_normal(u1, u2):
    """Future-pointing normal n with <n,u1> = <n,u2> = 0 and <n,n> = -1.

    The span of (u1, u2) must be spacelike; otherwise the induced Gram
    matrix degenerates and DegenerateTangentPlane is raised.
    """
    a = np.asarray(u1, dtype=float)
    b = np.asarray(u2, dtype=float)
    g11 = lorentz_dot(a, a)
    g12 = lorentz_dot(a, b)
    g22 = lorentz_dot(b, b)
    gram = g11 * g22 - g12 * g12
    if np.any(gram <= _GRAM_TOL) or np.any(g11 <= _GRAM_TOL):
        raise DegenerateTangentPlane("tangent span is not spacelike")
    # Lorentz-orthogonality to both vectors means J n is Euclid-orthogonal
    # to them, so n = J (u1 x u2) up to scale and sign.
    cross = np.cross(a, b)
    n = cross @ MINK_J
    norm2 = -lorentz_dot(n, n)
    if np.any(norm2 <= _GRAM_TOL):
        raise DegenerateTangentPlane("normal direction is not timelike")
    n = n / np.sqrt(norm2)[..., None]
    sign = np.where(n[..., 2] > 0.0, 1.0, -1.0)
    n = n * sign[..., None]
    if isinstance(u1, MinkVector) and isinstance(u2, MinkVector):
        return MinkVector.from_array(n)
    return n


class Isometry21:
    """An element of SO°(2,1): preserves the form, orientation and future cone."""

    def __init__(self, m):
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("Isometry21 expects a 3x3 matrix")
        err = np.abs(m.T @ MINK_J @ m - MINK_J).max()
        if err > _ISOMETRY_TOL:
            raise ValueError(f"matrix does not preserve the form (defect {err:.3e})")
        det = np.linalg.det(m)
        if abs(det - 1.0) > _ISOMETRY_TOL:
            raise ValueError(f"matrix determinant {det} != 1")
        if m[2, 2] <= 0.0:
            raise ValueError("matrix does not preserve the future cone")
        m = m.copy()
        m.flags.writeable = False
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    def apply(self, p):
        """Apply to a vector (MinkVector or array with last axis 3)."""
        arr = np.asarray(p, dtype=float)
        out = arr @ self._m.T
        if isinstance(p, MinkVector):
            return MinkVector.from_array(out)
        return out

    def inverse(self) -> "Isometry21":
        # J m^T J is the exact inverse of a form-preserving matrix.
        return Isometry21(MINK_J @ self._m.T @ MINK_J)

    def __matmul__(self, other):
        if isinstance(other, Isometry21):
            return Isometry21(self._m @ other._m)
        return self.apply(other)

    def __repr__(self):
        return f"Isometry21({self._m.tolist()})"


def rotation(theta: float) -> Isometry21:
    """Rotation of the spacelike xy-plane by theta."""
    c, s = np.cos(theta), np.sin(theta)
    return Isometry21([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def boost(rapidity: float) -> Isometry21:
    """Boost along the x-axis; translates the hyperboloid by the rapidity."""
    c, s = np.cosh(rapidity), np.sinh(rapidity)
    return Isometry21([[c, 0.0, s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def boost_rotation(axis_angle: float, rapidity: float) -> Isometry21:
    """R(theta) B(eta) R(theta)^{-1}: boost along the axis at angle theta."""
    r = rotation(axis_angle)
    return r @ boost(rapidity) @ r.inverse()
