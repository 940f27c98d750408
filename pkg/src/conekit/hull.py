"""Incremental 3D convex hulls with exact-sign orientation tests.

Predicates run in floating point behind an error filter; ambiguous signs
are recomputed in exact rational arithmetic (binary floats are rationals,
so Fraction gives the true sign).  Orbit points are nearly coplanar at
small word length, which is exactly when the filter trips.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegenerateInput, RayMissesHull
from .minkowski import MinkVector

_FILTER = 1e-13
_INSIDE_TOL = 1e-9


def _orient_batch(a, b, c, pts):
    """Signed volumes det[b-a, c-a, p-a] for an array of points."""
    u = b - a
    v = c - a
    w = pts - a
    return (
        u[0] * (v[1] * w[..., 2] - v[2] * w[..., 1])
        + u[1] * (v[2] * w[..., 0] - v[0] * w[..., 2])
        + u[2] * (v[0] * w[..., 1] - v[1] * w[..., 0])
    )


def _orient_exact(a, b, c, d) -> int:
    av = [Fraction(float(x)) for x in a]
    bv = [Fraction(float(x)) for x in b]
    cv = [Fraction(float(x)) for x in c]
    dv = [Fraction(float(x)) for x in d]
    u = [bv[k] - av[k] for k in range(3)]
    v = [cv[k] - av[k] for k in range(3)]
    w = [dv[k] - av[k] for k in range(3)]
    det = (
        u[0] * (v[1] * w[2] - v[2] * w[1])
        + u[1] * (v[2] * w[0] - v[0] * w[2])
        + u[2] * (v[0] * w[1] - v[1] * w[0])
    )
    return (det > 0) - (det < 0)


def orient3d(a, b, c, d) -> int:
    """Sign of det[b-a, c-a, d-a], exact.

    Positive when d sees (a, b, c) in counterclockwise order.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    det = float(_orient_batch(a, b, c, d))
    scale = max(
        abs(x) for x in np.concatenate([b - a, c - a, d - a])
    )
    bound = _FILTER * max(scale, 1.0) ** 3
    if abs(det) > bound:
        return 1 if det > 0 else -1
    return _orient_exact(a, b, c, d)


def _orient_signs(points, face, pt_idx):
    """Exact visibility signs of candidate points against one face."""
    a, b, c = (points[k] for k in face)
    dets = _orient_batch(a, b, c, points[pt_idx])
    scale = max(float(np.abs(points[list(face)]).max()), float(np.abs(points[pt_idx]).max()), 1.0)
    bound = _FILTER * (2.0 * scale) ** 3
    signs = np.where(dets > bound, 1, np.where(dets < -bound, -1, 0))
    for j in np.nonzero(signs == 0)[0]:
        signs[j] = _orient_exact(a, b, c, points[pt_idx[j]])
    return signs


@dataclass
class Hull3:
    """Faces are outward-oriented index triples into `points`."""

    points: np.ndarray
    vertices: np.ndarray
    faces: np.ndarray

    def face_planes(self):
        """(normals, offsets) with outward normals, n . x <= c inside."""
        a = self.points[self.faces[:, 0]]
        b = self.points[self.faces[:, 1]]
        c = self.points[self.faces[:, 2]]
        n = np.cross(b - a, c - a)
        return n, np.einsum("ij,ij->i", n, a)


def _initial_simplex(points):
    n = len(points)
    i0 = 0
    i1 = None
    for k in range(1, n):
        if np.any(points[k] != points[i0]):
            i1 = k
            break
    if i1 is None:
        raise DegenerateInput("all points coincide")
    i2 = None
    for k in range(i1 + 1, n):
        cr = np.cross(points[i1] - points[i0], points[k] - points[i0])
        if np.abs(cr).max() > 0.0:
            i2 = k
            break
    if i2 is None:
        raise DegenerateInput("all points collinear")
    i3 = None
    for k in range(i2 + 1, n):
        if orient3d(points[i0], points[i1], points[i2], points[k]) != 0:
            i3 = k
            break
    if i3 is None:
        raise DegenerateInput("all points coplanar")
    return i0, i1, i2, i3


def convex_hull3(points) -> Hull3:
    """Exact-orientation incremental hull of >= 4 affinely independent points."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=float))
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 4:
        raise DegenerateInput("need at least 4 points in R^3")
    i0, i1, i2, i3 = _initial_simplex(pts)
    if orient3d(pts[i0], pts[i1], pts[i2], pts[i3]) > 0:
        i1, i2 = i2, i1
    # outward orientation: the remaining simplex vertex is on the negative side
    faces = [(i0, i1, i2), (i0, i3, i1), (i0, i2, i3), (i1, i3, i2)]
    used = {i0, i1, i2, i3}
    order = [k for k in range(len(pts)) if k not in used]
    for k in order:
        visible = []
        hidden = []
        for face in faces:
            s = _orient_signs(pts, face, np.array([k]))[0]
            if s > 0:
                visible.append(face)
            else:
                hidden.append(face)
        if not visible:
            continue
        edge_count = {}
        for a, b, c in visible:
            for e in ((a, b), (b, c), (c, a)):
                edge_count[e] = edge_count.get(e, 0) + 1
        horizon = []
        for (a, b), cnt in edge_count.items():
            if cnt == 1 and edge_count.get((b, a), 0) == 0:
                horizon.append((a, b))
        faces = hidden + [(a, b, k) for a, b in horizon]
    faces_arr = np.array(faces, dtype=int)
    verts = np.unique(faces_arr)
    return Hull3(points=pts, vertices=verts, faces=faces_arr)


def max_signed_distance(hull: Hull3, points) -> float:
    """Largest outward distance of any query point from the hull surface.

    Nonpositive (within tolerance) certifies containment.
    """
    pts = np.asarray(points, dtype=float)
    normals, offsets = hull.face_planes()
    norms = np.linalg.norm(normals, axis=1)
    dist = (pts @ normals.T - offsets) / norms
    return float(dist.max(axis=1).max())


def ray_first_hit(hull: Hull3, direction):
    """First intersection of the ray {t * direction, t > 0} with the hull.

    Returns (point, t, face index); raises RayMissesHull when the ray
    avoids every face.
    """
    u = np.asarray(direction, dtype=float)
    normals, offsets = hull.face_planes()
    denom = normals @ u
    best = None
    for idx in range(len(hull.faces)):
        if denom[idx] == 0.0:
            continue
        t = offsets[idx] / denom[idx]
        if t <= 1e-12:
            continue
        x = t * u
        a, b, c = (hull.points[v] for v in hull.faces[idx])
        if _in_triangle(a, b, c, x):
            if best is None or t < best[1]:
                best = (x, t, idx)
    if best is None:
        raise RayMissesHull("ray misses the hull (orbit truncation)")
    return best


def _in_triangle(a, b, c, x, tol=1e-9) -> bool:
    v0 = b - a
    v1 = c - a
    v2 = x - a
    d00 = v0 @ v0
    d01 = v0 @ v1
    d11 = v1 @ v1
    d20 = v2 @ v0
    d21 = v2 @ v1
    den = d00 * d11 - d01 * d01
    if den <= 0.0:
        return False
    s = (d11 * d20 - d01 * d21) / den
    t = (d00 * d21 - d01 * d20) / den
    return s >= -tol and t >= -tol and s + t <= 1.0 + tol


@dataclass
class OrbitHull:
    """Orbit sample of a base point with (optionally explicit) hull data."""

    base: MinkVector
    points: np.ndarray
    hull_vertices: np.ndarray | None = None
    hull_faces: np.ndarray | None = None

    @staticmethod
    def from_points(base: MinkVector, points, build_faces: bool | None = None) -> "OrbitHull":
        points = np.asarray(points, dtype=float)
        if build_faces is None:
            build_faces = len(points) <= 20000
        if build_faces:
            h = convex_hull3(points)
            return OrbitHull(base, points, h.vertices, h.faces)
        return OrbitHull(base, points)

    def explicit(self) -> Hull3:
        if self.hull_faces is None:
            raise DegenerateInput("hull faces were not built for this orbit")
        return Hull3(self.points, self.hull_vertices, self.hull_faces)


def ray_boundary_point(hull: OrbitHull, q) -> MinkVector:
    """First hit of the ray through Klein-disc point q on the hull boundary."""
    qx, qy = float(q[0]), float(q[1])
    x, _, _ = ray_first_hit(hull.explicit(), np.array([qx, qy, 1.0]))
    return MinkVector.from_array(x)
