"""Fuchsian octagon group, orbit hulls, level bounds and rigidity constants.

The genus-2 surface group is realized by four equal-length hyperbolic
translations along concurrent axes at angles k pi/4; the boost length is
root-found on the relator defect.  The level bound alpha is the maximum
of sqrt(z^2 - x^2 - y^2) over the part of the orbit-hull boundary that
rays from the origin hit first (the surface the Klein homeomorphism
parameterizes); it yields C = alpha^2, c = 1 - 1/alpha^2, C' = 1/alpha^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    AlphaNotAboveOne,
    DegenerateInput,
    NotSpacelikeGraph,
    RelatorNotSatisfied,
)
from .hull import OrbitHull, convex_hull3
from .minkowski import MINK_J, MinkVector, boost_rotation, lorentz_dot

#: Vertex-cycle relator of the octagon with opposite sides identified.
OCTAGON_RELATOR = ((0, 1), (1, -1), (2, 1), (3, -1), (0, -1), (1, 1), (2, -1), (3, 1))

_RELATOR_TOL = 1e-8
_DEDUP_SCALE = 1e9  # Klein-coordinate dedup resolution 1e-9

# Orbit points farther than this cosh-distance from the base cannot
# support or cut the hull faces above the base's Dirichlet cell.
_NEAR_COSH = float(np.cosh(7.0))


@dataclass(frozen=True)
class FuchsianGroup:
    """Generators of a surface group in SO(2,1) plus its relator word."""

    generators: tuple
    relator: tuple
    boost_length: float

    def __post_init__(self):
        defect = self.relator_defect()
        if defect > _RELATOR_TOL:
            raise RelatorNotSatisfied(f"relator defect {defect:.3e} > {_RELATOR_TOL}")

    def relator_matrix(self) -> np.ndarray:
        m = np.eye(3)
        for idx, power in self.relator:
            g = self.generators[idx]
            if power < 0:
                g = g.inverse()
            m = m @ g.matrix
        return m

    def relator_defect(self) -> float:
        return float(np.abs(self.relator_matrix() - np.eye(3)).max())

    def letters(self):
        """Generator matrices followed by their inverses."""
        mats = [g.matrix for g in self.generators]
        mats += [g.inverse().matrix for g in self.generators]
        return mats


def _relator_word_matrix(ell: float) -> np.ndarray:
    mats = [boost_rotation(k * np.pi / 4.0, ell).matrix for k in range(4)]
    invs = [MINK_J @ m.T @ MINK_J for m in mats]
    out = np.eye(3)
    for idx, power in OCTAGON_RELATOR:
        out = out @ (mats[idx] if power > 0 else invs[idx])
    return out


def _signed_relator_defect(ell: float) -> float:
    # the y-displacement of the apex crosses zero transversally at the
    # octagon boost length, unlike the absolute defect which is V-shaped
    return float(_relator_word_matrix(ell)[1, 2])


def octagon_boost_length_hint() -> float:
    """Closed form 2 arccosh(1 + sqrt 2); bracket hint and cross-check only."""
    return 2.0 * float(np.arccosh(1.0 + np.sqrt(2.0)))


def make_genus2_group() -> FuchsianGroup:
    """Regular-octagon surface group; boost length found by root-finding."""
    hint = octagon_boost_length_hint()
    try:
        ell = brentq(_signed_relator_defect, hint - 0.04, hint + 0.04,
                     xtol=1e-15, rtol=8.9e-16)
    except ValueError as exc:
        raise RelatorNotSatisfied(f"no sign change near the hint: {exc}") from exc
    if abs(ell - hint) > 1e-9:
        raise RelatorNotSatisfied(
            f"root {ell} disagrees with the closed form {hint}"
        )
    gens = tuple(boost_rotation(k * np.pi / 4.0, ell) for k in range(4))
    return FuchsianGroup(generators=gens, relator=OCTAGON_RELATOR, boost_length=ell)


def _klein_keys(points: np.ndarray) -> np.ndarray:
    """Pack rounded Klein coordinates into one integer key per point."""
    kx = np.round(points[:, 0] / points[:, 2] * _DEDUP_SCALE).astype(np.int64)
    ky = np.round(points[:, 1] / points[:, 2] * _DEDUP_SCALE).astype(np.int64)
    return ((kx + (1 << 30)) << 32) | (ky + (1 << 30))


def orbit(group: FuchsianGroup, p, word_len: int, level_cutoff: float | None = None) -> np.ndarray:
    """All images of p under words of length <= word_len, including p.

    Points are deduplicated at Klein-coordinate tolerance 1e-9.  A
    level_cutoff drops points with z beyond cutoff during the search
    (with slack for re-entering paths); the full orbit needs none.
    """
    parr = np.asarray(p, dtype=float).reshape(3)
    level2 = parr[2] ** 2 - parr[0] ** 2 - parr[1] ** 2
    if not abs(np.sqrt(max(level2, 0.0)) - 1.0) <= 1e-9:
        raise ValueError("orbit base point must lie on the unit hyperboloid")
    if word_len < 0:
        raise ValueError("word_len must be nonnegative")
    letters = group.letters()
    slack = np.cosh(2.0 * group.boost_length)
    points = parr[None, :]
    keys = _klein_keys(points)
    order = np.argsort(keys)
    seen = keys[order]
    frontier = points
    collected = [points]
    for _ in range(word_len):
        if len(frontier) == 0:
            break
        cand = np.concatenate([frontier @ m.T for m in letters])
        if level_cutoff is not None:
            cand = cand[cand[:, 2] <= level_cutoff * slack]
            if len(cand) == 0:
                break
        ckeys = _klein_keys(cand)
        ckeys, idx = np.unique(ckeys, return_index=True)
        cand = cand[idx]
        fresh = ~np.isin(ckeys, seen, assume_unique=True)
        cand = cand[fresh]
        ckeys = ckeys[fresh]
        if len(cand) == 0:
            break
        seen = np.sort(np.concatenate([seen, ckeys]))
        collected.append(cand)
        frontier = cand
    pts = np.concatenate(collected)
    if level_cutoff is not None:
        pts = pts[pts[:, 2] <= level_cutoff]
    return pts


def orbit_hull(group: FuchsianGroup, p, word_len: int,
               level_cutoff: float | None = None,
               build_faces: bool | None = None) -> OrbitHull:
    pts = orbit(group, p, word_len, level_cutoff)
    base = p if isinstance(p, MinkVector) else MinkVector.from_array(p)
    return OrbitHull.from_points(base, pts, build_faces=build_faces)


# ----------------------------------------------------------------------
# Level bound over the ray-visible hull boundary
# ----------------------------------------------------------------------


def _segment_level_max(a: np.ndarray, b: np.ndarray) -> float:
    """max of sqrt(-<x,x>) over the segment [a, b] (concave quadratic)."""
    d = b - a
    dd = lorentz_dot(d, d)
    if dd > 0.0:
        t = float(np.clip(-lorentz_dot(a, d) / dd, 0.0, 1.0))
    else:
        t = 1.0 if -lorentz_dot(b, b) > -lorentz_dot(a, a) else 0.0
    x = a + t * d
    return float(np.sqrt(max(-lorentz_dot(x, x), 0.0)))


def _face_candidates(points: np.ndarray, faces: np.ndarray):
    """Level maximizer candidates on the origin-visible boundary faces.

    For a support plane n . x = c (c > 0, all points above) whose Lorentz
    dual is timelike, the unconstrained maximizer of the level on the
    plane is x* = c/Q (-n1, -n2, n3) with Q = n3^2 - n1^2 - n2^2 and level
    c/sqrt(Q); edge maxima cover planes whose critical point leaves the
    triangle.
    """
    a = points[faces[:, 0]]
    b = points[faces[:, 1]]
    c3 = points[faces[:, 2]]
    normals = np.cross(b - a, c3 - a)
    offsets = np.einsum("ij,ij->i", normals, a)
    out = []
    for k in range(len(faces)):
        n = normals[k]
        cc = offsets[k]
        if cc >= 0.0:
            continue  # origin not outside: not a first-hit face
        n = -n
        cc = -cc
        va, vb, vc = a[k], b[k], c3[k]
        q = n[2] ** 2 - n[0] ** 2 - n[1] ** 2
        if q > 0.0 and n[2] > 0.0:
            x_star = (cc / q) * np.array([-n[0], -n[1], n[2]])
            if _bary_inside(va, vb, vc, x_star):
                out.append((float(cc / np.sqrt(q)), x_star, k))
                continue
        best = None
        for p0, p1 in ((va, vb), (vb, vc), (vc, va)):
            lev = _segment_level_max(p0, p1)
            if best is None or lev > best[0]:
                d = p1 - p0
                dd = lorentz_dot(d, d)
                t = float(np.clip(-lorentz_dot(p0, d) / dd, 0.0, 1.0)) if dd > 0 else 0.0
                best = (lev, p0 + t * d, k)
        if best is not None:
            out.append(best)
    return out, normals, offsets


def _bary_inside(a, b, c, x, tol=1e-10) -> bool:
    v0 = b - a
    v1 = c - a
    v2 = x - a
    d00 = v0 @ v0
    d01 = v0 @ v1
    d11 = v1 @ v1
    den = d00 * d11 - d01 * d01
    if den <= 0.0:
        return False
    s = (d11 * (v2 @ v0) - d01 * (v2 @ v1)) / den
    t = (d00 * (v2 @ v1) - d01 * (v2 @ v0)) / den
    return s >= -tol and t >= -tol and s + t <= 1.0 + tol


def _planar_level_max(points: np.ndarray) -> float:
    """Level max over a coplanar point set (flat hull degenerates)."""
    centered = points - points.mean(axis=0)
    _, _, vt = np.linalg.svd(centered)
    n = vt[2]
    cc = float(n @ points[0])
    if cc < 0:
        n, cc = -n, -cc
    q = n[2] ** 2 - n[0] ** 2 - n[1] ** 2
    best = 1.0
    if q > 0.0 and cc > 0.0:
        x_star = (cc / q) * np.array([-n[0], -n[1], n[2]])
        # inside test against the 2D hull: x* must not see any edge outward
        if _inside_planar(points, n, x_star):
            best = max(best, float(cc / np.sqrt(q)))
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            best = max(best, _segment_level_max(points[i], points[j]))
    return best


def _inside_planar(points, n, x) -> bool:
    basis = np.linalg.svd(np.outer(n, n) - np.eye(3))[0][:, :2]
    proj = points @ basis
    xp = x @ basis
    hull2 = _hull2d(proj)
    m = len(hull2)
    for k in range(m):
        p0 = proj[hull2[k]]
        p1 = proj[hull2[(k + 1) % m]]
        cross = (p1[0] - p0[0]) * (xp[1] - p0[1]) - (p1[1] - p0[1]) * (xp[0] - p0[0])
        if cross < -1e-12:
            return False
    return True


def _hull2d(pts: np.ndarray):
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    def half(indices):
        out = []
        for i in indices:
            while len(out) >= 2:
                o, a = pts[out[-2]], pts[out[-1]]
                if (a[0] - o[0]) * (pts[i][1] - o[1]) - (a[1] - o[1]) * (pts[i][0] - o[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(i)
        return out
    lower = half(order)
    upper = half(order[::-1])
    return lower[:-1] + upper[:-1]


def level_alpha(hull: OrbitHull) -> float:
    """Level bound: max of sqrt(z^2-x^2-y^2) over the first-hit boundary.

    Only boundary points above the base point's Dirichlet cell are taken
    (the bound is equivariant, so the cell maximum is the global one);
    each selected face is support-verified against every orbit point that
    could undercut it.  Always >= 1; truncation-stable in word length.
    """
    pts = hull.points
    base = np.asarray(hull.base, dtype=float)
    cosh_d = -lorentz_dot(pts, base)
    near = pts[cosh_d <= _NEAR_COSH]
    if len(near) < 4:
        near = pts
    try:
        h = convex_hull3(near)
    except DegenerateInput:
        return max(1.0, _planar_level_max(pts))
    candidates, _, _ = _face_candidates(h.points, h.faces)
    candidates.sort(key=lambda item: -item[0])
    for level, x_star, k in candidates:
        if level <= 1.0:
            break
        if not _in_dirichlet_cell(x_star, level, base, near):
            continue
        face = h.faces[k]
        va, vb, vc = (h.points[v] for v in face)
        n = -np.cross(vb - va, vc - va)
        cc = float(n @ va)
        if _supported(n, cc, pts):
            return level
    return 1.0


def _in_dirichlet_cell(x_star, level, base, near, tol=1e-9) -> bool:
    foot = x_star / max(level, 1e-300)
    to_base = -lorentz_dot(foot, base)
    to_orbit = -lorentz_dot(near, foot)
    return to_base <= to_orbit.min() + tol


def _supported(n, cc, pts, tol=1e-9) -> bool:
    """Check n . v >= cc for every orbit point that could violate it.

    For a timelike support direction, points with z above cc/(n3 - |n_perp|)
    satisfy the bound automatically, so only a bounded slab is tested.
    """
    margin = n[2] - np.hypot(n[0], n[1])
    scale = float(np.linalg.norm(n))
    if margin > 0.0:
        z_cut = cc / margin
        test = pts[pts[:, 2] <= z_cut * (1.0 + 1e-12)]
    else:
        test = pts
    if len(test) == 0:
        return True
    return float((test @ n).min()) >= cc - tol * scale


# ----------------------------------------------------------------------
# Constants and graph verification
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class RigidityConstants:
    """alpha and the derived constants C = alpha^2, c = 1 - 1/alpha^2,
    C' = 1/alpha^2 entering the two-sided bound (1/C) h <= g <= C h."""

    alpha: float
    big_c: float
    small_c: float
    c_prime: float


def rigidity_constants(alpha: float) -> RigidityConstants:
    if not alpha > 1.0:
        raise AlphaNotAboveOne(f"alpha = {alpha} must exceed 1")
    return RigidityConstants(
        alpha=alpha,
        big_c=alpha**2,
        small_c=1.0 - 1.0 / alpha**2,
        c_prime=1.0 / alpha**2,
    )


def tangent_line_hits_level(a: float, r: float, alpha: float) -> bool:
    """Whether the line (t, a t + r) meets x^2 - z^2 = -alpha^2 twice.

    The quadratic (1-a^2) t^2 - 2 a r t + (alpha^2 - r^2) has discriminant
    4 (a^2 alpha^2 + r^2 - alpha^2), positive exactly when a^2 > 1 - r^2/alpha^2.
    """
    return a * a * alpha * alpha + r * r - alpha * alpha > 0.0


@dataclass(frozen=True)
class ConvexGraphReport:
    kappa: np.ndarray
    spacelike: bool
    convex: bool
    min_gradient_slack: float


def graph_metric(u: np.ndarray, spacing: float):
    """(E, F, G) of the Lorentz pullback of (x, y, u) on interior nodes."""
    ux = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * spacing)
    uy = (u[1:-1, 2:] - u[1:-1, :-2]) / (2.0 * spacing)
    return 1.0 - ux**2, -ux * uy, 1.0 - uy**2


def verify_convex_graph(u: np.ndarray, spacing: float) -> ConvexGraphReport:
    """Curvature and convexity of a spacelike graph over a square patch.

    Second-order centered differences on interior nodes; the curvature is
    -(u_xx u_yy - u_xy^2) / (1 - u_x^2 - u_y^2)^2.  Raises
    NotSpacelikeGraph when the gradient reaches slope 1.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or min(u.shape) < 3:
        raise ValueError("need a 2D array with at least 3 nodes per axis")
    h = float(spacing)
    ux = (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * h)
    uy = (u[1:-1, 2:] - u[1:-1, :-2]) / (2.0 * h)
    slack = 1.0 - ux**2 - uy**2
    min_slack = float(slack.min())
    if min_slack <= 0.0:
        raise NotSpacelikeGraph(f"gradient reaches slope 1 (slack {min_slack:.3e})")
    uxx = (u[2:, 1:-1] - 2.0 * u[1:-1, 1:-1] + u[:-2, 1:-1]) / h**2
    uyy = (u[1:-1, 2:] - 2.0 * u[1:-1, 1:-1] + u[1:-1, :-2]) / h**2
    uxy = (u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]) / (4.0 * h**2)
    hess_det = uxx * uyy - uxy**2
    kappa = -hess_det / slack**2
    scale = max(float(np.abs(uxx).max()), float(np.abs(uyy).max()), 1.0)
    convex = bool((uxx >= -1e-9 * scale).all() and (hess_det >= -1e-9 * scale**2).all())
    return ConvexGraphReport(kappa=kappa, spacelike=True, convex=convex,
                             min_gradient_slack=min_slack)


def hyperboloid_graph(alpha_level: float, extent: float, m: int):
    """Sampled height field of the level-alpha hyperboloid over a square."""
    xs = np.linspace(-extent, extent, m)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    u = np.sqrt(alpha_level**2 + X**2 + Y**2)
    return u, xs[1] - xs[0]


# ----------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------


def uniform_alpha_estimate(group: FuchsianGroup, word_len: int = 3,
                           samples: int = 5, patch_radius: float = 1.3):
    """Max of level_alpha over a polar patch of base points.

    Sampled estimate of the uniform bound (a lower bound of it); the
    sampling resolution travels with the result.
    """
    best = 1.0
    cutoff = float(np.cosh(9.0))
    for t in np.linspace(0.0, patch_radius, samples):
        for ang in np.linspace(0.0, np.pi / 4.0, samples):
            mover = boost_rotation(ang, t)
            base = mover.apply(np.array([0.0, 0.0, 1.0]))
            hull = orbit_hull(group, base, word_len, level_cutoff=cutoff,
                              build_faces=False)
            best = max(best, level_alpha(hull))
    return {"alpha": best, "samples": samples * samples,
            "patch_radius": patch_radius, "word_len": word_len}


def rigidity_report(group: FuchsianGroup, word_len: int = 4,
                    stabilization_lens=(6, 8)) -> dict:
    """Constants report: orbit size, alpha, C, c, C', stabilization ratio."""
    apex = np.array([0.0, 0.0, 1.0])
    pts = orbit(group, apex, word_len)
    hull = OrbitHull.from_points(MinkVector(0.0, 0.0, 1.0), pts, build_faces=False)
    alpha = level_alpha(hull)
    cutoff = float(np.cosh(9.0))
    alphas = {}
    for ln in stabilization_lens:
        h = orbit_hull(group, apex, ln, level_cutoff=cutoff, build_faces=False)
        alphas[ln] = level_alpha(h)
    lo, hi = min(stabilization_lens), max(stabilization_lens)
    stab = alphas[hi] / alphas[lo] - 1.0
    consts = rigidity_constants(alpha)
    return {
        "word_len": word_len,
        "orbit_size": int(len(pts)),
        "alpha": alpha,
        "C": consts.big_c,
        "c": consts.small_c,
        "C_prime": consts.c_prime,
        "stabilization_ratio": stab,
        "relator_defect": group.relator_defect(),
        "boost_length": group.boost_length,
    }
