"""Genus-1 conformal layer: target metrics, torus modulus, fixed-point search.

The Teichmueller space of the torus is the upper half plane; a metric g on
the unit-square torus determines a modulus w by integrating the g-harmonic
1-form cohomologous to dx and its Hodge conjugate over the two cycles.
Target metrics h_w = lambda^2 |dz + mu_w dzbar|^2 realize a prescribed
modulus w through the Beltrami coefficient mu_w = (i - w)/(i + w).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import LinearOperator, cg

from .defect import decompose
from .errors import NoAdmissibleDelta, NotPositiveDefinite, SearchFailed, SolverDiverged
from .fields import Immersion, MetricField, PeriodicGrid, dilatation_id, pullback


def _require_uhp(w: complex) -> complex:
    w = complex(w)
    if not w.imag > 0.0:
        raise ValueError(f"{w} is not in the upper half plane")
    return w


def mu_of_w(w: complex) -> complex:
    """Beltrami coefficient mu_w = (i - w)/(i + w); |mu_w| < 1 on H^2."""
    w = _require_uhp(w)
    return (1j - w) / (1j + w)


def build_target_metric(lambda2, w: complex, delta: float,
                        grid: PeriodicGrid | None = None) -> MetricField:
    """delta * lambda^2 |dz + mu_w dzbar|^2 as a coefficient field.

    In real coordinates the form is |1+mu|^2 dx^2 + 2(2 Im mu) dx dy
    + |1-mu|^2 dy^2 (convention E dx^2 + 2F dx dy + G dy^2).
    """
    mu = mu_of_w(w)
    if grid is None:
        lam2 = np.asarray(lambda2, dtype=float)
        if lam2.ndim != 2:
            raise ValueError("pass a grid when lambda2 is scalar")
        grid = PeriodicGrid(lam2.shape[0])
    shape = (grid.n, grid.n)
    lam2 = np.broadcast_to(np.asarray(lambda2, dtype=float), shape)
    scale = delta * lam2
    return MetricField(
        grid,
        scale * abs(1.0 + mu) ** 2,
        scale * 2.0 * mu.imag,
        scale * abs(1.0 - mu) ** 2,
    )


def hyp_distance(w1: complex, w2: complex) -> float:
    """Upper half plane distance arcosh(1 + |w1-w2|^2 / (2 Im w1 Im w2))."""
    w1 = complex(w1)
    w2 = complex(w2)
    arg = 1.0 + abs(w1 - w2) ** 2 / (2.0 * w1.imag * w2.imag)
    return float(np.arccosh(max(arg, 1.0)))


# ----------------------------------------------------------------------
# Discrete harmonic 1-forms (P1 elements on the split periodic grid)
# ----------------------------------------------------------------------
#
# Each grid cell splits into two triangles; a P1 function has constant
# gradient per triangle, so the Dirichlet energy of dx + da is a sparse
# quadratic in the node values of a, with weights sqrt(det m) m^{-1}
# averaged over the triangle corners.  The kernel is constants only.

_CG_TOL = 1e-10

# local gradient maps (rows: node coefficients of d/dx, d/dy, times 1/h)
_TRI_GRADS = (
    np.array([[-1.0, 0.0], [1.0, -1.0], [0.0, 1.0]]),   # (i,j),(i+1,j),(i+1,j+1)
    np.array([[0.0, -1.0], [1.0, 0.0], [-1.0, 1.0]]),   # (i,j),(i+1,j+1),(i,j+1)
)


@lru_cache(maxsize=4)
def _triangle_nodes(n: int):
    idx = np.arange(n * n).reshape(n, n)
    right = np.roll(idx, -1, axis=0)
    up = np.roll(idx, -1, axis=1)
    diag = np.roll(idx, (-1, -1), axis=(0, 1))
    tri_a = np.stack([idx, right, diag], axis=-1).reshape(-1, 3)
    tri_b = np.stack([idx, diag, up], axis=-1).reshape(-1, 3)
    return tri_a, tri_b


def _triangle_weights(g: MetricField, kind: int):
    """sqrt(det m) m^{-1} averaged over the triangle corners, flattened."""
    n = g.grid.n
    if kind == 0:
        shifts = ((0, 0), (-1, 0), (-1, -1))
    else:
        shifts = ((0, 0), (-1, -1), (0, -1))
    E = sum(np.roll(g.E, s, axis=(0, 1)) for s in shifts) / 3.0
    F = sum(np.roll(g.F, s, axis=(0, 1)) for s in shifts) / 3.0
    G = sum(np.roll(g.G, s, axis=(0, 1)) for s in shifts) / 3.0
    det = E * G - F * F
    if np.any(det <= 0.0):
        raise NotPositiveDefinite("metric degenerates on a triangle")
    root = np.sqrt(det)
    return (G / root).ravel(), (-F / root).ravel(), (E / root).ravel()


def _harmonic_correction(g: MetricField):
    """Node values of a minimizing the g-Dirichlet energy of dx + da."""
    n = g.grid.n
    size = n * n
    rows, cols, vals = [], [], []
    rhs = np.zeros(size)
    for kind in (0, 1):
        tri = _triangle_nodes(n)[kind]
        w00, w01, w11 = _triangle_weights(g, kind)
        gr = _TRI_GRADS[kind]
        for p in range(3):
            gp = gr[p]
            # right-hand side: -h * (G W e1)_p, h factors drop after scaling
            rhs_p = -(gp[0] * w00 + gp[1] * w01) / n
            np.add.at(rhs, tri[:, p], rhs_p)
            for q in range(3):
                gq = gr[q]
                kpq = (
                    gp[0] * gq[0] * w00
                    + (gp[0] * gq[1] + gp[1] * gq[0]) * w01
                    + gp[1] * gq[1] * w11
                )
                rows.append(tri[:, p])
                cols.append(tri[:, q])
                vals.append(kpq)
    mat = coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size),
    ).tocsr()
    rhs -= rhs.mean()
    diag = mat.diagonal()
    precond = LinearOperator((size, size), matvec=lambda x: x / diag)
    sol, info = cg(mat, rhs, rtol=_CG_TOL, atol=0.0, maxiter=40 * n, M=precond)
    if info != 0:
        raise SolverDiverged(f"harmonic solve failed to converge (info={info})")
    return (sol - sol.mean()).reshape(n, n)


def torus_modulus(g: MetricField, return_details: bool = False):
    """Modulus w of a Riemannian coefficient field on the torus.

    Builds the g-harmonic representative theta of [dx], its conjugate
    *theta, and returns the ratio of their (y-cycle, x-cycle) periods,
    conjugated into the upper half plane if orientation flipped.
    """
    if not g.is_positive_definite():
        raise NotPositiveDefinite("torus_modulus needs a Riemannian field")
    n = g.grid.n
    a = _harmonic_correction(g)
    theta_periods = np.zeros(2)
    star_periods = np.zeros(2)
    flat = a.ravel()
    for kind in (0, 1):
        tri = _triangle_nodes(n)[kind]
        gr = _TRI_GRADS[kind]
        a_loc = flat[tri]
        tx = 1.0 + n * (a_loc @ gr[:, 0])
        ty = n * (a_loc @ gr[:, 1])
        w00, w01, w11 = _triangle_weights(g, kind)
        # W = sqrt(det) m^{-1}; *theta = (F tx - E ty, G tx - F ty)/sqrt(det)
        # and (W theta) = (w00 tx + w01 ty, w01 tx + w11 ty) = (G tx - F ty,
        # -F tx + E ty)/sqrt(det), so *theta = (-(W theta)_2, (W theta)_1).
        sx = -(w01 * tx + w11 * ty)
        sy = w00 * tx + w01 * ty
        area = 0.5 / (n * n)
        theta_periods += area * np.array([tx.sum(), ty.sum()])
        star_periods += area * np.array([sx.sum(), sy.sum()])
    denom = theta_periods[0] + 1j * star_periods[0]
    numer = theta_periods[1] + 1j * star_periods[1]
    w = numer / denom
    flipped = False
    if w.imag < 0.0:
        w = w.conjugate()
        flipped = True
    if return_details:
        return w, {"flipped": flipped, "correction": a}
    return w


# ----------------------------------------------------------------------
# Longness scale and the conformal fixed-point search
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the conformal search.

    rho: Teichmueller ball radius; epsilon: relative isometry budget of the
    corrugation pipeline; delta: longness scale (None picks the largest
    safe dyadic value); damping in (0, 1]; max_iter caps G-evaluations;
    tol is the acceptance distance hyp(G(w), w0).
    """

    rho: float = 0.1
    epsilon: float = 5e-4
    delta: float | None = None
    damping: float = 1.0
    max_iter: int = 25
    tol: float = 1e-2

    def __post_init__(self):
        if self.rho <= 0 or self.epsilon <= 0 or self.max_iter <= 0 or self.tol <= 0:
            raise ValueError("search parameters must be positive")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("damping must lie in (0, 1]")
        if self.delta is not None and self.delta <= 0:
            raise ValueError("delta must be positive")


def _ball_samples(w0: complex, rho: float, rings, per_ring: int):
    """Points of hyperbolic circles around w0 (plus the center first)."""
    x0, y0 = w0.real, w0.imag
    pts = [w0]
    for t in rings:
        # hyperbolic circle of radius t: Euclidean center x0 + i y0 cosh t,
        # Euclidean radius y0 sinh t
        cy = y0 * np.cosh(t)
        r = y0 * np.sinh(t)
        for k in range(per_ring):
            ang = 2.0 * np.pi * k / per_ring
            pts.append(complex(x0 + r * np.cos(ang), cy + r * np.sin(ang)))
    return pts


def _long_for_all(fstar: MetricField, lambda2, delta: float, samples) -> bool:
    from .defect import cone_margin

    for w in samples:
        gw = build_target_metric(lambda2, w, delta, fstar.grid)
        diff = fstar - gw
        if cone_margin(diff) <= 0.0 or not diff.is_positive_definite():
            return False
    return True


def choose_delta(f: Immersion, w0: complex, rho: float, lambda2=1.0) -> float:
    """Largest dyadic delta keeping f long for g_w across the rho-ball.

    Tries delta = 2^{-k} against the center plus a 32-point two-ring
    sampling of the ball; the first success is halved once (safety 1/2).
    Raises NoAdmissibleDelta below 2^{-40}.
    """
    w0 = _require_uhp(w0)
    fstar = pullback(f)
    samples = _ball_samples(w0, rho, (0.5 * rho, rho) if rho > 0 else (), 16)
    delta = 0.5
    while delta >= 2.0**-40:
        if _long_for_all(fstar, lambda2, delta, samples):
            return 0.5 * delta
        delta *= 0.5
    raise NoAdmissibleDelta(f"no dyadic longness scale works at w0={w0}, rho={rho}")


def _next_odd(n: int) -> int:
    return n if n % 2 == 1 else n + 1


class _PipelineCache:
    """Per-search warm start of the stage corrugation numbers."""

    def __init__(self, budget: float, start: int = 17):
        self.budget = budget
        self.start = start
        self.stage_n: dict[int, int] = {}

    def policy_for(self, stage: int) -> int:
        return self.stage_n.get(stage, self.start)

    def remember(self, log):
        for row in log:
            self.stage_n[row["stage"]] = row["n_corr"]


def _run_budgeted(f: Immersion, decomposition, cache: _PipelineCache):
    """Stage-wise corrugation with odd N doubled until under budget."""
    from .corrugation import CorrugationStep, _stage_target, corrugate_once
    from .errors import IntermediateMetricNotRiemannian
    from .fields import c0_distance

    terms = decomposition.terms
    budget = cache.budget / max(len(terms), 1)
    log = []
    current = f
    for stage, (form, eta) in enumerate(terms):
        mu = _stage_target(current, form, eta)
        if not mu.is_positive_definite():
            raise IntermediateMetricNotRiemannian(
                stage, f"stage {stage} target metric is not Riemannian"
            )
        n = _next_odd(cache.policy_for(stage))
        best = None
        for _ in range(24):
            candidate = corrugate_once(current, CorrugationStep(form, eta, n))
            err = c0_distance(pullback(candidate), mu)
            if best is None or err < best[1]:
                best = (candidate, err, n)
            if err <= budget:
                break
            n = _next_odd(2 * n)
        candidate, err, n_used = best
        log.append({"stage": stage, "form": (form.a, form.b), "n_corr": n_used,
                    "c0_error": err})
        current = candidate
    cache.remember(log)
    return current, log


def conformal_search(f: Immersion, w0: complex, cfg: SearchConfig, lambda2=1.0):
    """Find w* in the rho-ball whose corrugated embedding has modulus w0.

    Evaluates G(w) = modulus(pullback(pipeline(f, f*h - g_w))) and runs the
    damped fixed-point iteration w <- w + damping (w0 - G(w)) from w0; on
    stall it falls back to a shrinking 9-point grid search over the ball.
    Returns (w*, embedding at w*, trace); raises SearchFailed with the
    trace attached when the budget runs out.
    """
    w0 = _require_uhp(w0)
    delta = cfg.delta if cfg.delta is not None else choose_delta(f, w0, cfg.rho, lambda2)
    fstar = pullback(f)
    cache = _PipelineCache(budget=cfg.epsilon * delta)
    trace = []
    best = None  # (distance, w, F, G_w)

    def evaluate(w, kind):
        nonlocal best
        gw = build_target_metric(lambda2, w, delta, f.grid)
        decomp = decompose(fstar - gw)
        embedded, log = _run_budgeted(f, decomp, cache)
        final = pullback(embedded)
        g_val, details = torus_modulus(final, return_details=True)
        dist0 = hyp_distance(g_val, w0)
        dist_self = hyp_distance(g_val, w)
        half_log_dil = 0.5 * float(np.log(dilatation_id(gw, final)))
        c0_err = sum(row["c0_error"] for row in log)
        trace.append({
            "iter": len(trace),
            "kind": kind,
            "w": complex(w),
            "g_of_w": complex(g_val),
            "hyp_dist": dist0,
            "hyp_self": dist_self,
            "half_log_dil": half_log_dil,
            "c0_err": c0_err,
            "flipped": details["flipped"],
            "stages": log,
        })
        if dist_self > cfg.rho:
            warnings.warn(
                f"|G(w) - w| = {dist_self:.3e} exceeds rho at w={w}; "
                "corrugation numbers may be too small for the ball hypothesis"
            )
        if best is None or dist0 < best[0]:
            best = (dist0, complex(w), embedded, complex(g_val))
        return g_val

    w = w0
    stall = 0
    prev_best = np.inf
    while len(trace) < cfg.max_iter:
        g_val = evaluate(w, "iterate")
        if best[0] <= cfg.tol:
            return best[1], best[2], trace
        if best[0] < prev_best - 1e-12:
            stall = 0
        else:
            stall += 1
        prev_best = best[0]
        if stall >= 2:
            break
        step = cfg.damping * (w0 - g_val)
        w_next = w + step
        if w_next.imag <= 0.0 or hyp_distance(w_next, w0) > cfg.rho:
            break
        w = w_next

    # 9-point shrinking grid fallback
    spread = cfg.rho / np.sqrt(2.0)
    center = best[1] if best is not None else w0
    while len(trace) < cfg.max_iter:
        offsets = [complex(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)]
        for off in offsets:
            if len(trace) >= cfg.max_iter:
                break
            cand = center + off * spread * center.imag
            if cand.imag <= 0.0 or hyp_distance(cand, w0) > cfg.rho:
                continue
            if any(abs(row["w"] - cand) < 1e-14 for row in trace):
                continue
            evaluate(cand, "grid")
            if best[0] <= cfg.tol:
                return best[1], best[2], trace
        center = best[1]
        spread *= 0.5
    if best is not None and best[0] <= cfg.tol:
        return best[1], best[2], trace
    raise SearchFailed(
        f"no w with hyp(G(w), w0) <= {cfg.tol} within {cfg.max_iter} evaluations",
        trace=trace,
    )
