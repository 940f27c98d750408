"""Independent oracles the tests check the library against.

Nothing here may call back into the code paths under test: the Simpson
integrator is handwritten recursion, the Bessel series is a bare
Maclaurin sum, and the dilatation oracle samples directions by brute
force.
"""

import math

import numpy as np


def adaptive_simpson(f, a, b, tol=1e-13, max_depth=60):
    """Recursive adaptive Simpson quadrature with absolute tolerance."""

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, eps, depth):
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = f(xl)
        fr = f(xr)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        return recurse(x0, xm, f0, fl, f1, left, eps / 2.0, depth - 1) + recurse(
            xm, x2, f1, fr, f2, right, eps / 2.0, depth - 1
        )

    if a == b:
        return 0.0
    f0, f1, f2 = f(a), f(0.5 * (a + b)), f(b)
    whole = simpson(a, b, f0, f1, f2)
    return recurse(a, b, f0, f1, f2, whole, tol, max_depth)


def loop_average_integrand(alpha):
    """s -> cosh(alpha cos 2 pi s); its [0,1] integral is the solver's I."""
    return lambda s: math.cosh(alpha * math.cos(2.0 * math.pi * s))


def bessel_i0_series(alpha, terms=80):
    """Maclaurin sum_k (alpha^2/4)^k / (k!)^2, independent of scipy."""
    acc = 1.0
    term = 1.0
    for k in range(1, terms + 1):
        term *= (alpha * alpha / 4.0) / (k * k)
        acc += term
        if term < 1e-18 * acc:
            break
    return acc


def solve_alpha_by_bisection(target, tol=1e-13):
    """Invert the Maclaurin series by plain bisection."""
    if target <= 1.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while bessel_i0_series(hi) < target:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bessel_i0_series(mid) > target:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def dilatation_by_sampling(g1, g2, n_dirs=10_000):
    """sup/inf of g2(v)/g1(v) over sampled directions, per node max."""
    angles = np.linspace(0.0, np.pi, n_dirs, endpoint=False)
    vx = np.cos(angles)
    vy = np.sin(angles)
    worst = 1.0
    for i in range(g1.grid.n):
        for j in range(g1.grid.n):
            q1 = g1.E[i, j] * vx**2 + 2 * g1.F[i, j] * vx * vy + g1.G[i, j] * vy**2
            q2 = g2.E[i, j] * vx**2 + 2 * g2.F[i, j] * vx * vy + g2.G[i, j] * vy**2
            ratio = q2 / q1
            worst = max(worst, math.sqrt(ratio.max() / ratio.min()))
    return worst


def pencil_extremes(E1, F1, G1, E2, F2, G2):
    """Closed-form generalized eigenvalue range of 2x2 pencils (arrays)."""
    a = E1 * G1 - F1 * F1
    b = E2 * G1 + E1 * G2 - 2.0 * F1 * F2
    c = E2 * G2 - F2 * F2
    disc = np.sqrt(np.maximum(b * b - 4.0 * a * c, 0.0))
    return (b - disc) / (2.0 * a), (b + disc) / (2.0 * a)
