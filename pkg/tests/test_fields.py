import numpy as np
import pytest
import sympy

from conekit.errors import GridMismatch, NotPositiveDefinite
from conekit.fields import (
    Immersion,
    MetricField,
    PeriodicGrid,
    Sym2,
    c0_distance,
    dilatation_id,
    generalized_eigen_range,
    graph_immersion,
    plane_immersion,
    pullback,
    teich_distance_bound,
)
from oracles import dilatation_by_sampling


def constant_field(grid, e, f, g):
    return MetricField.constant(grid, Sym2(e, f, g))


def test_grid_validation():
    with pytest.raises(ValueError):
        PeriodicGrid(4)
    assert PeriodicGrid(8).spacing == pytest.approx(0.125)


def test_pullback_plane(grid16):
    g = pullback(plane_immersion(grid16))
    assert np.allclose(g.E, 1.0) and np.allclose(g.F, 0.0) and np.allclose(g.G, 1.0)


def test_pullback_tilted_plane(grid16):
    a = 0.6
    g = pullback(plane_immersion(grid16, slope_x=a))
    assert np.allclose(g.E, 1.0 - a * a)
    assert np.allclose(g.F, 0.0)
    assert np.allclose(g.G, 1.0)


def test_pullback_sin_graph_against_symbolic_oracle():
    # f = (x, y, 0.2 sin 2 pi x): E = 1 - (0.4 pi cos 2 pi x)^2
    grid = PeriodicGrid(32)
    x = sympy.symbols("x")
    height = 0.2 * sympy.sin(2 * sympy.pi * x)
    e_expr = 1 - sympy.diff(height, x) ** 2
    f = graph_immersion(
        grid,
        lambda X, Y: 0.2 * np.sin(2 * np.pi * X),
        lambda X, Y: (0.4 * np.pi * np.cos(2 * np.pi * X), np.zeros_like(Y)),
    )
    g = pullback(f)
    for i in [0, 3, 11, 17]:
        expected = float(e_expr.subs(x, sympy.Rational(i, 32)))
        assert g.E[i, 5] == pytest.approx(expected, abs=1e-12)
    assert g.E[0, 0] == pytest.approx(1 - 0.16 * np.pi**2, abs=1e-12)


def test_centered_mode_agrees_to_second_order():
    errs = []
    for n in (32, 64):
        grid = PeriodicGrid(n)
        f = graph_immersion(
            grid,
            lambda X, Y: 0.1 * np.sin(2 * np.pi * X) * np.cos(2 * np.pi * Y),
            lambda X, Y: (
                0.2 * np.pi * np.cos(2 * np.pi * X) * np.cos(2 * np.pi * Y),
                -0.2 * np.pi * np.sin(2 * np.pi * X) * np.sin(2 * np.pi * Y),
            ),
        )
        g_exact = pullback(f)
        g_fd = pullback(f.with_derivative_mode("centered"))
        errs.append(c0_distance(g_exact, g_fd))
    assert errs[1] < errs[0] / 3.0  # second order: factor ~4 per refinement


def test_pullback_is_periodic_and_equivariant(grid16):
    f = plane_immersion(grid16, slope_x=0.5)
    shift = f.value_at_index(19, 4) - f.value_at_index(3, 4)
    assert np.array_equal(shift, f.linear_part[0])
    # non-dyadic deck entries still match to one rounding
    g = plane_immersion(grid16, slope_x=0.3)
    shift = g.value_at_index(19, 4) - g.value_at_index(3, 4)
    assert shift == pytest.approx(g.linear_part[0], abs=1e-15)


def test_c0_distance_examples(grid16):
    a = constant_field(grid16, 2.0, 0.0, 1.0)
    b = constant_field(grid16, 1.0, 0.0, 1.0)
    assert c0_distance(a, a) == 0.0
    assert c0_distance(a, b) == pytest.approx(1.0)
    c = constant_field(grid16, 1.0, 0.5, 1.0)
    assert c0_distance(c, b) == pytest.approx(0.5)


def test_c0_distance_metric_axioms(grid16, rng):
    def random_field():
        return MetricField(
            grid16,
            rng.normal(size=(16, 16)),
            rng.normal(size=(16, 16)),
            rng.normal(size=(16, 16)),
        )

    for _ in range(10):
        a, b, c = random_field(), random_field(), random_field()
        assert c0_distance(a, b) == pytest.approx(c0_distance(b, a), abs=1e-12)
        assert c0_distance(a, c) <= c0_distance(a, b) + c0_distance(b, c) + 1e-12
        assert c0_distance(a, a) == 0.0


def test_c0_distance_grid_mismatch(grid16, grid32):
    with pytest.raises(GridMismatch):
        c0_distance(constant_field(grid16, 1, 0, 1), constant_field(grid32, 1, 0, 1))


def test_dilatation_examples(grid16):
    g1 = constant_field(grid16, 1.0, 0.0, 1.0)
    assert dilatation_id(g1, 3.7 * g1) == pytest.approx(1.0, abs=1e-12)
    g2 = constant_field(grid16, 1.0, 0.0, 4.0)
    assert dilatation_id(g1, g2) == pytest.approx(2.0, rel=1e-12)


def test_dilatation_against_direction_sampling_oracle(rng):
    grid = PeriodicGrid(8)

    def random_spd():
        e = rng.uniform(0.5, 3.0, size=(8, 8))
        g = rng.uniform(0.5, 3.0, size=(8, 8))
        f = rng.uniform(-0.4, 0.4, size=(8, 8)) * np.sqrt(e * g)
        return MetricField(grid, e, f, g)

    g1, g2 = random_spd(), random_spd()
    expected = dilatation_by_sampling(g1, g2)
    assert dilatation_id(g1, g2) == pytest.approx(expected, abs=1e-6)


def test_dilatation_pair_inequality(grid16, rng):
    e = rng.uniform(0.5, 2.0, size=(16, 16))
    g1 = MetricField(grid16, e, 0.1 * e, 1.3 * e)
    g2 = constant_field(grid16, 1.0, 0.0, 1.0)
    assert dilatation_id(g1, g2) * dilatation_id(g2, g1) >= 1.0 - 1e-12


def test_dilatation_requires_positive_definite(grid16):
    good = constant_field(grid16, 1.0, 0.0, 1.0)
    bad = constant_field(grid16, 1.0, 2.0, 1.0)
    with pytest.raises(NotPositiveDefinite):
        dilatation_id(good, bad)
    with pytest.raises(NotPositiveDefinite):
        dilatation_id(bad, good)


def test_teich_bound_examples(grid16):
    g1 = constant_field(grid16, 1.0, 0.0, 1.0)
    assert teich_distance_bound(g1, g1) == 0.0
    g2 = constant_field(grid16, 1.0, 0.0, 4.0)
    assert teich_distance_bound(g1, g2) == pytest.approx(0.5 * np.log(2.0))
    g3 = constant_field(grid16, 1.0, 0.0, 9.0)
    assert teich_distance_bound(g1, g3) > teich_distance_bound(g1, g2)


def test_spacelike_flag_via_eigen_range(grid16):
    f = plane_immersion(grid16, slope_x=0.4)
    lam_min, _ = generalized_eigen_range(
        constant_field(grid16, 1.0, 0.0, 1.0), pullback(f)
    )
    assert lam_min.min() > 0.0
    assert f.is_spacelike()
    assert not plane_immersion(grid16, slope_x=1.2).is_spacelike()


def test_immersion_validation(grid16):
    with pytest.raises(ValueError):
        Immersion(grid16, np.eye(3), np.zeros((16, 16, 3)))
    with pytest.raises(ValueError):
        Immersion(grid16, np.zeros((2, 3)), np.zeros((8, 8, 3)))
    with pytest.raises(ValueError):
        Immersion(grid16, np.zeros((2, 3)), np.zeros((16, 16, 3)), "analytic")
