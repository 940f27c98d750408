import numpy as np
import pytest

from conekit.errors import DegenerateTangentPlane, NonPositiveHeight
from conekit.minkowski import (
    Isometry21,
    MinkVector,
    boost,
    boost_rotation,
    cone_level,
    klein_project,
    lorentz_dot,
    rotation,
    timelike_unit_normal,
)


def test_lorentz_dot_values():
    assert lorentz_dot(MinkVector(1, 0, 0), MinkVector(1, 0, 0)) == 1.0
    assert lorentz_dot(MinkVector(0, 0, 1), MinkVector(0, 0, 1)) == -1.0
    assert lorentz_dot(MinkVector(1, 2, 2), MinkVector(3, 0, 3)) == -3.0


def test_lorentz_dot_symmetric_bilinear(rng):
    a, b, c = rng.normal(size=(3, 3))
    s, t = rng.normal(size=2)
    assert lorentz_dot(a, b) == pytest.approx(lorentz_dot(b, a), abs=0)
    assert lorentz_dot(s * a + t * b, c) == pytest.approx(
        s * lorentz_dot(a, c) + t * lorentz_dot(b, c), rel=1e-12
    )


def test_mink_vector_rejects_nonfinite():
    with pytest.raises(ValueError):
        MinkVector(np.nan, 0.0, 1.0)
    with pytest.raises(ValueError):
        MinkVector(0.0, np.inf, 1.0)


def test_cone_level_examples():
    assert cone_level(MinkVector(0, 0, 1)) == pytest.approx(1.0)
    assert cone_level(MinkVector(0, 0, 2.5)) == pytest.approx(2.5)
    assert cone_level(MinkVector(1, 0, 1)) is None
    assert cone_level(MinkVector(0, 0, -1)) is None
    arr = cone_level(np.array([[0.0, 0.0, 2.0], [1.0, 0.0, 1.0]]))
    assert arr[0] == pytest.approx(2.0)
    assert np.isnan(arr[1])


def test_klein_project_examples():
    assert klein_project(MinkVector(0, 0, 5)) == pytest.approx((0.0, 0.0))
    assert klein_project(MinkVector(1, 0, 2)) == pytest.approx((0.5, 0.0))
    with pytest.raises(NonPositiveHeight):
        klein_project(MinkVector(1, 0, 0))


def test_klein_project_equivariance_with_boost():
    # Klein action of the x-boost in closed form:
    # (x, y) -> ((x cosh + sinh)/(x sinh + cosh), y/(x sinh + cosh))
    eta = 0.73
    g = boost(eta)
    for p in [MinkVector(0.2, -0.1, 1.2), MinkVector(-0.3, 0.45, 2.0)]:
        qx, qy = klein_project(p)
        den = qx * np.sinh(eta) + np.cosh(eta)
        expected = ((qx * np.cosh(eta) + np.sinh(eta)) / den, qy / den)
        assert klein_project(g.apply(p)) == pytest.approx(expected, rel=1e-12)


def test_klein_image_inside_unit_disc(rng):
    for _ in range(50):
        x, y = rng.uniform(-1, 1, size=2)
        z = np.hypot(x, y) + rng.uniform(0.05, 2.0)
        q = klein_project(MinkVector(x, y, z))
        assert np.hypot(*q) < 1.0


def test_timelike_unit_normal_examples():
    n = timelike_unit_normal(MinkVector(1, 0, 0), MinkVector(0, 1, 0))
    assert n.array == pytest.approx([0.0, 0.0, 1.0])
    n = timelike_unit_normal(MinkVector(1, 0, 0.5), MinkVector(0, 1, 0))
    expected = np.array([0.5, 0.0, 1.0]) / np.sqrt(0.75)
    assert n.array == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DegenerateTangentPlane):
        timelike_unit_normal(MinkVector(1, 0, 1), MinkVector(0, 1, 0))


def test_timelike_unit_normal_orthonormality(rng):
    for _ in range(25):
        u1 = np.array([1.0, 0.0, 0.0]) + 0.3 * rng.normal(size=3)
        u2 = np.array([0.0, 1.0, 0.0]) + 0.3 * rng.normal(size=3)
        u1[2] *= 0.4
        u2[2] *= 0.4
        n = timelike_unit_normal(u1, u2)
        assert abs(lorentz_dot(n, u1)) < 1e-10
        assert abs(lorentz_dot(n, u2)) < 1e-10
        assert lorentz_dot(n, n) == pytest.approx(-1.0, abs=1e-10)
        assert n[2] > 0


def test_boost_rotation_identity_and_apex():
    eye = boost_rotation(0.0, 0.0)
    assert np.allclose(eye.matrix, np.eye(3))
    eta = 1.2
    apex = boost_rotation(0.0, eta).apply(MinkVector(0, 0, 1))
    assert apex.array == pytest.approx([np.sinh(eta), 0.0, np.cosh(eta)])


def test_boost_rotation_composition():
    theta, eta = 0.9, 0.6
    lhs = boost_rotation(theta, eta).matrix
    rhs = (rotation(theta) @ boost_rotation(0.0, eta) @ rotation(-theta)).matrix
    assert np.allclose(lhs, rhs, atol=1e-14)


def test_isometry_invariants(rng):
    g = boost_rotation(0.4, 1.1) @ rotation(0.7) @ boost_rotation(-1.0, 0.3)
    for _ in range(20):
        a, b = rng.normal(size=(2, 3))
        assert lorentz_dot(g.apply(a), g.apply(b)) == pytest.approx(
            lorentz_dot(a, b), abs=1e-10
        )
    # cone levels are preserved
    p = np.array([0.3, -0.2, 1.4])
    assert cone_level(g.apply(p)) == pytest.approx(cone_level(p), abs=1e-12)
    # inverse composes to identity
    assert np.allclose((g @ g.inverse()).matrix, np.eye(3), atol=1e-12)


def test_isometry_rejects_bad_matrices():
    with pytest.raises(ValueError):
        Isometry21(np.diag([1.0, 1.0, 1.0 + 1e-6]))
    with pytest.raises(ValueError):
        Isometry21(-np.eye(3))  # flips the future cone
