import numpy as np
import pytest

from conekit.defect import DEFAULT_DICTIONARY, LinearFormZ, cone_margin, decompose
from conekit.errors import DefectOutsideCone
from conekit.fields import MetricField, Sym2, c0_distance


def constant_field(grid, e, f, g):
    return MetricField.constant(grid, Sym2(e, f, g))


def coefficients_by_form(decomp):
    return {form: eta for form, eta in decomp.terms}


def test_linear_form_validation():
    assert LinearFormZ(1, -1).kernel == (1, 1)
    assert LinearFormZ(2, 3).kernel == (-3, 2)
    with pytest.raises(ValueError):
        LinearFormZ(0, 0)
    with pytest.raises(ValueError):
        LinearFormZ(2, 4)


def test_square_coefficients():
    assert LinearFormZ(1, 1).square_coefficients() == (1, 1, 1)
    assert LinearFormZ(1, -1).square_coefficients() == (1, -1, 1)


def test_decompose_diagonal(grid16):
    d = decompose(constant_field(grid16, 2.0, 0.0, 1.0))
    eta = coefficients_by_form(d)
    assert np.allclose(eta[LinearFormZ(1, 0)], 2.0)
    assert np.allclose(eta[LinearFormZ(0, 1)], 1.0)
    assert np.allclose(eta[LinearFormZ(1, 1)], 0.0)
    assert np.allclose(eta[LinearFormZ(1, -1)], 0.0)


def test_decompose_offdiagonal(grid16):
    d = decompose(constant_field(grid16, 2.0, 1.0, 2.0))
    eta = coefficients_by_form(d)
    assert np.allclose(eta[LinearFormZ(1, 0)], 1.0)
    assert np.allclose(eta[LinearFormZ(0, 1)], 1.0)
    assert np.allclose(eta[LinearFormZ(1, 1)], 1.0)
    assert np.allclose(eta[LinearFormZ(1, -1)], 0.0)


def test_decompose_outside_cone(grid16):
    with pytest.raises(DefectOutsideCone):
        decompose(constant_field(grid16, 1.0, 2.0, 1.0))


def test_cone_margin_examples(grid16):
    assert cone_margin(constant_field(grid16, 2.0, 0.0, 1.0)) == pytest.approx(1.0)
    assert cone_margin(constant_field(grid16, 1.0, 1.0, 1.0)) == pytest.approx(0.0)
    assert cone_margin(constant_field(grid16, 3.0, -1.0, 2.0)) == pytest.approx(1.0)


def random_cone_field(grid, rng):
    """PSD field safely inside the positive span of the dictionary."""
    shape = (grid.n, grid.n)
    f = rng.uniform(-0.5, 0.5, size=shape)
    e = np.abs(f) + rng.uniform(0.1, 1.0, size=shape)
    g = np.abs(f) + rng.uniform(0.1, 1.0, size=shape)
    return MetricField(grid, e, f, g)


def test_reconstruction_and_nonnegativity(grid16, rng):
    for _ in range(10):
        delta = random_cone_field(grid16, rng)
        d = decompose(delta)
        assert c0_distance(d.reconstruct(), delta) <= 1e-10
        for form, eta in d.terms:
            assert eta.min() >= 0.0
            kx, ky = form.kernel
            assert np.gcd(abs(kx), abs(ky)) == 1


def test_decomposition_lipschitz_continuity(grid16, rng):
    delta = random_cone_field(grid16, rng)
    eps = 1e-3
    bump = MetricField(
        grid16,
        rng.uniform(-eps, eps, size=(16, 16)),
        rng.uniform(-eps, eps, size=(16, 16)),
        rng.uniform(-eps, eps, size=(16, 16)),
    )
    a = coefficients_by_form(decompose(delta))
    b = coefficients_by_form(decompose(delta + bump))
    for form in DEFAULT_DICTIONARY:
        assert np.abs(a[form] - b[form]).max() <= 2.0 * eps + 1e-15


def test_extra_dictionary_forms_get_zero(grid16):
    extra = DEFAULT_DICTIONARY + (LinearFormZ(2, 1),)
    d = decompose(constant_field(grid16, 2.0, 0.0, 1.0), extra)
    eta = coefficients_by_form(d)
    assert np.allclose(eta[LinearFormZ(2, 1)], 0.0)
    assert c0_distance(d.reconstruct(), constant_field(grid16, 2.0, 0.0, 1.0)) <= 1e-10


def test_dictionary_must_contain_defaults(grid16):
    with pytest.raises(ValueError):
        decompose(constant_field(grid16, 1.0, 0.0, 1.0), (LinearFormZ(1, 0),))
