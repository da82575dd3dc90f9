import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logdisp.grid import (
    SQRT_PI,
    Density,
    Grid1D,
    entropy_integrand,
    gaussian_density,
    gaussian_sq,
    interpolate,
    make_grid,
    primitive,
    quadrature,
    spectral_derivative,
)


def test_grid_geometry():
    g = Grid1D(16.0, 512)
    assert g.spacing == pytest.approx(1 / 16)
    assert g.x[0] == -16.0 and g.x[-1] == pytest.approx(16.0 - g.spacing)
    assert make_grid(16.0, 512) == g
    with pytest.raises(ValueError):
        g.x[0] = 1.0


@pytest.mark.parametrize("L, N", [(0.0, 64), (-1.0, 64), (8.0, 100), (8.0, 4), (math.inf, 64)])
def test_grid_rejects_bad_parameters(L, N):
    with pytest.raises(ValueError):
        Grid1D(L, N)


def test_gaussian_quadrature_is_spectral():
    g = Grid1D(16.0, 256)
    assert quadrature(gaussian_sq(g.x), g) == pytest.approx(SQRT_PI, abs=1e-14)


@given(order=st.integers(0, 3), shift=st.floats(-2, 2))
@settings(max_examples=25, deadline=None)
def test_spectral_derivative_of_gaussian(order, shift):
    g = Grid1D(16.0, 512)
    y = g.x - shift
    exact = [np.exp(-(y**2)), -2 * y * np.exp(-(y**2)), (4 * y**2 - 2) * np.exp(-(y**2)), (12 * y - 8 * y**3) * np.exp(-(y**2))]
    assert np.max(np.abs(spectral_derivative(np.exp(-(y**2)), g, order) - exact[order])) < 1e-10


def test_primitive_matches_erf():
    from scipy.special import erf

    g = Grid1D(16.0, 512)
    got = primitive(gaussian_sq(g.x), g)
    want = 0.5 * SQRT_PI * (1 + erf(g.x))
    assert np.max(np.abs(got - want)) < 1e-13
    assert got[0] == 0.0


def test_interpolate_off_grid_and_outside():
    g = Grid1D(16.0, 512)
    pts = np.array([-0.33, 0.1234, 2.5, 20.0])
    vals = interpolate(gaussian_sq(g.x), g, pts, outside=-1.0)
    assert np.allclose(vals[:3], np.exp(-pts[:3] ** 2), atol=1e-13)
    assert vals[3] == -1.0
    assert np.isrealobj(vals)


def test_entropy_integrand_floor():
    rho = np.array([0.0, 1e-300, 1.0, np.e])
    out = entropy_integrand(rho)
    assert out[0] == 0.0 and out[2] == 0.0 and out[3] == pytest.approx(np.e)
    assert np.all(np.isfinite(entropy_integrand(rho, floor=1e-3)))


def test_density_moments():
    g = Grid1D(16.0, 512)
    d = gaussian_density(g, 0.7, 0.4)
    assert d.mass == pytest.approx(1.0, abs=1e-14)
    assert d.mean == pytest.approx(0.7, abs=1e-13)
    assert d.variance == pytest.approx(0.4, abs=1e-13)
    # entropy of N(m, v) is -(1/2) ln(2 pi e v)
    assert d.entropy == pytest.approx(-0.5 * math.log(2 * math.pi * math.e * 0.4), abs=1e-12)
    assert d.normalized().mass == pytest.approx(1.0)


def test_density_rejects_invalid_values():
    g = Grid1D(8.0, 64)
    with pytest.raises(ValueError):
        Density(g, -np.ones(64))
    with pytest.raises(ValueError):
        Density(g, np.ones(32))
    with pytest.raises(ValueError):
        Density(g, np.full(64, np.nan))
    with pytest.raises(ValueError):
        Density(g, np.zeros(64)).mean
