import math

import numpy as np
import pytest

from logdisp.grid import Density, Grid1D
from logdisp.lognls import WaveField, wkb_gaussian
from logdisp.wigner import (
    gaussian_smooth,
    gaussian_test_family,
    husimi_moments,
    husimi_transform,
    monokinetic_gap,
    wigner_at,
    wigner_transform,
)

G = Grid1D(16.0, 512)


def boosted_gaussian(eps, p0):
    return wkb_gaussian(G, eps, p0=p0)


@pytest.mark.parametrize("eps", [1.0, 0.5, 0.25])
def test_wigner_of_boosted_gaussian_closed_form(eps):
    p0 = 0.4
    W = wigner_transform(boosted_gaussian(eps, p0))
    X, XI = np.meshgrid(G.x, W.xi, indexing="ij")
    exact = np.exp(-(X**2) - (XI - p0) ** 2 / eps**2) / (math.sqrt(math.pi) * eps)
    assert np.max(np.abs(W.values - exact)) < 1e-10 * exact.max()
    assert W.flavor == "wigner"


def test_wigner_matches_direct_quadrature():
    state = WaveField(G, 0.5, wkb_gaussian(G, 0.5, p0=0.3).u * (1 + 0.3 * np.sin(G.x)))
    W = wigner_transform(state)
    i = 256 + 7
    direct = wigner_at(state, G.x[i], W.xi)
    assert np.max(np.abs(direct - W.values[i])) < 1e-9 * np.abs(W.values).max()


def test_marginals_and_mass():
    state = boosted_gaussian(0.5, 0.2)
    W = wigner_transform(state)
    assert np.max(np.abs(W.xi_marginal() - np.abs(state.u) ** 2)) < 1e-12
    assert W.integrate() == pytest.approx(state.mass_sq, rel=1e-12)


def test_husimi_nonnegative_where_wigner_is_not():
    eps = 0.5
    cat = WaveField(G, eps, np.exp(-((G.x - 2) ** 2) / 2) + np.exp(-((G.x + 2) ** 2) / 2))
    W = wigner_transform(cat)
    H = husimi_transform(W)
    assert W.values.min() < -0.1 * W.values.max()
    assert H.values.min() >= -1e-12 * H.values.max()
    assert H.integrate() == pytest.approx(W.integrate(), rel=1e-12)


def test_husimi_moment_identities():
    eps = 0.5
    state = WaveField(G, eps, wkb_gaussian(G, eps, omega0=0.3, p0=0.5).u * (1 + 0.2 * np.cos(G.x)))
    checks = husimi_moments(husimi_transform(wigner_transform(state)), state)
    assert set(checks) >= {"mass", "xi_marginal", "xi_first", "xi_second", "x_second"}
    assert max(c.discrepancy for c in checks.values()) < 1e-8


def test_husimi_requires_wigner_input():
    H = husimi_transform(wigner_transform(boosted_gaussian(0.5, 0.0)))
    with pytest.raises(ValueError):
        husimi_transform(H)
    with pytest.raises(ValueError):
        husimi_moments(wigner_transform(boosted_gaussian(0.5, 0.0)), boosted_gaussian(0.5, 0.0))


def test_alias_guard():
    wide = WaveField(G, 0.5, np.exp(-(G.x**2) / 40))
    with pytest.raises(ValueError, match="autocorrelation"):
        wigner_transform(wide)
    with pytest.raises(ValueError):
        wigner_transform(boosted_gaussian(0.5, 0.0), shift_half_range=40.0)


def test_gaussian_smooth_preserves_mass():
    rho = np.exp(-((G.x - 1) ** 2))
    sm = gaussian_smooth(rho, G, 0.5)
    assert sm.sum() == pytest.approx(rho.sum(), rel=1e-13)
    assert sm.max() < rho.max()


def test_monokinetic_gap_shrinks_with_eps():
    rho = Density(G, np.exp(-(G.x**2)))
    vel = np.full(G.n_points, 0.4)
    fam = gaussian_test_family()
    gaps = [monokinetic_gap(wigner_transform(boosted_gaussian(e, 0.4)), rho, vel, fam) for e in (1.0, 0.5, 0.25)]
    assert gaps[0] > gaps[1] > gaps[2]
    # the only eps dependence of this W is the xi-width, so the gap is O(eps^2)
    assert gaps[1] / gaps[2] == pytest.approx(4.0, rel=0.1)
    with pytest.raises(ValueError):
        monokinetic_gap(wigner_transform(boosted_gaussian(0.5, 0.4)), rho, vel, [])
