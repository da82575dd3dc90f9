import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize
from scipy.special import ndtr

from logdisp.grid import Density, Grid1D, gaussian_density, gaussian_sq, quadrature
from logdisp.metrics import (
    abs_integral,
    csiszar_kullback_gap,
    gaussian_w2,
    interp_constant,
    interpolation_check,
    neg_sobolev_norm,
    neg_sobolev_w11,
    transport_cost,
    wasserstein_1d,
)

G = Grid1D(16.0, 512)
X = G.x


def test_abs_integral_of_sine_packet():
    # int |sin(3x)| e^{-x^2} has no closed form; compare to adaptive quadrature
    f = np.sin(3 * X) * np.exp(-(X**2))
    ref, _ = integrate.quad(lambda x: abs(math.sin(3 * x)) * math.exp(-x * x), -16, 16, points=[k * math.pi / 3 for k in range(-15, 16)], limit=400)
    assert abs_integral(f, G) == pytest.approx(ref, rel=1e-11)
    assert abs_integral(np.zeros(G.n_points), G) == 0.0
    assert abs_integral(gaussian_sq(X), G) == pytest.approx(math.sqrt(math.pi), rel=1e-13)


@pytest.mark.parametrize("m1, v1, m2, v2", [(0.0, 1.0, 1.0, 1.0), (0.5, 0.3, -0.4, 0.8), (0.0, 0.2, 0.0, 1.5)])
def test_w2_matches_gaussian_closed_form(m1, v1, m2, v2):
    a, b = gaussian_density(G, m1, v1), gaussian_density(G, m2, v2)
    exact = gaussian_w2(m1, v1, m2, v2)
    # quantiles are cut at 1e-9 and 1 - 1e-9; the lost tails cost about 1e-7
    assert wasserstein_1d(2, a, b) == pytest.approx(exact, rel=1e-6)
    assert transport_cost(2, a, b) == pytest.approx(exact, rel=1e-6)


def test_w1_against_analytic_cdf_gap():
    a, b = gaussian_density(G, -0.3, 0.5), gaussian_density(G, 0.6, 1.2)

    def gap(x):
        return abs(ndtr((x + 0.3) / math.sqrt(0.5)) - ndtr((x - 0.6) / math.sqrt(1.2)))

    cross = optimize.brentq(lambda x: ndtr((x + 0.3) / math.sqrt(0.5)) - ndtr((x - 0.6) / math.sqrt(1.2)), -4, 0)
    ref = sum(integrate.quad(gap, lo, hi, epsabs=1e-15, limit=400)[0] for lo, hi in ((-16, cross), (cross, 16)))
    assert wasserstein_1d(1, a, b) == pytest.approx(ref, abs=1e-12)


@given(m1=st.floats(-2, 2), m2=st.floats(-2, 2), m3=st.floats(-2, 2), v=st.floats(0.2, 1.5))
@settings(max_examples=15, deadline=None)
def test_w1_metric_properties(m1, m2, m3, v):
    a, b, c = (gaussian_density(G, m, v) for m in (m1, m2, m3))
    ab, bc, ac = wasserstein_1d(1, a, b), wasserstein_1d(1, b, c), wasserstein_1d(1, a, c)
    assert ab == pytest.approx(abs(m1 - m2), abs=1e-10)
    assert ab == pytest.approx(wasserstein_1d(1, b, a), abs=1e-14)
    assert ac <= ab + bc + 1e-12


def test_wasserstein_validation():
    a = gaussian_density(G, 0.0, 1.0)
    with pytest.raises(ValueError):
        wasserstein_1d(0.5, a, a)
    with pytest.raises(ValueError):
        wasserstein_1d(1, a, gaussian_density(Grid1D(8.0, 256), 0.0, 1.0))


def test_csiszar_kullback():
    rho = Density(G, math.sqrt(math.pi) * gaussian_density(G, 0.4, 0.7).values)
    ck = csiszar_kullback_gap(rho)
    assert ck.holds and ck.relative_entropy > ck.l1_bound > 0
    same = csiszar_kullback_gap(Density(G, gaussian_sq(X)))
    assert abs(same.relative_entropy) < 1e-13 and same.l1_bound < 1e-26
    with pytest.raises(ValueError):
        csiszar_kullback_gap(gaussian_density(G, 0.0, 0.5))


def test_csiszar_kullback_custom_reference():
    ref = gaussian_density(G, 0.0, 1.0).values
    ck = csiszar_kullback_gap(gaussian_density(G, 1.0, 1.0), ref)
    # KL(N(1,1) || N(0,1)) = 1/2
    assert ck.relative_entropy == pytest.approx(0.5, rel=1e-10)
    assert ck.holds


def test_negative_sobolev_norms():
    f = gaussian_sq(X - 1) - gaussian_sq(X + 1)
    # the primitive is a sum of erf bumps; its L^1 norm equals W1 of the masses times sqrt(pi)
    w1 = wasserstein_1d(1, Density(G, gaussian_sq(X - 1)), Density(G, gaussian_sq(X + 1)))
    assert neg_sobolev_w11(f, G) == pytest.approx(math.sqrt(math.pi) * w1, rel=1e-12)
    assert neg_sobolev_norm(f, G, 0) == pytest.approx(abs_integral(f, G), rel=1e-15)
    with pytest.raises(ValueError, match="zero mean"):
        neg_sobolev_w11(gaussian_sq(X), G)
    with pytest.raises(ValueError):
        neg_sobolev_norm(f, G, -1)


def test_interp_constant_limits_and_validation():
    for d in (0.1, 0.5, 0.9):
        assert interp_constant(d) > 0
    with pytest.raises(ValueError):
        interp_constant(0.0)
    with pytest.raises(ValueError):
        interp_constant(1.0)


@pytest.mark.parametrize("delta", [0.25, 0.5, 0.75])
def test_interpolation_dual_below_bound(delta):
    f = gaussian_sq(X - 0.5) - gaussian_sq(X + 0.5)
    dual, bound = interpolation_check(f, G, delta)
    assert 0 < dual <= bound
