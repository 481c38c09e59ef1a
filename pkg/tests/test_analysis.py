import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circuitlab.analysis import (Series, collapse_quality, collapse_search, crossing_finder, gaussian_kernel_fit,
                                 linear_fit, mean_stderr, polynomial_fit, powerlaw_fit, profile_moments,
                                 series_from_samples)
from circuitlab.errors import ParameterError


@settings(max_examples=50, deadline=None)
@given(st.floats(-2, 2), st.floats(0.1, 10))
def test_powerlaw_fit_exact_data(k, a):
    x = np.array([1.0, 2, 4, 8, 16])
    f = powerlaw_fit(Series(x, a * x**k))
    assert f.exponent == pytest.approx(k, abs=1e-9)
    assert f.amplitude == pytest.approx(a, rel=1e-9)


def test_powerlaw_fit_window_and_errors():
    x = np.arange(1.0, 20)
    y = np.where(x < 5, 1.0, x**0.5)
    assert powerlaw_fit(Series(x, y), (5, 20)).exponent == pytest.approx(0.5)
    with pytest.raises(ParameterError):
        powerlaw_fit(Series([1.0, 2], [1.0, -1]))


def test_linear_and_polynomial_fits_against_lstsq(rng):
    x = np.linspace(0, 1, 30)
    y = 1 + 2 * x - 3 * x**2 + 0.01 * rng.standard_normal(30)
    coef, err = polynomial_fit(x, y, 2)
    ref = np.polynomial.polynomial.polyfit(x, y, 2)
    assert np.allclose(coef, ref, atol=1e-10)
    (b, m), _ = linear_fit(x, 3 * x + 1)
    assert (b, m) == pytest.approx((1, 3))


def test_mean_stderr_and_series():
    m, e = mean_stderr([[1.0, 2], [3, 4]])
    assert np.allclose(m, [2, 3]) and np.allclose(e, [1, 1])
    s = series_from_samples([0, 1], [[1, 1, 1], [0, 2]])
    assert list(s.y) == [1, 1] and list(s.n) == [3, 2] and s.yerr[0] == 0
    with pytest.raises(ParameterError):
        Series([1, 2], [1])


def test_crossing_of_straight_lines():
    p = np.linspace(0, 1, 11)
    curves = {L: (p - 0.43) * L for L in (8, 16, 32)}
    c = crossing_finder(p, curves)
    assert c.estimate == pytest.approx(0.43, abs=1e-12) and c.error == pytest.approx(0, abs=1e-12)
    with pytest.raises(ParameterError):
        crossing_finder(p, {8: p, 16: p + 1})


def test_collapse_recovers_scaling_form():
    p = np.linspace(0.1, 0.3, 21)
    curves = {L: np.tanh((p - 0.2) * L ** (1 / 1.3)) for L in (16, 32, 64)}
    # the residual at the true parameters is pure interpolation error
    assert collapse_quality(p, curves, 0.2, 1.3) < 1e-2 * collapse_quality(p, curves, 0.21, 1.0)
    pc, nu, q = collapse_search(p, curves, np.linspace(0.18, 0.22, 9), np.linspace(1.0, 1.6, 13))
    assert pc == pytest.approx(0.2, abs=0.0051) and nu == pytest.approx(1.3, abs=0.051)


def test_gaussian_fit_on_exact_kernel():
    x = np.arange(-200, 201)
    t = 100.0
    prof = np.exp(-(x - 3) ** 2 / (2 * 0.7 * 2 * t))
    g = gaussian_kernel_fit(x, prof, t)
    assert g.D == pytest.approx(0.7, rel=1e-6) and g.center == pytest.approx(3, abs=1e-6)
    mu, var = profile_moments(x, prof)
    assert mu == pytest.approx(3) and var == pytest.approx(140, rel=1e-6)
