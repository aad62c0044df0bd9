import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from freecircle.measures import (
    CircleMeasure,
    FourierSeries,
    InvalidInputError,
    InvalidMeasureError,
    Potential,
    angle_grid,
    circle_derivative,
    default_grid,
    from_grid,
    lift,
    lifted_mean,
    load_measure,
    load_potential,
    quantile,
    series_to_json,
)

from conftest import complex_series, measures, real_series


def _direct(f, x):
    return sum(a * np.exp(1j * n * x) for n, a in zip(f.modes, f.coeffs))


@given(complex_series())
def test_evaluation_matches_direct_sum(f):
    x = np.linspace(-1, 7, 13)
    assert np.allclose(f(x), _direct(f, x), atol=1e-12)


@given(complex_series())
def test_grid_matches_pointwise(f):
    m = 64
    assert np.allclose(f.on_grid(m), f(angle_grid(m)), atol=1e-12)


@given(real_series())
def test_grid_roundtrip(f):
    g = from_grid(f.on_grid(32))
    assert np.allclose(g.padded(16).coeffs[16 - f.half_bandwidth:16 + f.half_bandwidth + 1], f.coeffs, atol=1e-12)


@given(complex_series(), complex_series())
def test_product_is_pointwise(f, g):
    x = np.linspace(0, 6, 9)
    assert np.allclose(f.product(g)(x), f(x) * g(x), atol=1e-10)


@given(complex_series())
def test_parseval(f):
    m = 64
    assert np.isclose(np.mean(np.abs(f.on_grid(m)) ** 2), f.norm_sq(), atol=1e-10)


def test_derivative_convention():
    f = FourierSeries.from_dict({2: 1.0})
    d = circle_derivative(f, 2)
    assert d.coeff(2) == pytest.approx(-4.0)
    x = 0.3
    assert np.real(circle_derivative(Potential.cosine(1.0).series)(np.array([x]))[0]) == pytest.approx(-np.sin(x))


def test_from_function_cosine():
    f = FourierSeries.from_function(np.cos, 4)
    assert f.coeff(1) == pytest.approx(0.5)
    assert f.coeff(-1) == pytest.approx(0.5)
    assert abs(f.coeff(0)) < 1e-15


def test_default_grid_rule():
    assert default_grid(512) == 4096
    assert default_grid(3) == 256
    assert default_grid(100) == 512


def test_measure_validation():
    with pytest.raises(InvalidMeasureError):
        CircleMeasure.from_density(FourierSeries.from_dict({0: 1.0, 1: 0.8, -1: 0.8}))
    with pytest.raises(InvalidMeasureError):
        CircleMeasure("density", FourierSeries.constant(2.0))
    with pytest.raises(InvalidMeasureError):
        CircleMeasure.from_samples(np.array([1.0, -0.2, 1.0, 1.0]))
    mu = CircleMeasure.from_samples(np.array([2.0, -1e-13, 1.0, 1.0]))
    assert mu.density.mean().real == pytest.approx(1.0)


def test_integrate_against_quadrature():
    mu = CircleMeasure.from_terms({1: 0.3 - 0.1j, -1: 0.3 + 0.1j, 2: 0.05, -2: 0.05})
    f = Potential.from_terms({1: 0.2j, -1: -0.2j, 3: 0.1, -3: 0.1}).series
    val = quad(lambda x: np.real(f(np.array([x]))[0] * mu.density(np.array([x]))[0]), 0, 2 * np.pi,
               epsabs=1e-13)[0] / (2 * np.pi)
    assert np.real(mu.integrate(f)) == pytest.approx(val, abs=1e-12)


def test_moment_convention():
    mu = CircleMeasure.from_terms({1: 0.25, -1: 0.25})
    val = quad(lambda x: np.cos(x) * (1 + 0.5 * np.cos(x)), 0, 2 * np.pi)[0] / (2 * np.pi)
    assert mu.moment(1).real == pytest.approx(val)
    assert mu.moment(0) == pytest.approx(1.0)


@given(measures(), st.floats(-3, 3))
def test_lift_cdf_and_mean(mu, u):
    lm = lift(mu, u)
    assert lm.cdf_at(np.array([u]))[0] == pytest.approx(0.0, abs=1e-12)
    assert lm.cdf_at(np.array([u + 2 * np.pi]))[0] == pytest.approx(1.0, abs=1e-12)
    assert lifted_mean(mu, u) == pytest.approx(lm.mean_from_cdf(), abs=1e-9)


@given(measures(), st.floats(-3, 3))
def test_quantile_inverts_cdf(mu, u):
    lm = lift(mu, u)
    s = np.linspace(0.01, 0.99, 17)
    x = quantile(lm, s)
    assert np.all(np.diff(x) > 0)
    assert np.allclose(lm.cdf_at(x), s, atol=1e-12)


def test_lifted_mean_haar():
    assert lifted_mean(CircleMeasure.haar(), 0.5) == pytest.approx(0.5 + np.pi)


def test_json_roundtrip(tmp_path):
    q = Potential.from_terms({1: 0.2 + 0.1j, -1: 0.2 - 0.1j, 0: 0.3})
    p = tmp_path / "q.json"
    p.write_text(json.dumps(series_to_json(q.series)))
    assert np.allclose(load_potential(p).series.coeffs, q.series.coeffs)
    p.write_text(json.dumps({"kind": "dirac", "angle": 1.5}))
    assert load_measure(p).is_dirac


@pytest.mark.parametrize("obj, field", [
    ({"kind": "fourier"}, "coeffs"),
    ({"kind": "fourier", "coeffs": [[1, 2]]}, "coeffs[0]"),
    ({"kind": "grid", "samples": [1, 2, 3]}, "samples"),
    ({"kind": "spline"}, "kind"),
    ({"kind": "dirac"}, "angle"),
])
def test_json_errors_name_field(tmp_path, obj, field):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(obj))
    with pytest.raises(InvalidInputError, match=field.replace("[", r"\[").replace("]", r"\]")):
        load_measure(p)


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(InvalidInputError, match="malformed"):
        load_potential(p)
