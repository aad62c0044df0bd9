import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize_scalar

from freecircle.instances import bump_measure, random_measure, random_trig_poly, rng_for
from freecircle.measures import CircleMeasure, FourierSeries, UnsupportedMeasureError, lift, lifted_mean
from freecircle.transport import (
    CertificateRejectedError,
    admissible_pair,
    circle_wasserstein,
    find_matching_cut,
    hopf_lax,
    hopf_lax_expansion_residual,
    hopf_lax_pde_residual,
    interval_wasserstein,
    lifted_quantile_distance,
    modified_wasserstein,
    monotone_map,
    spectral_w1_certificate,
    w1_dual_certificate,
    w2_dual_certificate,
)

from conftest import measures

W2_DIRAC_HAAR = math.sqrt(2 * math.pi ** 3 / 3)
W2_FROZEN = 0.4698259633997413


def _pair(seed):
    r = rng_for(seed, "tr")
    return random_measure(r, 5), random_measure(r, 5)


def test_dirac_closed_forms():
    d, a = CircleMeasure.dirac(1.0), CircleMeasure.haar()
    assert modified_wasserstein(d, a, 2).value == pytest.approx(W2_DIRAC_HAAR, abs=1e-14)
    assert modified_wasserstein(a, d, 1).value == pytest.approx(math.pi ** 2, abs=1e-14)
    assert modified_wasserstein(d, d, 2).value == 0.0
    assert math.isinf(modified_wasserstein(d, CircleMeasure.dirac(2.0), 2).value)
    with pytest.raises(UnsupportedMeasureError):
        modified_wasserstein(d, CircleMeasure.from_terms({1: 0.2, -1: 0.2}), 2)
    assert circle_wasserstein(d, a, 2) == pytest.approx(math.sqrt(math.pi ** 2 / 3), abs=1e-14)


def test_dirac_branch_normalization():
    # the closed form integrates |x - a|^p against dx; concentrating bumps,
    # measured with the probability normalization, approach pi/sqrt(3) instead,
    # which is smaller by the factor (2 pi)^(1/2)
    a = CircleMeasure.haar()
    sq = [modified_wasserstein(bump_measure(k, 0.0, 256), a, 2).value ** 2 for k in (100.0, 400.0)]
    assert sq[1] > sq[0]
    # the deficit decays like kappa^(-1/2); one Richardson step removes it
    assert 2 * sq[1] - sq[0] == pytest.approx(math.pi ** 2 / 3, rel=3e-3)
    assert W2_DIRAC_HAAR / math.sqrt(2 * math.pi) == pytest.approx(math.pi / math.sqrt(3), rel=1e-14)


def test_matching_cut_equalizes_means():
    mu, nu = _pair(1)
    t = find_matching_cut(mu, nu)
    assert lifted_mean(mu, t) == pytest.approx(lifted_mean(nu, t), abs=1e-11)


@pytest.mark.parametrize("seed", range(4))
def test_modified_matches_quantile_oracle(seed):
    mu, nu = _pair(seed)
    for p in (1, 2, 3):
        assert modified_wasserstein(mu, nu, p).value == pytest.approx(lifted_quantile_distance(mu, nu, p), rel=1e-6)


def test_frozen_value():
    # frozen from lifted_quantile_distance with 2^16 levels
    mu = CircleMeasure.from_terms({1: 0.3 - 0.1j, -1: 0.3 + 0.1j, 2: 0.1, -2: 0.1})
    nu = CircleMeasure.from_terms({1: -0.2j, -1: 0.2j, 3: 0.05, -3: 0.05})
    assert modified_wasserstein(mu, nu, 2).value == pytest.approx(W2_FROZEN, rel=1e-8)


@pytest.mark.parametrize("seed", range(3))
def test_cut_pair_independence(seed):
    mu, nu = _pair(seed)
    t = find_matching_cut(mu, nu)
    ref = modified_wasserstein(mu, nu, 2).value
    for shift in (0.7, 1.9, 3.3, 5.0):
        u, v = admissible_pair(mu, nu, shift, t)
        assert lifted_mean(mu, u) == pytest.approx(lifted_mean(nu, v), abs=1e-10)
        assert interval_wasserstein(mu, u, nu, v, 2) == pytest.approx(ref, abs=1e-9)
        assert interval_wasserstein(mu, u, nu, v, 1) == pytest.approx(modified_wasserstein(mu, nu, 1).value, abs=1e-9)


def test_monotone_map_pushes_forward():
    mu, nu = _pair(7)
    t = find_matching_cut(mu, nu)
    mm = monotone_map(mu, t, nu, t, 1024)
    assert mm.is_monotone()
    assert mm.pushforward_error() <= 1e-12


@settings(max_examples=15)
@given(measures(), measures(), measures())
def test_triangle_inequality(a, b, c):
    ab = modified_wasserstein(a, b, 2).value
    bc = modified_wasserstein(b, c, 2).value
    ac = modified_wasserstein(a, c, 2).value
    assert ac <= ab + bc + 1e-8


@settings(max_examples=15)
@given(measures(), measures())
def test_symmetry_and_standard_below_modified(a, b):
    w = modified_wasserstein(a, b, 2).value
    assert modified_wasserstein(b, a, 2).value == pytest.approx(w, abs=1e-9)
    assert circle_wasserstein(a, b, 2) <= w + 1e-8


def _w1_circle_oracle(mu, nu, m=1 << 14):
    # W_1 on the circle = min_c int |F - G - c| dx / ... with F, G the cdfs on [0, 2pi)
    x = (np.arange(m) + 0.5) * 2 * np.pi / m
    d = lift(mu, 0.0).cdf_at(x) - lift(nu, 0.0).cdf_at(x)
    r = minimize_scalar(lambda c: np.mean(np.abs(d - c)), bounds=(-1, 1), method="bounded",
                        options={"xatol": 1e-12})
    return 2 * np.pi * r.fun


@pytest.mark.parametrize("seed", range(3))
def test_standard_w1_against_cdf_formula(seed):
    mu, nu = _pair(seed)
    assert circle_wasserstein(mu, nu, 1) == pytest.approx(_w1_circle_oracle(mu, nu), rel=1e-5)


def test_standard_equals_modified_against_haar():
    mu = random_measure(rng_for(2, "h"), 4)
    a = CircleMeasure.haar()
    assert circle_wasserstein(mu, a, 2) == pytest.approx(modified_wasserstein(mu, a, 2).value, abs=1e-6)


def test_invalid_p():
    mu, nu = _pair(0)
    with pytest.raises(ValueError):
        modified_wasserstein(mu, nu, 0.5)


# ------------------------------------------------------------------ Hopf-Lax


def _hopf_lax_oracle(f, lam, t, x0):
    ys = x0 + np.linspace(-4 * np.pi, 4 * np.pi, 400001)
    vals = np.real(f(ys)) + (x0 - ys) ** 2 / t + lam * (x0 - ys)
    k = int(np.argmin(vals))
    g = lambda y: float(np.real(f(np.array([y]))[0])) + (x0 - y) ** 2 / t + lam * (x0 - y)
    r = minimize_scalar(g, bounds=(ys[k - 2], ys[k + 2]), method="bounded", options={"xatol": 1e-13})
    return r.fun


@pytest.mark.parametrize("lam, t", [(0.0, 0.5), (0.3, 1.0), (-1.0, 2.0)])
def test_hopf_lax_against_brute_force(lam, t):
    f = random_trig_poly(rng_for(4, "hl"), 3, decay=1.0)
    g = hopf_lax(f, lam, t, 256)
    for j in (0, 37, 129, 200):
        assert g.values[j] == pytest.approx(_hopf_lax_oracle(f, lam, t, g.x[j]), abs=1e-10)


def test_hopf_lax_constant_and_ordering():
    c = FourierSeries.constant(0.7)
    assert np.allclose(hopf_lax(c, 0.0, 1.0, 128).values, 0.7)
    f = random_trig_poly(rng_for(5, "hl"), 4)
    g = hopf_lax(f, 0.2, 0.8, 256)
    assert np.all(g.values <= np.real(f(g.x)) + 1e-12)


def test_hopf_lax_pde_second_order():
    f = random_trig_poly(rng_for(6, "hl"), 3, decay=2.0) * 0.5
    r = [hopf_lax_pde_residual(f, 0.2, 0.5, m) for m in (128, 256, 512)]
    assert r[0] / r[1] > 3.0 and r[1] / r[2] > 3.0


def test_hopf_lax_expansion_cubic():
    f = random_trig_poly(rng_for(8, "hl"), 3, decay=2.0)
    r = [hopf_lax_expansion_residual(f, 0.1, t, 1024) for t in (0.1, 0.05, 0.025)]
    assert r[0] / r[1] > 6.0 and r[1] / r[2] > 6.0


def test_dual_certificates_are_lower_bounds():
    mu, nu = _pair(3)
    w1 = modified_wasserstein(mu, nu, 1).value
    val, g = spectral_w1_certificate(mu, nu)
    assert 0 < val <= w1 + 1e-12
    with pytest.raises(CertificateRejectedError):
        w1_dual_certificate(mu, nu, g * 2.0)
    w2 = modified_wasserstein(mu, nu, 2).value
    for s in (0.5, 1.0, 2.0):
        assert w2_dual_certificate(mu, nu, g * s) <= w2 ** 2 + 1e-10
