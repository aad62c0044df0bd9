import math

import numpy as np
import pytest
from hypothesis import given
from scipy.integrate import quad

from freecircle.equilibrium import solve_equilibrium
from freecircle.functionals import (
    HILBERT_SIGN,
    _pv_cot_oracle,
    energy,
    evaluate,
    fisher_information_IQ,
    hilbert_series,
    hilbert_transform,
    log_energy,
    log_energy_distance,
    potential_free_I,
    relative_entropy_H,
)
from freecircle.instances import random_measure, random_potential, rng_for
from freecircle.measures import CircleMeasure, FourierSeries, Potential, angle_grid, circle_derivative

from conftest import measures

MU_COS = CircleMeasure.from_terms({1: 0.5, -1: 0.5})  # (1 + cos x) alpha


def test_log_energy_against_double_integral():
    mu = CircleMeasure.from_terms({1: 0.2 - 0.1j, -1: 0.2 + 0.1j, 2: 0.1, -2: 0.1})
    dens = lambda x: float(np.real(mu.density(np.array([x]))[0]))
    # integrate over y - x in (-pi, pi) to put the singularity at a known point
    # -log|2 sin(d/2)| = -log d - log(2 sin(d/2) / d); the first part goes to QUADPACK's log weight
    sym = lambda d, x: dens(x + d) + dens(x - d)
    smooth = lambda d, x: -np.log(np.sinc(d / (2 * np.pi))) * sym(d, x)

    def inner(x):
        a = quad(sym, 0, np.pi, args=(x,), weight="alg-loga", wvar=(0, 0))[0]
        return -a + quad(smooth, 0, np.pi, args=(x,))[0]
    val = quad(lambda x: inner(x) * dens(x), 0, 2 * np.pi, limit=200)[0] / (4 * np.pi ** 2)
    assert log_energy(mu) == pytest.approx(val, abs=1e-9)


def test_first_harmonic_values():
    x = angle_grid(64)
    assert np.allclose(hilbert_transform(MU_COS, 64), np.sin(x), atol=1e-14)
    assert log_energy(MU_COS) == pytest.approx(0.25)
    assert fisher_information_IQ(Potential.zero(), MU_COS) == pytest.approx(0.5)


def test_hilbert_sign_calibrated():
    assert HILBERT_SIGN == -1


@pytest.mark.parametrize("x0", [0.4, 2.5, 5.9])
def test_hilbert_against_principal_value(x0):
    mu = random_measure(rng_for(11, "hil"), 5)
    spectral = np.real(hilbert_series(mu)(np.array([x0]))[0])
    assert spectral == pytest.approx(_pv_cot_oracle(mu.density, x0, 8192), abs=1e-10)


def test_equilibrium_zeroes_fisher():
    Q = random_potential(rng_for(2, "fi"), 6)
    res = solve_equilibrium(Q)
    assert abs(fisher_information_IQ(Q, res.measure)) <= 1e-13
    # H mu_Q = Q' on the support
    diff = hilbert_series(res.measure) - circle_derivative(Q.series)
    assert np.max(np.abs(diff.coeffs)) <= 1e-15


def test_fisher_against_grid_quadrature():
    Q = random_potential(rng_for(3, "fi"), 4)
    mu = random_measure(rng_for(3, "mu"), 4)
    m = 1024
    h = hilbert_transform(mu, m) - circle_derivative(Q.series).on_grid(m)
    w = mu.density.on_grid(m)
    mean = np.mean(circle_derivative(Q.series).on_grid(m) * w)
    assert fisher_information_IQ(Q, mu) == pytest.approx(np.mean(h * h * w) - mean ** 2, abs=1e-12)


@given(measures())
def test_energy_gap_equals_log_energy_distance(mu):
    Q = random_potential(rng_for(5, "gap"), 5)
    eq = solve_equilibrium(Q)
    gap = energy(Q, mu) - eq.energy
    assert gap == pytest.approx(log_energy_distance(mu, eq.measure), abs=1e-12)
    assert gap >= -1e-14
    assert fisher_information_IQ(Q, mu) >= -1e-12


@given(measures(), measures())
def test_potential_free_relations(mu, nu):
    h = relative_entropy_H(mu, nu)
    assert h == pytest.approx(2 * log_energy_distance(mu, nu))
    assert h <= potential_free_I(mu, nu) + 1e-12
    assert relative_entropy_H(nu, mu) == pytest.approx(h)


def test_first_harmonic_H_equals_I():
    nu = CircleMeasure.from_terms({1: 0.1j, -1: -0.1j})
    assert relative_entropy_H(MU_COS, nu) == pytest.approx(potential_free_I(MU_COS, nu), abs=1e-15)


def test_point_masses():
    d = CircleMeasure.dirac(0.3)
    assert math.isinf(log_energy(d))
    assert math.isinf(energy(Potential.zero(), d))
    assert math.isinf(relative_entropy_H(d, MU_COS))
    assert relative_entropy_H(d, d) == 0.0


def test_evaluate_tags():
    v = evaluate("PotentialFreeI", MU_COS, CircleMeasure.haar())
    assert v.name == "PotentialFreeI" and v.value == pytest.approx(0.5)
    assert len(v.inputs_digest) == 16
    with pytest.raises(ValueError):
        evaluate("Nope", MU_COS)
