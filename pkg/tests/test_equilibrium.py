import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from freecircle.equilibrium import (
    FullSupportError,
    PreconditionError,
    density_lower_bound_check,
    integral_formula_density,
    integral_formula_density_complex,
    log_potential,
    pairing_residual,
    perturbation_check,
    rotation_identity,
    solve_equilibrium,
    variational_residual,
)
from freecircle.functionals import energy
from freecircle.instances import random_potential, random_trig_poly, rng_for
from freecircle.measures import Potential, angle_grid
from freecircle.operators import N


def test_zero_potential():
    res = solve_equilibrium(Potential.zero())
    assert res.measure.is_haar
    assert res.constant_C == 0.0 and res.energy == 0.0


@pytest.mark.parametrize("c", [0.1, 0.25, -0.3])
def test_cosine_closed_form(c):
    res = solve_equilibrium(Potential.cosine(2 * c))
    x = angle_grid(512)
    assert np.max(np.abs(res.density.on_grid(512) - (1 - 2 * c * np.cos(x)))) <= 1e-14
    assert res.energy == pytest.approx(-c * c, abs=1e-15)


def test_mass_scaling():
    Q = Potential.cosine(0.2)
    res = solve_equilibrium(Q, A=2.0)
    assert res.density.mean().real == pytest.approx(2.0)


def test_full_support_failure():
    with pytest.raises(FullSupportError):
        solve_equilibrium(Potential.cosine(1.5))


def test_log_potential_against_quadrature():
    Q = Potential.from_terms({1: 0.1 + 0.05j, -1: 0.1 - 0.05j, 3: 0.02, -3: 0.02})
    mu = solve_equilibrium(Q).measure
    lp = log_potential(mu)
    for x0 in (0.3, 2.0, 4.4):
        f = lambda y: np.log(abs(2 * np.sin((x0 - y) / 2))) * np.real(mu.density(np.array([y]))[0])
        val = quad(f, x0 - np.pi, x0 + np.pi, points=[x0], limit=200)[0] / (2 * np.pi)
        assert np.real(lp(np.array([x0]))[0]) == pytest.approx(val, abs=1e-10)


@given(st.integers(0, 10 ** 6))
def test_random_potentials_variational(seed):
    Q = random_potential(rng_for(seed, "eq"), degree=6)
    res = solve_equilibrium(Q)
    assert variational_residual(Q, res.measure) <= 1e-12
    assert abs(rotation_identity(Q, res.measure)) <= 1e-12
    assert energy(Q, res.measure) == pytest.approx(res.energy, abs=1e-12)


def test_integral_formulas_match_solver():
    Q = random_potential(rng_for(3, "eq"), degree=5)
    res = solve_equilibrium(Q)
    m = 256
    spectral = res.density.on_grid(m)
    assert np.max(np.abs(integral_formula_density(Q, grid=m) - spectral)) <= 1e-12
    assert np.max(np.abs(integral_formula_density_complex(Q, grid=m) - spectral)) <= 1e-12


def test_pairing_identity():
    Q = random_potential(rng_for(5, "eq"), degree=4)
    phi = random_trig_poly(rng_for(5, "phi"), 5, real=False)
    assert pairing_residual(Q, phi) <= 1e-12


def test_energy_minimality():
    # any other admissible measure has larger energy
    Q = Potential.cosine(0.3)
    base = solve_equilibrium(Q)
    other = solve_equilibrium(Potential.cosine(0.25)).measure
    assert energy(Q, other) > base.energy


def test_perturbation_expansion_cubic():
    Q = random_potential(rng_for(1, "eq"), degree=4)
    f = random_trig_poly(rng_for(1, "f"), 3, decay=3.0) * 0.05
    g = random_trig_poly(rng_for(1, "g"), 3, decay=3.0) * 0.05
    rep = perturbation_check(Q, f, g, 0.01)
    assert rep.passed
    assert 7.0 < rep.ratio < 9.0
    # the energy is quadratic in the potential, so the remainder is exactly
    # -t^3 <Nf, g> - t^4 <Ng, g> / 2
    t = 0.2
    rep = perturbation_check(Q, f, g, t)
    exact = -t ** 3 * N(f).inner(g).real - 0.5 * t ** 4 * N(g).inner(g).real
    assert rep.residual == pytest.approx(exact, rel=1e-9)


def test_density_floor():
    beta = 0.3
    Q = Potential.cosine(0.1)
    rep = density_lower_bound_check(Q, beta)
    assert rep.passed and rep.min_density >= rep.bound
    with pytest.raises(PreconditionError):
        density_lower_bound_check(Potential.cosine(1.0), 0.7)


def test_result_types_are_plain():
    rep = density_lower_bound_check(Potential.cosine(0.1), 0.2)
    assert type(rep.passed) is bool and type(rep.min_density) is float
