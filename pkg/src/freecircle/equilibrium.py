"""Weighted equilibrium measures on the circle.

For a smooth potential ``Q`` the minimizer of the logarithmic energy with
external field has density ``A - N Q`` against Haar measure whenever that
function is positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import (
    CircleMeasure,
    FourierSeries,
    Potential,
    angle_grid,
    circle_derivative,
    default_grid,
)
from .operators import N, kernel_form_N
from .reports import digest

NEGATIVE_SOLUTION_TOL = 1e-8
LOG2 = math.log(2.0)


class FullSupportError(ValueError):
    """``A - N Q`` becomes negative: the equilibrium measure does not charge the whole circle."""


class PreconditionError(ValueError):
    """A hypothesis of a check is not satisfied by the inputs."""


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    potential: Potential
    measure: CircleMeasure
    constant_C: float
    energy: float
    min_density: float
    mass: float = 1.0

    @property
    def density(self) -> FourierSeries:
        return self.measure.density


def solve_equilibrium(Q: Potential, A: float = 1.0, grid: int | None = None) -> EquilibriumResult:
    """Equilibrium measure ``(A - N Q) alpha`` with ``C = -int Q d alpha``.

    Raises
    ------
    FullSupportError
        If the density dips below ``-1e-8`` on the check grid.
    """
    s = Q.series
    dens = A - N(s)
    m = grid or default_grid(s.half_bandwidth)
    lo = dens.min_on_grid(m)
    if lo < -NEGATIVE_SOLUTION_TOL:
        raise FullSupportError(f"equilibrium density has minimum {lo:.4g} < 0; support is not the full circle")
    mu = CircleMeasure("density", dens, mass=A)
    c = 0.0 - Q.mean()
    energy = A * Q.mean() - 0.5 * N(s).inner(s).real
    return EquilibriumResult(Q, mu, c, float(energy), lo, A)


def equilibrium_energy(Q: Potential, A: float = 1.0) -> float:
    """``E_Q = A int Q d alpha - <N Q, Q>/2`` (requires full support)."""
    return solve_equilibrium(Q, A).energy


def log_potential(mu: CircleMeasure) -> FourierSeries:
    """``z -> int log|z - w| mu(dw)`` as the series ``-sum_{n != 0} a_n z^n / (2|n|)``."""
    if mu.is_dirac:
        raise ValueError("the logarithmic potential of a point mass is singular")
    d = mu.density
    modes = d.modes
    w = np.where(modes == 0, 0.0, -0.5 / np.maximum(np.abs(modes), 1))
    return FourierSeries(d.coeffs * w, d.real_valued)


def variational_residual(Q: Potential, mu: CircleMeasure, grid: int | None = None) -> float:
    """Sup over the grid of ``|2 int log|z-w| mu(dw) - Q(z) - C|`` with ``C = -int Q d alpha``."""
    m = grid or default_grid(max(Q.N, 0 if mu.is_dirac else mu.density.half_bandwidth))
    r = 2.0 * log_potential(mu) - Q.series + Q.mean()
    return float(np.max(np.abs(r.on_grid(m))))


def rotation_identity(Q: Potential, mu: CircleMeasure) -> float:
    """``int Q' d mu``; vanishes at the equilibrium measure."""
    return float(np.real(mu.integrate(circle_derivative(Q.series))))


def integral_formula_density(Q: Potential, A: float = 1.0, grid: int | None = None) -> np.ndarray:
    """Density from the integral representation, sampled on ``grid`` points.

    ``u(x) = A + int (V'(x) - V'(y)) cot((x - y)/2) alpha(dy)``, the real form of
    the kernel ``2 Im(z/w) / |z - w|^2``; the diagonal value is ``2 V''(x)``.
    Evaluated by the trapezoid rule, independent of the spectral solver.
    """
    m = grid or default_grid(Q.N)
    x = angle_grid(m)
    d1 = circle_derivative(Q.series).on_grid(m)
    d2 = circle_derivative(Q.series, 2).on_grid(m)
    out = np.empty(m)
    step = max(1, (1 << 22) // m)
    for i in range(0, m, step):
        delta = x[i:i + step, None] - x[None, :]
        diag = np.abs(np.sin(delta / 2)) < 1e-300
        cot = np.where(diag, 0.0, 1.0 / np.tan(np.where(diag, 1.0, delta / 2)))
        k = (d1[i:i + step, None] - d1[None, :]) * cot
        k = np.where(diag, 2.0 * d2[i:i + step, None], k)
        out[i:i + step] = k.mean(axis=1)
    return A + out


def integral_formula_density_complex(Q: Potential, A: float = 1.0, grid: int | None = None) -> np.ndarray:
    """Same density from the complex kernel ``i (z + w) / (z - w)``."""
    m = grid or default_grid(Q.N)
    z = np.exp(1j * angle_grid(m))
    d1 = circle_derivative(Q.series).on_grid(m)
    d2 = circle_derivative(Q.series, 2).on_grid(m)
    out = np.empty(m)
    step = max(1, (1 << 22) // m)
    for i in range(0, m, step):
        zi = z[i:i + step, None]
        diag = np.arange(i, min(i + step, m))[:, None] == np.arange(m)[None, :]
        dz = np.where(diag, 1.0, zi - z[None, :])
        k = 1j * (d1[i:i + step, None] - d1[None, :]) * (zi + z[None, :]) / dz
        k = np.where(diag, 2.0 * d2[i:i + step, None], k)
        out[i:i + step] = k.mean(axis=1).real
    return A + out


def pairing_residual(Q: Potential, phi: FourierSeries, A: float = 1.0, grid: int | None = None) -> float:
    """Defect of ``int phi d mu = A int phi d alpha - iint (Q(z)-Q(w))(phi(z)-phi(w))/|z-w|^2``."""
    res = solve_equilibrium(Q, A)
    lhs = res.measure.integrate(FourierSeries(phi.coeffs))
    rhs = A * phi.mean() - kernel_form_N(Q.series, phi.conj(), grid)
    return float(abs(lhs - rhs))


@dataclass
class PerturbationReport:
    t: float
    density_error: float
    residual: float
    residual_half: float
    ratio: float
    passed: bool


def _energy_closed(s: FourierSeries) -> float:
    return float(s.mean().real - 0.5 * N(s).inner(s).real)


def perturbation_check(Q: Potential, f: FourierSeries, g: FourierSeries, t: float,
                       min_ratio: float = 7.0, grid: int | None = None) -> PerturbationReport:
    """Check the second-order expansion of ``E_{Q + t f + t^2 g}``.

    The density is exactly linear in the potential.  The energy remainder
    ``E_{Q+tf+t^2g} - [E_Q + t int f d mu_Q + t^2 (int g d mu_Q - <Nf, f>/2)]``
    is evaluated at ``t`` and ``t/2``; its decay ratio must reach ``min_ratio``
    (cubic order gives 8) unless both remainders are already at rounding level.
    """
    base = solve_equilibrium(Q, grid=grid)
    f = FourierSeries(f.coeffs, True)
    g = FourierSeries(g.coeffs, True)
    nff = N(f).inner(f).real
    int_f = base.measure.integrate(f)
    int_g = base.measure.integrate(g)

    def remainder(tt):
        pert = solve_equilibrium(Q + (tt * f + tt * tt * g), grid=grid)
        expected = base.density - tt * N(f) - tt * tt * N(g)
        err = float(np.max(np.abs((pert.density - expected).coeffs)))
        approx = base.energy + tt * int_f + tt * tt * (int_g - 0.5 * nff)
        return pert.energy - approx, err

    r1, e1 = remainder(t)
    r2, e2 = remainder(t / 2)
    floor = 1e-13 * max(1.0, abs(base.energy))
    if abs(r1) <= floor and abs(r2) <= floor:
        ratio, ok = math.inf, True
    else:
        ratio = abs(r1) / abs(r2) if r2 != 0 else math.inf
        ok = ratio >= min_ratio
    return PerturbationReport(t, max(e1, e2), r1, r2, ratio, ok and max(e1, e2) <= 1e-12)


@dataclass
class DensityFloorReport:
    beta: float
    bound: float
    min_density: float
    passed: bool
    digest: str


def density_lower_bound_check(Q: Potential, beta: float, grid: int | None = None) -> DensityFloorReport:
    """If ``Q'' >= beta - 1/(2 log 2)`` then the equilibrium density is at least ``2 beta log 2``."""
    if Q.second_derivative_min < beta - 1.0 / (2.0 * LOG2) - 1e-12:
        raise PreconditionError(
            f"min Q'' = {Q.second_derivative_min:.6g} is below beta - 1/(2 log 2) = {beta - 1 / (2 * LOG2):.6g}")
    res = solve_equilibrium(Q, grid=grid)
    m = grid or max(1024, default_grid(Q.N))
    lo = res.density.min_on_grid(m)
    bound = 2.0 * beta * LOG2
    return DensityFloorReport(beta, bound, float(lo), bool(lo >= bound - 1e-8), digest(Q, beta))
