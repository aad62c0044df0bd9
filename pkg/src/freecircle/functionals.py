"""Logarithmic energy, free Fisher information and their potential-free analogues.

All logarithmic integrals are evaluated from the expansion
``log|z - w| = -sum_{n>=1} Re(z^n conj(w)^n) / n``; only the test oracles use
direct quadrature of the kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measures import (
    CircleMeasure,
    FourierSeries,
    Potential,
    UnsupportedMeasureError,
    angle_grid,
    circle_derivative,
)
from .operators import E
from .reports import digest


@dataclass(frozen=True)
class FunctionalValue:
    name: str
    value: float
    inputs_digest: str


def _moments_sq_sum(d: FourierSeries) -> float:
    """``sum_{n>=1} |a_n|^2 / n`` over the negative half (``m_n = a_{-n}``)."""
    n = d.half_bandwidth
    if n == 0:
        return 0.0
    k = np.arange(1, n + 1)
    return float(np.sum(np.abs(d.coeffs[n - k]) ** 2 / k))


def log_energy(mu: CircleMeasure) -> float:
    """``-iint log|z - w| mu(dz) mu(dw) = sum_{n>=1} |m_n|^2 / n`` (``+inf`` for a point mass)."""
    if mu.is_dirac:
        return math.inf
    return _moments_sq_sum(mu.density)


def energy(Q: Potential, mu: CircleMeasure) -> float:
    """Logarithmic energy with external field, ``int Q d mu + sum_{n>=1} |m_n|^2 / n``."""
    if mu.is_dirac:
        return math.inf
    return float(np.real(mu.integrate(Q.series))) + log_energy(mu)


# ------------------------------------------------------------------ Hilbert transform


def _pv_cot_oracle(density: FourierSeries, x0: float, m: int = 4096) -> float:
    """``p.v. int cot((x0 - y)/2) density(y) dy / 2pi`` by direct quadrature.

    The grid is symmetric about ``x0`` and the node ``y = x0`` is excluded, so
    the odd singular part cancels in pairs.  Subtracting ``density(x0)`` leaves
    a smooth integrand whose diagonal value is ``-2 density'(x0)``.
    """
    y = angle_grid(m, x0)[1:]
    f0 = float(np.real(density(np.array([x0]))[0]))
    d0 = float(np.real(circle_derivative(density)(np.array([x0]))[0]))
    body = np.sum((np.real(density(y)) - f0) / np.tan((x0 - y) / 2.0))
    return float((body - 2.0 * d0) / m)


def _calibrate_sign() -> int:
    d = FourierSeries.from_dict({0: 1.0, 1: 0.5, -1: 0.5})
    spectral = circle_derivative(E(d))(np.array([0.7]))[0]
    oracle = _pv_cot_oracle(d, 0.7)
    return 1 if abs(spectral - oracle) < abs(spectral + oracle) else -1


# sign s in H mu = s (E phi)', fixed once against the principal-value quadrature
HILBERT_SIGN = _calibrate_sign()


def hilbert_series(mu: CircleMeasure) -> FourierSeries:
    """``H mu = s (E phi)'`` for ``mu = phi alpha``, with ``s = HILBERT_SIGN``."""
    if mu.is_dirac:
        raise UnsupportedMeasureError("Hilbert transform of a point mass is singular")
    return HILBERT_SIGN * circle_derivative(E(mu.density))


def hilbert_transform(mu: CircleMeasure, grid: int = 2048) -> np.ndarray:
    """``H mu(x) = p.v. int cot((x - y)/2) mu(dy)`` sampled on ``grid`` points of ``[0, 2pi)``."""
    return hilbert_series(mu).on_grid(grid)


def fisher_information_IQ(Q: Potential, mu: CircleMeasure) -> float:
    """``int (H mu - Q')^2 d mu - (int Q' d mu)^2``, evaluated exactly in Fourier space."""
    if mu.is_dirac:
        return math.inf
    dq = circle_derivative(Q.series)
    h = hilbert_series(mu) - dq
    first = float(np.real(mu.integrate(h.product(h))))
    second = float(np.real(mu.integrate(dq))) ** 2
    return first - second


# ------------------------------------------------------------------ potential-free versions


def relative_entropy_H(mu: CircleMeasure, nu: CircleMeasure) -> float:
    """``<E phi, phi>`` for ``mu - nu = phi alpha``, i.e. ``2 sum_{n>=1} |m_n(mu) - m_n(nu)|^2 / n``.

    This equals twice ``-iint log|z-w| d(mu-nu) d(mu-nu)``; see
    :func:`log_energy_distance` for the undoubled quantity.
    """
    if mu.is_dirac or nu.is_dirac:
        if mu.is_dirac and nu.is_dirac and abs(mu.atom_angle - nu.atom_angle) == 0:
            return 0.0
        return math.inf
    phi = mu.density - nu.density
    return float(E(phi).inner(phi).real)


def log_energy_distance(mu: CircleMeasure, nu: CircleMeasure) -> float:
    """``-iint log|z - w| d(mu - nu) d(mu - nu) = sum_{n>=1} |m_n(mu) - m_n(nu)|^2 / n``."""
    return 0.5 * relative_entropy_H(mu, nu)


def potential_free_I(mu: CircleMeasure, nu: CircleMeasure) -> float:
    """``int (d mu/d alpha - d nu/d alpha)^2 d alpha`` (``+inf`` without L^2 densities)."""
    if mu.is_dirac or nu.is_dirac:
        if mu.is_dirac and nu.is_dirac and abs(mu.atom_angle - nu.atom_angle) == 0:
            return 0.0
        return math.inf
    return (mu.density - nu.density).norm_sq()


def evaluate(name: str, *args) -> FunctionalValue:
    """Tagged evaluation used by the command line."""
    table = {
        "Energy": energy,
        "RelEntropyH": relative_entropy_H,
        "FisherIQ": fisher_information_IQ,
        "PotentialFreeI": potential_free_I,
    }
    if name not in table:
        raise ValueError(f"unknown functional {name!r}")
    return FunctionalValue(name, float(table[name](*args)), digest(*args))
