"""Reproducible random potentials, measures and test functions."""

from __future__ import annotations

import numpy as np

from .measures import CircleMeasure, FourierSeries, Potential, circle_derivative
from .operators import N


def rng_for(seed: int, *keys) -> np.random.Generator:
    """Independent stream per ``(seed, keys...)``; keys are small ints or strings."""
    ints = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for k in keys:
        ints.append(k if isinstance(k, int) else int.from_bytes(str(k).encode()[:8].ljust(8, b"\0"), "little"))
    return np.random.default_rng(ints)


def _hermitian(c: np.ndarray, const: complex = 0.0) -> FourierSeries:
    n = c.size
    full = np.concatenate([np.conj(c[::-1]), [const], c])
    return FourierSeries(full, real_valued=True)


def random_trig_poly(rng, degree: int, decay: float = 0.0, real: bool = True) -> FourierSeries:
    """Trigonometric polynomial with Gaussian coefficients scaled by ``|n|^-decay``."""
    k = np.arange(1, degree + 1)
    if real:
        c = (rng.normal(size=degree) + 1j * rng.normal(size=degree)) / k ** decay
        return _hermitian(c, rng.normal())
    c = rng.normal(size=2 * degree + 1) + 1j * rng.normal(size=2 * degree + 1)
    w = np.abs(np.arange(-degree, degree + 1)).clip(1) ** decay
    return FourierSeries(c / w)


def random_potential(rng, degree: int = 6, sigma: float = 1.0, rho: float | None = None,
                     floor: float = 0.05) -> Potential:
    """Potential with ``Normal(0, sigma/n^3)`` coefficients, scaled so that the
    equilibrium density stays above ``floor`` and, when ``rho`` is given,
    ``Q'' >= rho - 1/2``."""
    k = np.arange(1, degree + 1)
    c = sigma * (rng.normal(size=degree) + 1j * rng.normal(size=degree)) / k ** 3
    base = _hermitian(c)
    nq = N(base)
    limits = []
    top = max(float(np.max(nq.on_grid(256))), 1e-300)
    limits.append((1.0 - floor) / top)
    if rho is not None:
        d2 = circle_derivative(base, 2).min_on_grid()
        if d2 < 0:
            limits.append((0.5 - rho) / -d2 if rho < 0.5 else 0.0)
    scale = rng.uniform(0.2, 1.0) * min(limits)
    return Potential(base * scale + rng.normal(scale=0.5))


def random_measure(rng, degree: int = 8, sigma: float = 1.0, floor: float = 0.05) -> CircleMeasure:
    """Density ``1 + s p`` with ``p`` having ``Normal(0, sigma/n^2)`` coefficients.

    The perturbation is scaled (not clipped) so that the density stays above
    ``floor``.
    """
    k = np.arange(1, degree + 1)
    c = sigma * (rng.normal(size=degree) + 1j * rng.normal(size=degree)) / k ** 2
    p = _hermitian(c)
    lo = -p.min_on_grid(max(64, 8 * degree))
    smax = (1.0 - floor) / lo if lo > 0 else 1.0
    s = rng.uniform(0.2, 1.0) * smax
    return CircleMeasure.from_density(1.0 + p * s)


def harmonic_measure(eps: float, n: int, phase: float = 0.0) -> CircleMeasure:
    """``(1 + eps cos(n x - phase)) alpha``."""
    return CircleMeasure.from_terms({n: 0.5 * eps * np.exp(-1j * phase), -n: 0.5 * eps * np.exp(1j * phase)})


def bump_measure(kappa: float, center: float = 0.0, bandwidth: int = 64) -> CircleMeasure:
    """Truncated von Mises density ``exp(kappa cos(x - center))``, renormalized."""
    s = FourierSeries.from_function(lambda x: np.exp(kappa * (np.cos(x - center) - 1.0)), bandwidth)
    s = FourierSeries(s.coeffs, True)
    return CircleMeasure.from_density(s / s.mean().real)


FAMILIES = ("harmonic-perturbations", "random-smooth", "bump-like")


def family_measure(family: str, rng, index: int = 0) -> tuple[CircleMeasure, dict]:
    """One draw from a named test family, with its parameters as metadata."""
    if family == "harmonic-perturbations":
        n = 1 + index % 8
        eps = float(rng.uniform(0.05, 0.9))
        phase = float(rng.uniform(0, 2 * np.pi))
        return harmonic_measure(eps, n, phase), {"n": n, "eps": eps, "phase": phase}
    if family == "bump-like":
        kappa = float(rng.uniform(0.1, 4.0))
        center = float(rng.uniform(0, 2 * np.pi))
        return bump_measure(kappa, center), {"kappa": kappa, "center": center}
    if family == "random-smooth":
        degree = int(rng.integers(1, 9))
        return random_measure(rng, degree=degree), {"degree": degree}
    raise ValueError(f"unknown family {family!r}")
