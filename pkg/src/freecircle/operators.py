"""Fourier-diagonal operators on the circle and non-commutative derivative norms.

Every operator acts on the coefficients ``a_n`` of a :class:`FourierSeries`.
``E`` inverts the logarithmic kernel, ``N`` is its inverse on zero-mean
functions, ``L = N**2`` is the negative Laplacian and ``U``/``V`` are the
adjoint pair of shifts that intertwine them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .measures import FourierSeries, angle_grid, circle_derivative, default_grid, next_power_of_two


class OperatorKind(enum.Enum):
    E = "E"
    N = "N"
    M = "M"
    L = "L"
    U = "U"
    V = "V"

    @property
    def is_diagonal(self) -> bool:
        return self not in (OperatorKind.U, OperatorKind.V)

    def eigenvalue(self, n):
        """Multiplier of ``z^n`` for the diagonal kinds."""
        n = np.abs(np.asarray(n))
        if self is OperatorKind.E:
            return np.where(n == 0, 0.0, 1.0 / np.maximum(n, 1))
        if self is OperatorKind.N:
            return n.astype(float)
        if self is OperatorKind.M:
            # N - I on zero-mean functions, zero on constants
            return np.where(n == 0, 0.0, n - 1.0)
        if self is OperatorKind.L:
            return (n * n).astype(float)
        raise ValueError(f"{self.name} is a shift, not a diagonal operator")


def _shift_U(c: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(2 * (n + 1) + 1, dtype=complex)
    off = n + 1
    k = np.arange(-n, n + 1)
    pos, neg = k >= 1, k <= -1
    out[k[pos] + 1 + off] += c[pos]
    out[k[neg] - 1 + off] += c[neg]
    out[1 + off] += c[n]
    out[-1 + off] += c[n]
    return out


def _shift_V(c: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(2 * n + 1, dtype=complex)
    k = np.arange(-n, n + 1)
    pos, neg = k >= 1, k <= -1
    out[k[pos] - 1 + n] += c[pos]
    out[k[neg] + 1 + n] += c[neg]
    return out


def apply(kind, f: FourierSeries) -> FourierSeries:
    """Apply one of ``E, N, M, L, U, V`` to ``f``.

    ``U`` raises the bandwidth by one: ``z^n -> z^{n+1}`` for ``n >= 1``,
    ``1 -> z + 1/z`` and ``z^n -> z^{n-1}`` for ``n <= -1``.  ``V`` is its
    adjoint and kills constants.
    """
    kind = OperatorKind(kind) if not isinstance(kind, OperatorKind) else kind
    if kind.is_diagonal:
        return FourierSeries(f.coeffs * kind.eigenvalue(f.modes), f.real_valued)
    n = f.half_bandwidth
    if kind is OperatorKind.U:
        return FourierSeries(_shift_U(f.coeffs, n), f.real_valued)
    return FourierSeries(_shift_V(f.coeffs, n), f.real_valued)


def E(f):
    return apply(OperatorKind.E, f)


def N(f):
    return apply(OperatorKind.N, f)


def M(f):
    return apply(OperatorKind.M, f)


def L(f):
    return apply(OperatorKind.L, f)


def U(f):
    return apply(OperatorKind.U, f)


def V(f):
    return apply(OperatorKind.V, f)


def project_constants(f: FourierSeries) -> FourierSeries:
    """``Pi f = int f d alpha`` as a series of the same bandwidth."""
    c = np.zeros_like(f.coeffs)
    c[f.half_bandwidth] = f.coeffs[f.half_bandwidth]
    return FourierSeries(c, f.real_valued)


def quadratic_form(kind, phi: FourierSeries, psi: FourierSeries | None = None) -> complex:
    """``<K phi, psi>`` for a diagonal kind (``psi`` defaults to ``phi``)."""
    psi = phi if psi is None else psi
    return apply(kind, phi).inner(psi)


def kernel_form_N(phi: FourierSeries, psi: FourierSeries, grid: int | None = None) -> complex:
    """Double-integral form of ``<N phi, psi>``.

    Evaluates ``iint (phi(z)-phi(w)) conj(psi(z)-psi(w)) / |z-w|^2`` by the
    product trapezoid rule.  The integrand is written as the product of two
    difference quotients, whose diagonal value is ``phi'(z) conj(psi'(z))``.
    """
    n = max(phi.half_bandwidth, psi.half_bandwidth)
    m = grid or max(16, next_power_of_two(4 * n))
    x = angle_grid(m)
    z = np.exp(1j * x)
    fp = FourierSeries(phi.coeffs).on_grid(m)
    fs = FourierSeries(psi.coeffs).on_grid(m)
    dp = FourierSeries(circle_derivative(phi).coeffs).on_grid(m) / (1j * z)
    ds = FourierSeries(circle_derivative(psi).coeffs).on_grid(m) / (1j * z)
    total = 0.0j
    step = max(1, (1 << 22) // m)
    for i in range(0, m, step):
        zi = z[i:i + step, None]
        dz = zi - z[None, :]
        diag = dz == 0
        dz = np.where(diag, 1.0, dz)
        qp = np.where(diag, dp[None, :], (fp[i:i + step, None] - fp[None, :]) / dz)
        qs = np.where(diag, ds[None, :], (fs[i:i + step, None] - fs[None, :]) / dz)
        total += np.sum(qp * np.conj(qs))
    return complex(total / (m * m))


# ------------------------------------------------------------------ derivative norms


def _binom(n, k):
    return np.array([math.comb(int(a), k) if a >= 0 else 0 for a in np.atleast_1d(n)], dtype=float)


def dc_norm_sq(phi: FourierSeries, k: int) -> float:
    """``sum_{n != 0} |a_n|^2 C(|n|-1, k-1)``, the squared norm of the ``(k-1)``-th tensor derivative."""
    if int(k) != k or k < 1:
        raise ValueError(f"level k must be an integer >= 1, got {k!r}")
    modes = phi.modes
    mask = modes != 0
    w = _binom(np.abs(modes[mask]) - 1, int(k) - 1)
    return float(np.sum(np.abs(phi.coeffs[mask]) ** 2 * w))


@dataclass(frozen=True)
class TensorDerivativeNorms:
    """``norms[k] = ||d_c^{(k)} phi||^2`` for ``k = 0 .. degree-1``."""

    degree: int
    norms: np.ndarray

    @classmethod
    def of(cls, phi: FourierSeries) -> "TensorDerivativeNorms":
        d = phi.degree()
        return cls(d, np.array([dc_norm_sq(phi, k + 1) for k in range(max(d, 1))]))


def houdre_kagan_bounds(phi: FourierSeries, k: int) -> tuple[float, float]:
    """Alternating two-sided bounds on ``<N phi, phi>``.

    Uses the terms ``(-1)^{l-1}/l * dc_norm_sq(phi', l)``; the lower bound sums
    ``l = 1..2k`` and the upper bound ``l = 1..2k-1``.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"k must be an integer >= 1, got {k!r}")
    dphi = circle_derivative(phi)
    terms = [(-1) ** (l - 1) / l * dc_norm_sq(dphi, l) for l in range(1, 2 * int(k) + 1)]
    upper = float(np.sum(terms[:-1]))
    lower = upper + terms[-1]
    return lower, upper
