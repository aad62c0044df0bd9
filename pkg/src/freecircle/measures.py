"""Fourier representation of functions, potentials and measures on the unit circle.

Conventions
-----------
A point of the circle is ``z = exp(i x)``.  A function is stored through its
coefficients ``a_n = \\int f(w) w^{-n} alpha(dw)`` for ``-N <= n <= N`` so that
``f(e^{ix}) = sum_n a_n e^{inx}``.  ``alpha`` is the normalized Haar measure and
every density below is taken with respect to it (``a_0 = 1`` for probabilities).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

TWO_PI = 2.0 * np.pi
DEFAULT_BANDWIDTH = 512
NEGATIVE_DENSITY_TOL = 1e-10
REAL_SYMMETRY_TOL = 1e-12

_EVAL_CHUNK = 1 << 21


class InvalidInputError(ValueError):
    """Rejected input (non-finite samples, bad grid size, malformed file)."""


class InvalidMeasureError(ValueError):
    """A density that is negative beyond tolerance or does not have unit mass."""


class UnsupportedMeasureError(ValueError):
    """The operation is not defined for this kind of measure (e.g. atoms)."""


def is_power_of_two(m: int) -> bool:
    return m > 0 and (m & (m - 1)) == 0


def next_power_of_two(m: int) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(m, 1)))))


def default_grid(n: int, minimum: int = 256) -> int:
    return max(minimum, next_power_of_two(4 * n + 4))


def angle_grid(m: int, base: float = 0.0) -> np.ndarray:
    return base + TWO_PI * np.arange(m) / m


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """Truncated two-sided Fourier series ``sum_{|n|<=N} a_n z^n``."""

    coeffs: np.ndarray
    real_valued: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).copy()
        if c.ndim != 1 or c.size % 2 != 1:
            raise InvalidInputError("coefficient vector must have odd length 2N+1")
        if not np.all(np.isfinite(c)):
            raise InvalidInputError("non-finite Fourier coefficient")
        if self.real_valued:
            mirror = np.conj(c[::-1])
            scale = max(1.0, float(np.max(np.abs(c))))
            if np.max(np.abs(c - mirror)) > REAL_SYMMETRY_TOL * scale:
                raise InvalidInputError("coefficients violate a_{-n} = conj(a_n)")
            c = 0.5 * (c + mirror)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction -----------------------------------------------------------

    @classmethod
    def zeros(cls, n: int, real_valued: bool = True) -> "FourierSeries":
        return cls(np.zeros(2 * n + 1, dtype=complex), real_valued)

    @classmethod
    def constant(cls, value: complex = 1.0, n: int = 0) -> "FourierSeries":
        c = np.zeros(2 * n + 1, dtype=complex)
        c[n] = value
        return cls(c, real_valued=np.isreal(value))

    @classmethod
    def monomial(cls, k: int, coeff: complex = 1.0) -> "FourierSeries":
        """``coeff * z**k``."""
        n = abs(k)
        c = np.zeros(2 * n + 1, dtype=complex)
        c[k + n] = coeff
        return cls(c, real_valued=False)

    @classmethod
    def from_dict(cls, terms: dict, real_valued: bool | None = None) -> "FourierSeries":
        """Build from ``{n: a_n}``; missing indices are zero."""
        n = max((abs(int(k)) for k in terms), default=0)
        c = np.zeros(2 * n + 1, dtype=complex)
        for k, v in terms.items():
            c[int(k) + n] += v
        if real_valued is None:
            real_valued = bool(np.allclose(c, np.conj(c[::-1]), rtol=0, atol=1e-14))
        return cls(c, real_valued)

    @classmethod
    def from_function(cls, func, n: int, grid: int | None = None) -> "FourierSeries":
        """Interpolate ``func(x)`` (vectorized in the angle) at bandwidth ``n``."""
        m = grid or next_power_of_two(2 * n + 2)
        s = from_grid(np.asarray(func(angle_grid(m))))
        return s.truncate(n)

    # basic views --------------------------------------------------------------

    @property
    def half_bandwidth(self) -> int:
        return (self.coeffs.size - 1) // 2

    N = half_bandwidth

    @property
    def modes(self) -> np.ndarray:
        n = self.half_bandwidth
        return np.arange(-n, n + 1)

    def coeff(self, k: int) -> complex:
        n = self.half_bandwidth
        return complex(self.coeffs[k + n]) if abs(k) <= n else 0.0j

    def mean(self) -> complex:
        """``int f d alpha``."""
        return self.coeff(0)

    def degree(self, tol: float = 0.0) -> int:
        nz = np.nonzero(np.abs(self.coeffs) > tol)[0]
        if nz.size == 0:
            return 0
        return int(np.max(np.abs(self.modes[nz])))

    def padded(self, n: int) -> "FourierSeries":
        cur = self.half_bandwidth
        if n < cur:
            raise ValueError("use truncate() to lower the bandwidth")
        c = np.zeros(2 * n + 1, dtype=complex)
        c[n - cur:n + cur + 1] = self.coeffs
        return FourierSeries(c, self.real_valued)

    def truncate(self, n: int) -> "FourierSeries":
        cur = self.half_bandwidth
        if n >= cur:
            return self.padded(n)
        return FourierSeries(self.coeffs[cur - n:cur + n + 1], self.real_valued)

    def trimmed(self, tol: float = 0.0) -> "FourierSeries":
        return self.truncate(self.degree(tol))

    # arithmetic -----------------------------------------------------------------

    def _aligned(self, other: "FourierSeries"):
        n = max(self.half_bandwidth, other.half_bandwidth)
        return self.padded(n).coeffs, other.padded(n).coeffs

    def __add__(self, other):
        if isinstance(other, FourierSeries):
            a, b = self._aligned(other)
            return FourierSeries(a + b, self.real_valued and other.real_valued)
        c = self.coeffs.copy()
        c[self.half_bandwidth] += other
        return FourierSeries(c, self.real_valued and np.isreal(other))

    __radd__ = __add__

    def __neg__(self):
        return FourierSeries(-self.coeffs, self.real_valued)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if isinstance(scalar, FourierSeries):
            return self.product(scalar)
        return FourierSeries(self.coeffs * scalar, self.real_valued and np.isreal(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def product(self, other: "FourierSeries") -> "FourierSeries":
        """Pointwise product (exact coefficient convolution)."""
        c = np.convolve(self.coeffs, other.coeffs)
        return FourierSeries(c, self.real_valued and other.real_valued)

    def conj(self) -> "FourierSeries":
        """Pointwise complex conjugate ``conj(f(z))``."""
        return FourierSeries(np.conj(self.coeffs[::-1]), self.real_valued)

    def real_part(self) -> "FourierSeries":
        return FourierSeries(0.5 * (self.coeffs + np.conj(self.coeffs[::-1])), True)

    def map_modes(self, multiplier) -> "FourierSeries":
        """Diagonal action ``a_n -> multiplier(n) a_n``."""
        m = np.asarray(multiplier(self.modes), dtype=complex)
        return FourierSeries(self.coeffs * m, self.real_valued and np.all(np.isreal(m)))

    def inner(self, other: "FourierSeries") -> complex:
        """``<f, g> = int f conj(g) d alpha``."""
        a, b = self._aligned(other)
        return complex(np.sum(a * np.conj(b)))

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    # evaluation -------------------------------------------------------------------

    def __call__(self, x) -> np.ndarray:
        """Evaluate at angles ``x`` (any real array)."""
        x = np.asarray(x, dtype=float)
        flat = x.ravel()
        out = np.empty(flat.size, dtype=complex)
        n = self.half_bandwidth
        modes = np.arange(-n, n + 1)
        step = max(1, _EVAL_CHUNK // (2 * n + 1))
        for i in range(0, flat.size, step):
            xs = flat[i:i + step]
            out[i:i + step] = np.exp(1j * np.outer(xs, modes)) @ self.coeffs
        out = out.reshape(x.shape)
        return out.real if self.real_valued else out

    def on_grid(self, m: int) -> np.ndarray:
        """Samples at ``x_j = 2 pi j / m``; aliasing is folded exactly."""
        buf = np.zeros(m, dtype=complex)
        np.add.at(buf, self.modes % m, self.coeffs)
        vals = np.fft.ifft(buf) * m
        return vals.real if self.real_valued else vals

    def min_on_grid(self, m: int | None = None) -> float:
        m = m or default_grid(self.half_bandwidth)
        return float(np.min(np.real(self.on_grid(m))))

    def __repr__(self):
        return f"FourierSeries(N={self.half_bandwidth}, real_valued={self.real_valued})"


def from_grid(samples) -> FourierSeries:
    """Discrete Fourier interpolant of ``M`` equispaced samples, ``N = M/2 - 1``."""
    s = np.asarray(samples)
    if s.ndim != 1:
        raise InvalidInputError("samples must be one-dimensional")
    m = s.size
    if not is_power_of_two(m) or m < 2:
        raise InvalidInputError(f"grid size {m} is not a power of two")
    if not np.all(np.isfinite(s)):
        raise InvalidInputError("non-finite sample")
    real = not np.iscomplexobj(s) or bool(np.all(np.imag(s) == 0))
    spec = np.fft.fft(s) / m
    n = m // 2 - 1
    idx = np.arange(-n, n + 1) % m
    return FourierSeries(spec[idx], real_valued=real)


def circle_derivative(f: FourierSeries, order: int = 1) -> FourierSeries:
    """``d/dt f(z e^{it})`` at ``t = 0``: ``a_n -> (i n)^order a_n``."""
    out = f.map_modes(lambda n: (1j * n) ** order)
    return FourierSeries(out.coeffs, f.real_valued)


@dataclass(frozen=True, eq=False)
class Potential:
    """A real external field ``Q`` on the circle, ``V(x) = Q(e^{ix})``."""

    series: FourierSeries
    second_derivative_min: float = field(init=False)

    def __post_init__(self):
        s = self.series
        if not s.real_valued:
            s = FourierSeries(s.coeffs, real_valued=True)
            object.__setattr__(self, "series", s)
        d2 = circle_derivative(s, 2)
        object.__setattr__(self, "second_derivative_min", d2.min_on_grid())

    @classmethod
    def zero(cls) -> "Potential":
        return cls(FourierSeries.constant(0.0))

    @classmethod
    def from_terms(cls, terms: dict) -> "Potential":
        return cls(FourierSeries.from_dict(terms, real_valued=True))

    @classmethod
    def cosine(cls, amplitude: float, k: int = 1, phase: float = 0.0) -> "Potential":
        """``amplitude * cos(k x - phase)``."""
        half = 0.5 * amplitude
        return cls.from_terms({k: half * np.exp(-1j * phase), -k: half * np.exp(1j * phase)})

    @property
    def N(self) -> int:
        return self.series.half_bandwidth

    def __call__(self, x):
        return self.series(x)

    def derivative(self, order: int = 1) -> FourierSeries:
        return circle_derivative(self.series, order)

    def mean(self) -> float:
        return float(self.series.mean().real)

    def __add__(self, other):
        other = other.series if isinstance(other, Potential) else other
        return Potential(self.series + other)

    def __mul__(self, scalar):
        return Potential(self.series * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class CircleMeasure:
    """Probability measure on the circle: smooth density against ``alpha`` or a point mass."""

    kind: str
    density: FourierSeries | None = None
    atom_angle: float | None = None
    mass: float = 1.0

    def __post_init__(self):
        if self.kind == "density":
            d = self.density
            if d is None:
                raise InvalidInputError("density measure needs a density series")
            if not d.real_valued:
                d = FourierSeries(d.coeffs, real_valued=True)
            if abs(d.mean() - self.mass) > 1e-9 * max(1.0, abs(self.mass)):
                raise InvalidMeasureError(f"density has mass {d.mean().real!r}, expected {self.mass!r}")
            lo = d.min_on_grid()
            if lo < -NEGATIVE_DENSITY_TOL:
                raise InvalidMeasureError(f"density is negative (min {lo:.3e})")
            object.__setattr__(self, "density", d)
        elif self.kind == "dirac":
            if self.atom_angle is None:
                raise InvalidInputError("dirac measure needs atom_angle")
            object.__setattr__(self, "atom_angle", float(self.atom_angle) % TWO_PI)
        else:
            raise InvalidInputError(f"unknown measure kind {self.kind!r}")

    @classmethod
    def haar(cls) -> "CircleMeasure":
        return cls("density", FourierSeries.constant(1.0))

    @classmethod
    def dirac(cls, angle: float) -> "CircleMeasure":
        return cls("dirac", atom_angle=angle)

    @classmethod
    def from_density(cls, density: FourierSeries, mass: float = 1.0) -> "CircleMeasure":
        return cls("density", density, mass=mass)

    @classmethod
    def from_samples(cls, samples) -> "CircleMeasure":
        """Density from grid samples: tiny negatives are clipped, mass renormalized."""
        s = np.asarray(samples, dtype=float)
        if not np.all(np.isfinite(s)):
            raise InvalidInputError("non-finite sample")
        if s.min() < -NEGATIVE_DENSITY_TOL:
            raise InvalidMeasureError(f"density is negative (min {s.min():.3e})")
        s = np.clip(s, 0.0, None)
        series = from_grid(s)
        mass = series.mean().real
        if mass <= 0:
            raise InvalidMeasureError("density has no mass")
        return cls("density", series / mass)

    @classmethod
    def from_terms(cls, terms: dict) -> "CircleMeasure":
        """Density ``1 + sum`` of the given non-constant modes."""
        t = dict(terms)
        t[0] = 1.0
        return cls("density", FourierSeries.from_dict(t, real_valued=True))

    @property
    def is_dirac(self) -> bool:
        return self.kind == "dirac"

    @property
    def is_haar(self) -> bool:
        return self.kind == "density" and self.density.degree(1e-15) == 0

    def moment(self, n: int) -> complex:
        """``m_n = int z^n d mu``."""
        if self.is_dirac:
            return complex(np.exp(1j * n * self.atom_angle))
        return self.density.coeff(-n)

    def density_samples(self, m: int) -> np.ndarray:
        if self.is_dirac:
            raise UnsupportedMeasureError("a point mass has no density")
        return self.density.on_grid(m)

    def integrate(self, f: FourierSeries) -> complex:
        """``int f d mu``."""
        if self.is_dirac:
            return complex(np.asarray(FourierSeries(f.coeffs)(self.atom_angle)))
        g = self.density
        n = min(f.half_bandwidth, g.half_bandwidth)
        a = f.truncate(n).coeffs
        b = g.truncate(n).coeffs
        val = complex(np.sum(a * b[::-1]))
        return val.real if f.real_valued else val


@dataclass(frozen=True, eq=False)
class LiftedMeasure:
    """Restriction of the periodic lift of ``mu`` to ``[u, u + 2 pi)``.

    ``grid`` and ``cdf`` hold the monotone piecewise-linear skeleton used to
    bracket quantiles; :meth:`cdf_at` evaluates the exact distribution function
    from the Fourier primitive of the density.
    """

    base: float
    measure: CircleMeasure
    grid: np.ndarray
    cdf: np.ndarray
    mean: float

    def primitive(self, x) -> np.ndarray:
        return _primitive(self.measure.density, x)

    def cdf_at(self, x) -> np.ndarray:
        """``F_u(x) = mu_bar([u, x))`` for ``x`` in ``[u, u + 2 pi]``."""
        d = self.measure.density
        x = np.asarray(x, dtype=float)
        return _primitive(d, x) - _primitive(d, self.base)

    def density_at(self, x) -> np.ndarray:
        return self.measure.density(x) / TWO_PI

    def mean_from_cdf(self, m: int = 4096) -> float:
        """``(u + 2 pi) - int_u^{u+2pi} F_u``; the integrand minus its linear part is periodic."""
        x = angle_grid(m, self.base)
        periodic = self.cdf_at(x) - (x - self.base) / TWO_PI
        return float(self.base + TWO_PI - (np.mean(periodic) * TWO_PI + np.pi))


def _primitive(density: FourierSeries, x) -> np.ndarray:
    """``P(x) = (1/2 pi) int_0^x density``, exact."""
    x = np.asarray(x, dtype=float)
    density = density.trimmed()
    n = density.half_bandwidth
    a0 = density.coeff(0).real
    if n == 0:
        return a0 * x / TWO_PI
    modes = density.modes
    mask = modes != 0
    c = np.zeros_like(density.coeffs)
    c[mask] = density.coeffs[mask] / (1j * modes[mask] * TWO_PI)
    s = FourierSeries(c, real_valued=True)
    return a0 * x / TWO_PI + s(x) - s(np.zeros(1))[0]


def lifted_mean(mu: CircleMeasure, u: float) -> float:
    """``int x mu_bar_u(dx)`` in closed form: ``u + pi + sum_{n!=0} a_n e^{inu} / (i n)``."""
    if mu.is_dirac:
        return float(u + (mu.atom_angle - u) % TWO_PI)
    d = mu.density
    modes = d.modes
    mask = modes != 0
    val = np.sum(d.coeffs[mask] * np.exp(1j * modes[mask] * u) / (1j * modes[mask]))
    return float(u + np.pi + val.real)


def lift(mu: CircleMeasure, u: float, grid: int | None = None) -> LiftedMeasure:
    """Unroll ``mu`` onto ``[u, u + 2 pi)``."""
    if mu.is_dirac:
        raise UnsupportedMeasureError("point masses are lifted analytically in transport")
    m = grid or default_grid(mu.density.half_bandwidth)
    lo = mu.density.min_on_grid(m)
    if lo < -NEGATIVE_DENSITY_TOL:
        raise InvalidMeasureError(f"density is negative (min {lo:.3e})")
    x = u + TWO_PI * np.arange(m + 1) / m
    p = _primitive(mu.density, x)
    f = p - p[0]
    f[-1] = 1.0
    f = np.maximum.accumulate(np.clip(f, 0.0, 1.0))
    return LiftedMeasure(float(u), mu, x, f, lifted_mean(mu, u))


def quantile(lm: LiftedMeasure, s, newton_steps: int = 40, tol: float = 1e-14):
    """Generalized inverse ``inf{x : F_u(x) >= s}`` (vectorized in ``s``).

    Bracketing by binary search on the monotone grid skeleton, then a
    safeguarded Newton polish on the exact distribution function.
    """
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0) or np.any(s_arr > 1) or not np.all(np.isfinite(s_arr)):
        raise ValueError("quantile level outside [0, 1]")
    flat = s_arr.ravel()
    g, F = lm.grid, lm.cdf
    j = np.clip(np.searchsorted(F, flat, side="left"), 1, g.size - 1)
    lo = g[j - 1].copy()
    hi = g[j].copy()
    f_lo, f_hi = F[j - 1], F[j]
    w = np.where(f_hi > f_lo, (flat - f_lo) / np.where(f_hi > f_lo, f_hi - f_lo, 1.0), 0.0)
    x = lo + np.clip(w, 0, 1) * (hi - lo)
    active = np.ones(flat.size, dtype=bool)
    for _ in range(newton_steps):
        if not active.any():
            break
        xa = x[active]
        r = lm.cdf_at(xa) - flat[active]
        dens = lm.density_at(xa)
        lo_a, hi_a = lo[active], hi[active]
        lo_a = np.where(r < 0, xa, lo_a)
        hi_a = np.where(r > 0, xa, hi_a)
        step = np.where(dens > 0, r / np.where(dens > 0, dens, 1.0), np.inf)
        xn = xa - step
        bad = ~np.isfinite(xn) | (xn <= lo_a) | (xn >= hi_a)
        xn = np.where(bad, 0.5 * (lo_a + hi_a), xn)
        done = (np.abs(r) <= tol) | (np.abs(xn - xa) <= 1e-15 * (1 + np.abs(xa)))
        lo[active], hi[active], x[active] = lo_a, hi_a, np.where(done, xa, xn)
        idx = np.nonzero(active)[0]
        active[idx[done]] = False
    x = np.where(flat <= 0.0, lm.base, x)
    x = np.where(flat >= 1.0, np.minimum(x, lm.base + TWO_PI), x)
    out = x.reshape(s_arr.shape)
    return float(out) if out.ndim == 0 else out


# ----------------------------------------------------------------------------- files


def _series_from_json(obj: dict, what: str) -> FourierSeries:
    kind = obj.get("kind")
    if kind == "fourier":
        if "coeffs" not in obj:
            raise InvalidInputError(f"{what}: missing field 'coeffs'")
        terms = {}
        for i, entry in enumerate(obj["coeffs"]):
            try:
                n, re, im = entry
                terms[int(n)] = terms.get(int(n), 0) + complex(float(re), float(im))
            except (TypeError, ValueError) as exc:
                raise InvalidInputError(f"{what}: field 'coeffs[{i}]' must be [n, re, im]") from exc
        return FourierSeries.from_dict(terms)
    if kind == "grid":
        if "samples" not in obj:
            raise InvalidInputError(f"{what}: missing field 'samples'")
        try:
            samples = np.asarray(obj["samples"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"{what}: field 'samples' must be numeric") from exc
        if not is_power_of_two(samples.size):
            raise InvalidInputError(f"{what}: field 'samples' size {samples.size} is not a power of two")
        return from_grid(samples)
    raise InvalidInputError(f"{what}: field 'kind' must be 'fourier' or 'grid', got {kind!r}")


def _read_json(path) -> dict:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise InvalidInputError(f"{path}: top level must be an object")
    return obj


def potential_from_json(obj: dict, what: str = "potential") -> Potential:
    s = _series_from_json(obj, what)
    if not s.real_valued:
        raise InvalidInputError(f"{what}: field 'coeffs' does not describe a real potential")
    return Potential(s)


def measure_from_json(obj: dict, what: str = "measure") -> CircleMeasure:
    """Measure files use the potential schema plus ``{"kind": "dirac", "angle": x}`` and ``{"kind": "haar"}``."""
    kind = obj.get("kind")
    if kind == "dirac":
        if "angle" not in obj:
            raise InvalidInputError(f"{what}: missing field 'angle'")
        try:
            return CircleMeasure.dirac(float(obj["angle"]))
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"{what}: field 'angle' must be a number") from exc
    if kind == "haar":
        return CircleMeasure.haar()
    if kind == "grid":
        s = _series_from_json(obj, what)
        return CircleMeasure.from_samples(s.on_grid(2 * s.half_bandwidth + 2))
    s = _series_from_json(obj, what)
    if not s.real_valued:
        raise InvalidInputError(f"{what}: field 'coeffs' does not describe a real density")
    mass = s.mean().real
    if mass <= 0:
        raise InvalidInputError(f"{what}: field 'coeffs' has non-positive mass")
    return CircleMeasure.from_density(s / mass)


def load_potential(path) -> Potential:
    return potential_from_json(_read_json(path), str(path))


def load_measure(path) -> CircleMeasure:
    return measure_from_json(_read_json(path), str(path))


def series_to_json(s: FourierSeries, tol: float = 0.0) -> dict:
    return {
        "kind": "fourier",
        "coeffs": [[int(n), float(a.real), float(a.imag)]
                   for n, a in zip(s.modes, s.coeffs) if abs(a) > tol],
    }
