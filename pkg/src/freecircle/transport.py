"""Transport distances between measures on the circle.

The modified distance ``W_p`` (script W below) compares the lifts of two
measures to intervals ``[u, u+2pi)`` and ``[v, v+2pi)`` whose means agree; the
lifted problem is one-dimensional and is solved by the monotone rearrangement
``theta = G^{-1} o F``.  The geodesic distance ``W_p`` on the circle is also
provided, together with the Hopf-Lax semigroup and dual certificates.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .measures import (
    TWO_PI,
    CircleMeasure,
    FourierSeries,
    LiftedMeasure,
    UnsupportedMeasureError,
    _primitive,
    angle_grid,
    circle_derivative,
    default_grid,
    lift,
    lifted_mean,
    quantile,
)

FEASIBILITY_TOL = 1e-9


class CertificateRejectedError(ValueError):
    """A dual certificate violates its Lipschitz constraint."""


@dataclass(frozen=True, eq=False)
class MonotoneMap:
    """Non-decreasing map ``theta`` from ``[u, u+2pi)`` onto ``[v, v+2pi)`` sampled at ``x``."""

    u: float
    v: float
    x: np.ndarray
    theta: np.ndarray
    source: LiftedMeasure
    target: LiftedMeasure

    def cost(self, p: float) -> float:
        """``int |x - theta(x)|^p mu_bar_u(dx)`` by the periodic trapezoid rule."""
        w = self.source.density_at(self.x) * (TWO_PI / self.x.size)
        return float(np.sum(np.abs(self.x - self.theta) ** p * w))

    def pushforward_error(self) -> float:
        """``max |F_u(x) - G_v(theta(x))|`` over the samples."""
        return float(np.max(np.abs(self.source.cdf_at(self.x) - self.target.cdf_at(self.theta))))

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.theta) >= -1e-12))


@dataclass(frozen=True, eq=False)
class DistanceResult:
    value: float
    p: float
    cut_points: tuple | None = None
    map: MonotoneMap | None = None
    kind: str = "modified"

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def _require_atomless(*measures):
    for m in measures:
        if m.is_dirac:
            raise UnsupportedMeasureError("operation requires atomless measures")


def _check_p(p):
    if not (p >= 1):
        raise ValueError(f"p must be >= 1, got {p!r}")


# ---------------------------------------------------------------- matching cut


def matching_function(mu: CircleMeasure, nu: CircleMeasure):
    """Return ``(f, target)`` with ``f(t) = mu_bar_0([0,t)) - nu_bar_0([0,t))``.

    Lifts cut at ``t`` on both sides have equal means iff ``f(t) = target``.
    """
    _require_atomless(mu, nu)
    diff = mu.density - nu.density
    target = -(lifted_mean(mu, 0.0) - lifted_mean(nu, 0.0)) / TWO_PI

    def f(t):
        return _primitive(diff, t)

    return f, target


def find_matching_cut(mu: CircleMeasure, nu: CircleMeasure, grid: int | None = None) -> float:
    """Smallest ``t`` in ``[0, 2pi)`` at which the lifts of ``mu`` and ``nu`` have equal means.

    The mismatch ``f(t) - target`` has zero average over a period, so it
    changes sign; the first sign change on the grid is refined by Brent's
    method.
    """
    f, target = matching_function(mu, nu)
    if abs(target) <= 1e-15:
        return 0.0
    m = grid or default_grid(max(mu.density.half_bandwidth, nu.density.half_bandwidth), 512)
    x = np.append(angle_grid(m), TWO_PI)
    r = f(x) - target
    sign = np.sign(r)
    hits = np.nonzero(sign[:-1] * sign[1:] <= 0)[0]
    if hits.size == 0:
        # tangential root: refine the grid minimum of |r|
        k = int(np.argmin(np.abs(r)))
        h = TWO_PI / m
        res = minimize_scalar(lambda s: abs(float(f(s)) - target), bounds=(x[k] - h, x[k] + h),
                              method="bounded", options={"xatol": 1e-14})
        return float(res.x % TWO_PI)
    k = int(hits[0])
    if r[k] == 0:
        return float(x[k] % TWO_PI)
    t = brentq(lambda s: float(f(s)) - target, x[k], x[k + 1], xtol=1e-15, maxiter=200)
    return float(t % TWO_PI)


def admissible_pair(mu: CircleMeasure, nu: CircleMeasure, shift: float, t: float | None = None,
                    grid: int | None = None) -> tuple[float, float]:
    """Mean-matching cut pair ``(u, v)`` with ``u = t + shift``.

    Cutting both lifts at a point of equal lifted mass starting from a
    matching cut ``t`` keeps the means equal.
    """
    if t is None:
        t = find_matching_cut(mu, nu)
    lm, ln = lift(mu, t, grid), lift(nu, t, grid)
    u = t + shift % TWO_PI
    s = float(lm.cdf_at(u))
    v = float(quantile(ln, min(max(s, 0.0), 1.0)))
    return u, v


# ---------------------------------------------------------------- modified distance


def monotone_map(mu: CircleMeasure, u: float, nu: CircleMeasure, v: float,
                 grid: int | None = None) -> MonotoneMap:
    """``theta = G_v^{-1} o F_u`` sampled on ``grid`` equispaced points of ``[u, u+2pi)``."""
    _require_atomless(mu, nu)
    n = max(mu.density.half_bandwidth, nu.density.half_bandwidth)
    m = grid or default_grid(n, 8192)
    lm, ln = lift(mu, u), lift(nu, v)
    x = u + TWO_PI * np.arange(m) / m
    s = np.clip(lm.cdf_at(x), 0.0, 1.0)
    theta = quantile(ln, s)
    return MonotoneMap(float(u), float(v), x, np.asarray(theta), lm, ln)


def interval_wasserstein(mu: CircleMeasure, u: float, nu: CircleMeasure, v: float, p: float = 2,
                         grid: int | None = None) -> float:
    """``W_p`` between the lifts ``mu_bar_u`` and ``nu_bar_v`` on the real line."""
    _check_p(p)
    if p == 1:
        return _w1_exact(mu, u, nu, v)
    return monotone_map(mu, u, nu, v, grid).cost(p) ** (1.0 / p)


def _w1_exact(mu, u, nu, v):
    """``int |F_u(x) - G_v(x)| dx`` integrated piecewise between the roots of the difference."""
    _require_atomless(mu, nu)
    lm, ln = lift(mu, u), lift(nu, v)
    lo, hi = min(u, v), max(u, v) + TWO_PI

    def F(x):
        return np.clip(np.where(x < u, 0.0, np.where(x >= u + TWO_PI, 1.0, lm.cdf_at(np.clip(x, u, u + TWO_PI)))), 0, 1)

    def G(x):
        return np.clip(np.where(x < v, 0.0, np.where(x >= v + TWO_PI, 1.0, ln.cdf_at(np.clip(x, v, v + TWO_PI)))), 0, 1)

    # breakpoints: interval ends and sign changes of F - G
    n = max(mu.density.trimmed().half_bandwidth, nu.density.trimmed().half_bandwidth, 4)
    m = default_grid(n, 1024)
    pts = np.linspace(lo, hi, 2 * m + 1)
    d = F(pts) - G(pts)
    cuts = [lo, hi, u, v, u + TWO_PI, v + TWO_PI]
    for i in np.nonzero(d[:-1] * d[1:] < 0)[0]:
        cuts.append(brentq(lambda s: float(F(s) - G(s)), pts[i], pts[i + 1], xtol=1e-15))
    cuts = np.unique(np.array(cuts))
    # F - G keeps its sign on each piece; split further so Gauss-Legendre resolves degree n
    width = TWO_PI / (4 * n)
    edges = [np.linspace(a, b, int(math.ceil((b - a) / width)) + 1) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]
    a = np.concatenate([e[:-1] for e in edges])
    b = np.concatenate([e[1:] for e in edges])
    gx, gw = np.polynomial.legendre.leggauss(16)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    xs = mid[:, None] + half[:, None] * gx[None, :]
    vals = np.abs(F(xs.ravel()) - G(xs.ravel())).reshape(xs.shape)
    return float(np.sum(half[:, None] * gw[None, :] * vals))


def _dirac_branch(mu, nu, p):
    a, b = mu, nu
    if a.is_dirac and b.is_dirac:
        same = abs(((a.atom_angle - b.atom_angle + math.pi) % TWO_PI) - math.pi) < 1e-15
        return 0.0 if same else math.inf
    if b.is_dirac:
        a, b = b, a
    if b.is_haar:
        return (2.0 * math.pi ** (p + 1) / (p + 1)) ** (1.0 / p)
    raise UnsupportedMeasureError("modified distance between a point mass and a non-uniform measure is not resolved")


def modified_wasserstein(mu: CircleMeasure, nu: CircleMeasure, p: float = 2, grid: int | None = None,
                         return_map: bool = False) -> DistanceResult:
    """Modified Wasserstein distance.

    Both lifts are cut at a single mean-matching point ``t``; the value does not
    depend on which admissible pair is used.  Point masses are handled by the
    closed forms: distinct atoms are at infinite distance and
    ``W_p(delta, alpha) = (2 pi^{p+1} / (p+1))^{1/p}``.
    """
    _check_p(p)
    if mu.is_dirac or nu.is_dirac:
        return DistanceResult(_dirac_branch(mu, nu, p), p, None, None, "modified")
    t = find_matching_cut(mu, nu)
    if p == 1 and not return_map:
        return DistanceResult(_w1_exact(mu, t, nu, t), p, (t, t), None, "modified")
    mm = monotone_map(mu, t, nu, t, grid)
    val = _w1_exact(mu, t, nu, t) if p == 1 else mm.cost(p) ** (1.0 / p)
    return DistanceResult(val, p, (t, t), mm if return_map else None, "modified")


def lifted_quantile_distance(mu: CircleMeasure, nu: CircleMeasure, p: float = 2, levels: int = 1 << 14) -> float:
    """Cut-free evaluation of the modified distance.

    ``int_0^1 |F^{-1}(s) - G^{-1}(s + c)|^p ds`` with both quantiles taken from the
    lifts at ``0`` (extended by ``G^{-1}(s+1) = G^{-1}(s) + 2pi``) and
    ``c`` the mean offset ``(mean_mu - mean_nu) / 2pi``.  Used as a cross-check.
    """
    _require_atomless(mu, nu)
    lm, ln = lift(mu, 0.0), lift(nu, 0.0)
    c = (lm.mean - ln.mean) / TWO_PI
    s = (np.arange(levels) + 0.5) / levels
    sc = s + c
    k = np.floor(sc)
    g = np.asarray(quantile(ln, sc - k)) + TWO_PI * k
    f = np.asarray(quantile(lm, s))
    return float(np.mean(np.abs(f - g) ** p) ** (1.0 / p))


# ---------------------------------------------------------------- geodesic distance


def _circ_dist(a, b):
    return np.abs((a - b + math.pi) % TWO_PI - math.pi)


def circle_wasserstein(mu: CircleMeasure, nu: CircleMeasure, p: float = 2, levels: int = 4096,
                       starts: int = 8, return_shift: bool = False):
    """Wasserstein distance for the geodesic metric of the circle.

    ``W_p^p = min_lambda int_0^1 d(F^{-1}(s), G^{-1}(s + lambda))^p ds``.  The
    periodic part ``G^{-1}(s) - 2 pi s`` is shifted by a spectral phase factor,
    and the scalar problem is minimized by bounded Brent searches on
    ``starts`` sub-intervals of ``[-1/2, 1/2]``.
    """
    _check_p(p)
    if mu.is_dirac or nu.is_dirac:
        return _circle_dirac(mu, nu, p)
    lm, ln = lift(mu, 0.0), lift(nu, 0.0)
    s = (np.arange(levels) + 0.5) / levels
    finv = np.asarray(quantile(lm, s))
    qn = np.asarray(quantile(ln, s)) - TWO_PI * s
    spec = np.fft.rfft(qn)
    freq = np.arange(spec.size)

    def cost(lam):
        shifted = np.fft.irfft(spec * np.exp(2j * np.pi * freq * lam), n=levels)
        ginv = shifted + TWO_PI * (s + lam)
        return float(np.mean(_circ_dist(finv, ginv) ** p))

    edges = np.linspace(-0.5, 0.5, starts + 1)
    best_val, best_lam = math.inf, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        r = minimize_scalar(cost, bounds=(a, b), method="bounded", options={"xatol": 1e-11})
        for lam, val in ((r.x, r.fun), (a, cost(a))):
            if val < best_val:
                best_val, best_lam = val, float(lam)
    value = best_val ** (1.0 / p)
    return (value, best_lam) if return_shift else value


def _circle_dirac(mu, nu, p):
    if mu.is_dirac and nu.is_dirac:
        return float(_circ_dist(mu.atom_angle, nu.atom_angle))
    a, b = (mu, nu) if mu.is_dirac else (nu, mu)
    if b.is_haar:
        return (math.pi ** p / (p + 1)) ** (1.0 / p)
    m = default_grid(b.density.half_bandwidth, 1 << 14)
    x = angle_grid(m, a.atom_angle)
    return float(np.mean(_circ_dist(x, a.atom_angle) ** p * b.density(x)) ** (1.0 / p))


# ---------------------------------------------------------------- Hopf-Lax semigroup


@dataclass(frozen=True, eq=False)
class GridFunction:
    x: np.ndarray
    values: np.ndarray
    argmin: np.ndarray | None = None


def _lower_envelope(q: np.ndarray, c: np.ndarray, xs: np.ndarray):
    """Lower envelope ``min_k (x - q_k)^2 + c_k`` at sorted ``xs`` (q sorted)."""
    n = q.size
    v = np.zeros(n, dtype=np.int64)
    z = np.empty(n + 1)
    key = c + q * q
    k = 0
    z[0], z[1] = -np.inf, np.inf
    for i in range(1, n):
        s = (key[i] - key[v[k]]) / (2.0 * (q[i] - q[v[k]]))
        while s <= z[k]:
            k -= 1
            s = (key[i] - key[v[k]]) / (2.0 * (q[i] - q[v[k]]))
        k += 1
        v[k] = i
        z[k] = s
        z[k + 1] = np.inf
    out = np.empty(xs.size)
    arg = np.empty(xs.size, dtype=np.int64)
    k = 0
    for i, x in enumerate(xs):
        while z[k + 1] < x:
            k += 1
        j = v[k]
        arg[i] = j
        out[i] = (x - q[j]) ** 2 + c[j]
    return out, arg


def hopf_lax(f: FourierSeries, lam: float, t: float, grid: int | None = None, polish: bool = True) -> GridFunction:
    """Infimum convolution ``U_t^lam f(x) = inf_y {f(y) + (x-y)^2/t + lam (x-y)}``.

    The lower envelope of the parabolas is scanned in linear time over one
    period extended by enough ``2 pi`` wings to contain every minimizer; each
    value is then polished by Newton's method on the first-order condition.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t!r}")
    f = FourierSeries(f.coeffs, True)
    m = grid or default_grid(f.half_bandwidth, 1024)
    x = angle_grid(m)
    df = circle_derivative(f)
    d2f = circle_derivative(f, 2)
    fv = f.on_grid(m)
    reach = 0.5 * t * (float(np.max(np.abs(df.on_grid(max(m, 256))))) + abs(lam))
    wings = int(math.ceil(reach / TWO_PI)) + 1
    shifts = np.arange(-wings, wings + 1)
    y = (x[None, :] + TWO_PI * shifts[:, None]).ravel()
    gy = np.tile(fv, shifts.size) - lam * y
    # (x-y)^2/t + g(y) = ((x-y)^2 + t g(y)) / t
    env, arg = _lower_envelope(y, t * gy, x)
    vals = env / t + lam * x
    ystar = y[arg]
    if polish:
        h = TWO_PI / m
        yy = ystar.copy()
        for _ in range(8):
            d1 = df(yy) - lam - 2.0 * (x - yy) / t
            d2 = d2f(yy) + 2.0 / t
            step = np.where(d2 > 0, d1 / np.where(d2 > 0, d2, 1.0), 0.0)
            yy = yy - np.clip(step, -h, h)
        pol = f(yy) - lam * yy + (x - yy) ** 2 / t + lam * x
        better = pol < vals
        vals = np.where(better, pol, vals)
        ystar = np.where(better, yy, ystar)
    return GridFunction(x, vals, ystar)


def hopf_lax_pde_residual(f: FourierSeries, lam: float, t: float, grid: int, dt_factor: float = 0.25):
    """Max of ``|d_t u + (u_x - lam)^2 / 4|`` at smooth points, by centred differences.

    ``dt`` is tied to the grid spacing so both discretization errors are
    second order.
    """
    h = TWO_PI / grid
    dt = dt_factor * h * t
    up = hopf_lax(f, lam, t + dt, grid).values
    um = hopf_lax(f, lam, t - dt, grid).values
    mid = hopf_lax(f, lam, t, grid)
    u = mid.values
    ut = (up - um) / (2 * dt)
    ux = (np.roll(u, -1) - np.roll(u, 1)) / (2 * h)
    r = ut + (ux - lam) ** 2 / 4.0
    ys = mid.argmin
    jump = np.abs(np.diff(np.append(ys, ys[0] + TWO_PI)))
    smooth = (jump < 20 * h * (1 + t)) & (np.roll(jump, 1) < 20 * h * (1 + t))
    smooth &= np.roll(smooth, 1) & np.roll(smooth, -1)
    if not smooth.any():
        warnings.warn("no smooth points for the Hopf-Lax residual", RuntimeWarning)
        return math.nan
    return float(np.max(np.abs(r[smooth])))


def hopf_lax_expansion_residual(f: FourierSeries, lam: float, t: float, grid: int | None = None) -> float:
    """``max |U_1^{t lam}(t f) - t f + t^2 (f' - lam)^2 / 4|``; of order ``t^3``."""
    f = FourierSeries(f.coeffs, True)
    g = hopf_lax(t * f, t * lam, 1.0, grid)
    fx = f(g.x)
    dfx = circle_derivative(f)(g.x)
    return float(np.max(np.abs(g.values - t * fx + t * t * (dfx - lam) ** 2 / 4.0)))


# ---------------------------------------------------------------- dual certificates


def w1_dual_certificate(mu: CircleMeasure, nu: CircleMeasure, f: FourierSeries, lam: float = 0.0,
                        grid: int | None = None) -> float:
    """Lower bound ``int f d(mu - nu)`` for the modified ``W_1``.

    Requires ``|f' - lam| <= 1`` on the grid, which makes ``f(x) - lam x``
    1-Lipschitz on the line.
    """
    f = FourierSeries(f.coeffs, True)
    m = grid or default_grid(f.half_bandwidth, 4096)
    slope = np.max(np.abs(circle_derivative(f).on_grid(m) - lam))
    if slope > 1.0 + FEASIBILITY_TOL:
        raise CertificateRejectedError(f"certificate has |f' - lambda| up to {slope:.6g} > 1")
    return float(np.real(mu.integrate(f) - nu.integrate(f)))


def spectral_w1_certificate(mu: CircleMeasure, nu: CircleMeasure, grid: int | None = None) -> tuple[float, FourierSeries]:
    """The certificate ``g = E^2 phi / ||(E^2 phi)'||_inf`` with ``lam = 0`` for ``mu - nu = phi alpha``."""
    from .operators import E

    _require_atomless(mu, nu)
    phi = mu.density - nu.density
    g = E(E(phi))
    m = grid or default_grid(g.half_bandwidth, 4096)
    lip = float(np.max(np.abs(circle_derivative(g).on_grid(m))))
    if lip == 0:
        return 0.0, g
    g = g / (lip * (1 + 1e-12))
    return w1_dual_certificate(mu, nu, g, 0.0, m), g


def w2_dual_certificate(mu: CircleMeasure, nu: CircleMeasure, f: FourierSeries, lam: float = 0.0,
                        grid: int | None = None) -> float:
    """Lower bound ``int U_1^lam f d mu - int f d nu`` for the squared modified ``W_2``."""
    _require_atomless(mu, nu)
    m = grid or default_grid(max(f.half_bandwidth, mu.density.half_bandwidth), 2048)
    g = hopf_lax(f, lam, 1.0, m)
    a = float(np.mean(g.values * mu.density.on_grid(m)))
    return a - float(np.real(nu.integrate(FourierSeries(f.coeffs, True))))
