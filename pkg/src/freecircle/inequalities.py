"""Margin checks for the free functional inequalities on the circle.

Each ``verify_*`` function evaluates both sides of one inequality on one
instance and returns an :class:`~freecircle.reports.InequalityReport`.
Constants follow the convexity hypothesis ``Q'' >= rho - 1/2``, under which
the proven constants are ``rho`` (Poincare) and ``rho/2`` (transport,
log-Sobolev, HWI).
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.optimize import minimize_scalar

from .equilibrium import FullSupportError, solve_equilibrium
from .functionals import (
    energy,
    fisher_information_IQ,
    potential_free_I,
    relative_entropy_H,
)
from .measures import (
    TWO_PI,
    CircleMeasure,
    FourierSeries,
    Potential,
    angle_grid,
    circle_derivative,
    from_grid,
)
from .instances import family_measure, rng_for
from .operators import N, houdre_kagan_bounds
from .reports import InequalityReport, digest
from .transport import hopf_lax, modified_wasserstein, circle_wasserstein


def in_hypothesis(Q: Potential, rho: float) -> bool:
    """``Q'' >= rho - 1/2`` on the grid."""
    return Q.second_derivative_min >= rho - 0.5 - 1e-12


# ------------------------------------------------------------------ Poincare


def poincare_sides(mu: CircleMeasure, rho: float, f: FourierSeries) -> tuple[float, float]:
    """``(2 rho <N f, f>, int |f'|^2 d mu - |int f' d mu|^2)``."""
    df = circle_derivative(f)
    lhs = 2.0 * rho * N(f).inner(f).real
    rhs = mu.integrate(df.product(df.conj()))
    mean = mu.integrate(df)
    return float(lhs), float(np.real(rhs) - abs(mean) ** 2)


def verify_poincare(mu: CircleMeasure, rho: float, f: FourierSeries, Q: Potential | None = None) -> InequalityReport:
    """Free Poincare inequality ``P(rho)`` for the test function ``f``."""
    lhs, rhs = poincare_sides(mu, rho, f)
    ok = True if Q is None else in_hypothesis(Q, rho)
    return InequalityReport("Poincare", lhs, rhs, rho, digest(mu, f, rho), ok)


def poincare_rho_scan(mu: CircleMeasure, functions, rhos) -> float:
    """Largest ``rho`` in ``rhos`` for which every test function passes."""
    best = -math.inf
    sides = [poincare_sides(mu, 1.0, f) for f in functions]
    for rho in np.sort(np.asarray(rhos, dtype=float)):
        if all(InequalityReport("Poincare", rho * l, r).passed for l, r in sides):
            best = float(rho)
        else:
            break
    return best


def verify_houdre_kagan(phi: FourierSeries, k: int) -> list[InequalityReport]:
    """``lower <= <N phi, phi> <= upper``."""
    lower, upper = houdre_kagan_bounds(phi, k)
    target = N(phi).inner(phi).real
    d = digest(phi, k)
    return [
        InequalityReport("HoudreKagan", lower, target, None, d, True, {"k": k, "side": "lower"}),
        InequalityReport("HoudreKagan", target, upper, None, d, True, {"k": k, "side": "upper"}),
    ]


# ------------------------------------------------------------------ T, LSI, HWI


class _Instance:
    """Shared quantities for one ``(Q, mu)`` pair."""

    def __init__(self, Q: Potential, mu: CircleMeasure, grid: int | None = None):
        self.Q, self.mu = Q, mu
        self.eq = solve_equilibrium(Q)
        self.gap = energy(Q, mu) - self.eq.energy
        self.grid = grid
        self._w2 = None
        self._info = None

    @property
    def w2(self) -> float:
        if self._w2 is None:
            self._w2 = modified_wasserstein(self.mu, self.eq.measure, 2, self.grid).value
        return self._w2

    @property
    def info(self) -> float:
        if self._info is None:
            self._info = fisher_information_IQ(self.Q, self.mu)
        return self._info


def _report(name, lhs, rhs, inst: _Instance, rho, **extra):
    return InequalityReport(name, float(lhs), float(rhs), rho, digest(inst.Q, inst.mu, rho),
                            in_hypothesis(inst.Q, rho), extra)


def verify_transport(Q: Potential, mu: CircleMeasure, rho: float, grid: int | None = None,
                     _inst: _Instance | None = None) -> InequalityReport:
    """``(rho/2) W_2^2(mu, mu_Q) <= E_Q(mu) - E_Q``."""
    inst = _inst or _Instance(Q, mu, grid)
    return _report("Transport", 0.5 * rho * inst.w2 ** 2, inst.gap, inst, rho, w2=inst.w2)


def verify_lsi(Q: Potential, mu: CircleMeasure, rho: float, grid: int | None = None,
               _inst: _Instance | None = None) -> InequalityReport:
    """``E_Q(mu) - E_Q <= I_Q(mu) / (2 rho)``."""
    inst = _inst or _Instance(Q, mu, grid)
    return _report("LSI", inst.gap, inst.info / (2.0 * rho), inst, rho, fisher=inst.info)


def verify_hwi(Q: Potential, mu: CircleMeasure, rho: float, grid: int | None = None,
               _inst: _Instance | None = None) -> InequalityReport:
    """``E_Q(mu) - E_Q <= sqrt(I_Q) W_2 - (rho/2) W_2^2``."""
    inst = _inst or _Instance(Q, mu, grid)
    w, i = inst.w2, max(inst.info, 0.0)
    return _report("HWI", inst.gap, math.sqrt(i) * w - 0.5 * rho * w * w, inst, rho, w2=w, fisher=inst.info)


def verify_all(Q: Potential, mu: CircleMeasure, rho: float, grid: int | None = None) -> dict:
    """Transport, LSI and HWI on one instance, sharing the distance and information."""
    inst = _Instance(Q, mu, grid)
    return {
        "transport": verify_transport(Q, mu, rho, _inst=inst),
        "lsi": verify_lsi(Q, mu, rho, _inst=inst),
        "hwi": verify_hwi(Q, mu, rho, _inst=inst),
    }


def hwi_implies_lsi_margin(report_hwi: InequalityReport, rho: float) -> float:
    """``I/(4K) - rhs_HWI`` with ``K = rho/2``; nonnegative since ``ab - K a^2 <= b^2/(4K)``."""
    i = report_hwi.extra["fisher"]
    return i / (2.0 * rho) - report_hwi.rhs


def otto_villani_constant(rho: float, C: float) -> float:
    """LSI constant ``max(rho, (C + rho)^2 / (32 C))`` obtained from ``T(C)`` and ``HWI(rho)``."""
    if not C > max(0.0, -rho):
        raise ValueError("requires C > max(0, -rho)")
    return max(rho, (C + rho) ** 2 / (32.0 * C))


def linearization_check(Q: Potential, f: FourierSeries, K: float, t: float) -> dict:
    """LSI(K) slack along ``mu_t = mu_Q - t N f alpha`` against the Poincare slack of ``f``.

    ``slack_LSI(t) / t^2 -> slack_P(K) / (4K)`` with an ``O(t)`` error.
    """
    base = solve_equilibrium(Q)
    f = FourierSeries(f.coeffs, True) - f.mean().real
    lhs_p, rhs_p = poincare_sides(base.measure, K, f)
    slack_p = rhs_p - lhs_p
    out = {}
    for tt in (t, t / 2):
        mu_t = CircleMeasure.from_density(base.density - tt * N(f))
        gap = energy(Q, mu_t) - base.energy
        info = fisher_information_IQ(Q, mu_t)
        out[tt] = (info / (4.0 * K) - gap) / tt ** 2
    target = slack_p / (4.0 * K)
    return {"target": target, "scaled_slack": out,
            "errors": {k: abs(v - target) for k, v in out.items()}}


# ------------------------------------------------------------------ Brunn-Minkowski


def inf_convolution(Q1: Potential, Q2: Potential, a: float, grid: int = 512, base: float = 0.0,
                    fine: int = 1 << 15, samples: int = 4096) -> np.ndarray:
    """Largest ``Q3`` with ``a V1(x) + (1-a) V2(y) >= V3(a x + (1-a) y)`` for ``x, y`` in one base interval.

    Returned on the canonical grid ``2 pi j / grid``, each point read through
    its lift to ``[base, base + 2 pi)``.  ``x`` runs over ``samples`` points
    and ``V2`` is read from a fine periodic table.
    """
    if not 0 < a < 1:
        raise ValueError("a must lie in (0, 1)")
    z = base + np.mod(angle_grid(grid) - base, TWO_PI)
    x = angle_grid(samples, base)
    v1 = Q1(x)
    table = Q2.series.on_grid(fine)
    tx = angle_grid(fine)

    def v2(y):
        return np.interp(np.mod(y, TWO_PI), np.append(tx, TWO_PI), np.append(table, table[0]))

    out = np.full(grid, np.inf)
    for i0 in range(0, samples, 256):
        xs = x[i0:i0 + 256]
        y = (z[:, None] - a * xs[None, :]) / (1.0 - a)
        ok = (y >= base) & (y < base + TWO_PI)
        val = np.where(ok, a * v1[i0:i0 + 256][None, :] + (1.0 - a) * v2(y), np.inf)
        out = np.minimum(out, val.min(axis=1))
    return out


def _smooth_minorant(values: np.ndarray, n: int, widths):
    """Gaussian-smoothed, downward-shifted copies of ``values`` until ``1 - N Q >= 0``."""
    m = values.size
    raw = from_grid(values)
    for w in widths:
        s = raw.map_modes(lambda k: np.exp(-0.5 * (w * k) ** 2)).truncate(min(n, raw.half_bandwidth))
        s = FourierSeries(s.coeffs, True)
        shift = float(np.max(s.on_grid(m) - values))
        cand = Potential(s - max(shift, 0.0))
        try:
            res = solve_equilibrium(cand)
        except FullSupportError:
            continue
        return cand, res, w, max(shift, 0.0)
    raise FullSupportError("no smoothed minorant of the inf-convolution has a full-support equilibrium")


BM_WIDTHS = (0.0, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0)


def verify_brunn_minkowski(Q1: Potential, Q2: Potential, a: float, grid: int = 512, bandwidth: int = 128,
                           base: float = 0.0) -> InequalityReport:
    """``a E_{Q1} + (1 - a) E_{Q2} >= E_{Q3}`` for the tightest admissible ``Q3``.

    ``Q3`` is the inf-convolution on one base interval.  When its kinks keep
    ``1 - N Q3`` from being positive, a smoothed minorant is used instead
    (still admissible); the width is recorded and a warning is issued.
    """
    e1 = solve_equilibrium(Q1).energy
    e2 = solve_equilibrium(Q2).energy
    q3 = inf_convolution(Q1, Q2, a, grid, base)
    pot, res, width, shift = _smooth_minorant(q3, bandwidth, BM_WIDTHS)
    if width > 0:
        warnings.warn(f"inf-convolution smoothed with width {width} for a full-support equilibrium",
                      RuntimeWarning)
    rhs = a * e1 + (1 - a) * e2
    return InequalityReport("BrunnMinkowski", res.energy, rhs, None, digest(Q1, Q2, a), True,
                            {"a": a, "smoothing_width": width, "shift": shift,
                             "q3_max_gap": float(np.max(q3 - pot.series.on_grid(grid)))})


# ------------------------------------------------------------------ potential-free chain


def verify_potential_free(mu: CircleMeasure, nu: CircleMeasure, grid: int | None = None) -> list[InequalityReport]:
    """``W_1^2 <= H``, ``H <= I`` and ``H <= 2 sqrt(I) W_1 - W_1^2``."""
    w1 = modified_wasserstein(mu, nu, 1, grid).value
    h = relative_entropy_H(mu, nu)
    i = potential_free_I(mu, nu)
    d = digest(mu, nu)
    return [
        InequalityReport("ChainW1H", w1 * w1, h, None, d, True, {"w1": w1}),
        InequalityReport("ChainHI", h, i, None, d, True),
        InequalityReport("ChainHWI10", h, 2.0 * math.sqrt(i) * w1 - w1 * w1, None, d, True, {"w1": w1, "I": i}),
    ]


# ------------------------------------------------------------------ scalar lemma


def scalar_lemma_margin(aa, bb):
    """``(a - b) cot b - log(sin a / sin b) - (a - b)^2 / 2``; nonnegative on ``(0, pi)^2``."""
    aa, bb = np.asarray(aa, dtype=float), np.asarray(bb, dtype=float)
    if np.any((aa <= 0) | (aa >= np.pi) | (bb <= 0) | (bb >= np.pi)):
        raise ValueError("arguments must lie in the open interval (0, pi)")
    d = aa - bb
    out = d / np.tan(bb) - np.log(np.sin(aa) / np.sin(bb)) - 0.5 * d * d
    return out if out.ndim else float(out)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)
_GL_S = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


def remainder_integral(aa, bb):
    """``int_0^1 2 (1 - s) / sin^2(b + s (a - b)) ds`` by Gauss-Legendre."""
    aa, bb = np.broadcast_arrays(np.asarray(aa, dtype=float), np.asarray(bb, dtype=float))
    arg = bb[..., None] + _GL_S * (aa - bb)[..., None]
    return np.sum(_GL_W * 2.0 * (1.0 - _GL_S) / np.sin(arg) ** 2, axis=-1)


def h_function(bb: float, scan: int = 256) -> float:
    """``h(b) = inf_{a in (0, pi)} int_0^1 2 (1-s) / sin^2(b + s(a-b)) ds``.

    A coarse scan over ``a`` brackets the minimum, which a bounded
    golden-section/parabolic search then refines.
    """
    if not 0 < bb < np.pi:
        raise ValueError("b must lie in (0, pi)")
    eps = 1e-6
    grid = np.linspace(eps, np.pi - eps, scan)
    vals = remainder_integral(grid, np.full(scan, bb))
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, scan - 1)]
    r = minimize_scalar(lambda a: float(remainder_integral(a, bb)), bounds=(lo, hi),
                        method="bounded", options={"xatol": 1e-12})
    return float(min(r.fun, vals[k]))


def default_g(cap: float = 3.0, points: int = 1024):
    """Documented lower function ``g = min(h, cap)`` on a midpoint grid of ``(0, pi)``.

    ``g`` is even after reflection, at least 1, and touches 1 only at ``pi/2``.
    """
    b = (np.arange(points) + 0.5) * np.pi / points
    hv = np.array([h_function(x) for x in b])
    return b, np.minimum(hv, cap)


def improved_delta(g_values=None, b=None, cutoff: int = 400, tol: float = 1e-9) -> dict:
    """``delta = min_{n >= 1} (g^(0) - g^(n)) - 1`` for an even ``g`` sampled on ``(0, pi)``.

    ``g^(n) = (1/pi) int_0^pi g(x) cos(n x) dx``.  Modes up to ``cutoff`` are
    scanned; beyond it the proven limit ``(1/pi) int_0^pi g`` is used for the
    tail.  Returns the margin and the transport constant ``(1 + delta)/4``.
    """
    if g_values is None:
        b, g_values = default_g()
    g = np.asarray(g_values, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(g < 1.0 - tol):
        raise ValueError("g must satisfy g >= 1")
    hv = np.array([h_function(x) for x in b[:: max(1, b.size // 64)]])
    if np.any(g[:: max(1, b.size // 64)] > hv + 1e-8):
        raise ValueError("g must satisfy g <= h")
    if not np.allclose(g, g[::-1], atol=1e-8):
        raise ValueError("g must be symmetric about pi/2")
    w = np.full(b.size, np.pi / b.size)
    ghat0 = float(np.sum(g * w)) / np.pi
    n = np.arange(1, cutoff + 1)
    ghat = (np.cos(np.outer(n, b)) @ (g * w)) / np.pi
    diffs = ghat0 - ghat
    tail = ghat0
    delta = float(min(diffs.min(), tail)) - 1.0
    return {"delta": delta, "argmin_n": int(n[np.argmin(diffs)]), "tail_limit": tail,
            "transport_constant": (1.0 + delta) / 4.0}


# ------------------------------------------------------------------ sharpness exploration


def sharpness_ratios(Q: Potential, mu: CircleMeasure, grid: int | None = None, standard: bool = True) -> dict | None:
    """``(E_Q(mu) - E_Q) / W_2^2`` and ``I_Q / (4 (E_Q(mu) - E_Q))``; ``None`` when degenerate."""
    inst = _Instance(Q, mu, grid)
    if inst.gap <= 1e-14 or inst.w2 <= 1e-12:
        return None
    out = {"transport_ratio": inst.gap / inst.w2 ** 2, "lsi_ratio": inst.info / (4.0 * inst.gap),
           "gap": inst.gap, "w2": inst.w2}
    if standard:
        ws = circle_wasserstein(mu, inst.eq.measure, 2)
        out["transport_ratio_standard"] = inst.gap / ws ** 2 if ws > 1e-12 else math.inf
        out["hwi_standard_rhs"] = math.sqrt(max(inst.info, 0)) * ws
    return out


def sharpness_scan(Q: Potential, family: str, count: int, seed: int = 42, grid: int | None = None,
                   standard: bool = True) -> dict:
    """Minimum transport and LSI ratios over ``count`` draws from ``family``.

    Exploration only: no verdict is attached.  Degenerate draws are skipped.
    """
    rows = []
    for i in range(count):
        mu, meta = family_measure(family, rng_for(seed, "sharpness", i), i)
        r = sharpness_ratios(Q, mu, grid, standard)
        if r is not None:
            rows.append(dict(r, index=i, **meta))
    return summarize_sharpness(rows, family, count)


def summarize_sharpness(rows, family, count) -> dict:
    t = [r["transport_ratio"] for r in rows]
    l = [r["lsi_ratio"] for r in rows]
    ts = [r["transport_ratio_standard"] for r in rows if "transport_ratio_standard" in r]
    out = {"family": family, "instances": len(rows), "skipped": count - len(rows),
           "min_transport_ratio": min(t) if t else None, "min_lsi_ratio": min(l) if l else None,
           "min_transport_ratio_standard": min(ts) if ts else None,
           "transport_exceeds_half": bool(min(t) > 0.5) if t else None,
           "lsi_exceeds_half": bool(min(l) > 0.5) if l else None}
    if t:
        out["argmin_transport"] = rows[int(np.argmin(t))]
    return out


# ------------------------------------------------------------------ experimental flow


def lsi_transport_flow(Q: Potential, g: FourierSeries, lam: float, rho: float, a: float = 1e-3,
                       times=None, grid: int = 512) -> dict:
    """Quantities along the flow used to pass from log-Sobolev to transport.

    ``g_t = U_t^lam g``, ``j_t = E_Q - E_{Q - (a + rho t) g_t}`` and
    ``nu_t`` the equilibrium of ``Q - h_t``.  Returns ``j_t / (a + rho t)``
    and ``(int g_t' d nu_t - lam)^2`` on the time grid; nothing is asserted.
    """
    times = np.linspace(0.0, 1.0, 11) if times is None else np.asarray(times, dtype=float)
    e_q = solve_equilibrium(Q).energy
    ratio, middle = [], []
    for t in times:
        gt = g.on_grid(grid) if t == 0 else hopf_lax(g, lam, float(t), grid).values
        gs = from_grid(gt).truncate(grid // 4)
        gs = FourierSeries(gs.coeffs, True)
        c = a + rho * t
        try:
            pert = solve_equilibrium(Q - c * gs)
        except FullSupportError:
            ratio.append(math.nan)
            middle.append(math.nan)
            continue
        j = e_q - pert.energy
        ratio.append(j / c)
        h = c * gs - j
        nu = solve_equilibrium(Q - h).measure
        middle.append(float(np.real(nu.integrate(circle_derivative(gs))) - lam) ** 2)
    return {"times": times, "j_over_scale": np.array(ratio), "middle_term": np.array(middle)}
