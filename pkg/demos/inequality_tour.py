"""One instance of every inequality check, then the Q = 0 sharpness ratios.

Run:  python demos/inequality_tour.py
"""

import warnings

import numpy as np

from freecircle import CircleMeasure, Potential, solve_equilibrium
from freecircle.inequalities import (
    h_function,
    improved_delta,
    sharpness_ratios,
    verify_all,
    verify_brunn_minkowski,
    verify_houdre_kagan,
    verify_poincare,
    verify_potential_free,
)
from freecircle.instances import harmonic_measure, random_measure, random_potential, random_trig_poly, rng_for

rho = 0.3
rng = rng_for(7, "demo")
Q = random_potential(rng, 6, rho=rho)
mu = random_measure(rng, 6)


def show(r):
    print(f"  {r.name:<15} lhs {r.lhs:+.6e}  rhs {r.rhs:+.6e}  slack {r.slack:+.3e}  "
          f"{'pass' if r.passed else 'FAIL'}{'' if r.in_hypothesis else ' (out of hypothesis)'}")


print("convex potential, random measure:")
show(verify_poincare(solve_equilibrium(Q).measure, rho, random_trig_poly(rng, 8), Q))
for r in verify_all(Q, mu, rho).values():
    show(r)
for r in verify_houdre_kagan(random_trig_poly(rng, 7), 2):
    show(r)
with warnings.catch_warnings():
    warnings.simplefilter("ignore", RuntimeWarning)
    show(verify_brunn_minkowski(random_potential(rng, 4), random_potential(rng, 4), 0.4))

print("potential-free chain, random pair and a first-harmonic pair:")
for r in verify_potential_free(mu, random_measure(rng, 6)):
    show(r)
for r in verify_potential_free(harmonic_measure(0.1, 1), CircleMeasure.haar()):
    show(r)

print(f"\nh(pi/2) = {h_function(np.pi / 2):.10f},  h(0.3) = {h_function(0.3):.6f}")
d = improved_delta()
print(f"delta = {d['delta']:.4f} at n = {d['argmin_n']}, transport constant (1 + delta)/4 = {d['transport_constant']:.4f}")

print("\nQ = 0, harmonic perturbations (ratios approach n/2):")
for n in (1, 2, 4):
    r = sharpness_ratios(Potential.zero(), harmonic_measure(0.05, n))
    print(f"  n={n}: transport {r['transport_ratio']:.4f}  LSI {r['lsi_ratio']:.4f}  standard W2 {r['transport_ratio_standard']:.4f}")
