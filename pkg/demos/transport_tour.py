"""Modified and standard Wasserstein distances on the circle.

Run:  python demos/transport_tour.py
"""

import math

import numpy as np

from freecircle import CircleMeasure, circle_wasserstein, modified_wasserstein
from freecircle.instances import bump_measure, random_measure, rng_for
from freecircle.transport import admissible_pair, find_matching_cut, interval_wasserstein, spectral_w1_certificate

rng = rng_for(1, "demo")
mu, nu = random_measure(rng, 6), random_measure(rng, 6)

t = find_matching_cut(mu, nu)
print(f"matching cut t = {t:.6f}")
for s in (0.0, 1.0, 2.5, 4.0):
    u, v = admissible_pair(mu, nu, s, t)
    print(f"  cut pair ({u:.3f}, {v:.3f}) -> W2 = {interval_wasserstein(mu, u, nu, v, 2):.12f}")

for p in (1, 2, 3):
    print(f"p={p}:  modified {modified_wasserstein(mu, nu, p).value:.6f}   standard {circle_wasserstein(mu, nu, p):.6f}")

cert, _ = spectral_w1_certificate(mu, nu)
print(f"W1 dual certificate {cert:.6f} <= W1 {modified_wasserstein(mu, nu, 1).value:.6f}")

a, d = CircleMeasure.haar(), CircleMeasure.dirac(0.0)
print(f"\npoint mass vs uniform: closed form {modified_wasserstein(d, a, 2).value:.6f} "
      f"= (2 pi^3/3)^(1/2) = {math.sqrt(2 * math.pi ** 3 / 3):.6f}")
for k in (25.0, 100.0, 400.0):
    print(f"  bump kappa={k:>5}: modified W2 to uniform {modified_wasserstein(bump_measure(k, 0.0, 256), a, 2).value:.6f}"
          f"  (probability-normalized limit pi/sqrt(3) = {math.pi / math.sqrt(3):.6f})")
