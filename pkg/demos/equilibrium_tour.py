"""Equilibrium measures, energies and the Hilbert transform for a few potentials.

Run:  python demos/equilibrium_tour.py
"""

import numpy as np

from freecircle import Potential, energy, solve_equilibrium
from freecircle.equilibrium import integral_formula_density, variational_residual
from freecircle.functionals import fisher_information_IQ, hilbert_series
from freecircle.measures import circle_derivative

potentials = {
    "zero": Potential.zero(),
    "0.4 cos x": Potential.cosine(0.4),
    "mixed": Potential.from_terms({1: 0.15 - 0.05j, -1: 0.15 + 0.05j, 3: 0.02, -3: 0.02}),
}

for name, Q in potentials.items():
    eq = solve_equilibrium(Q)
    m = 512
    gap = np.max(np.abs(integral_formula_density(Q, grid=m) - eq.density.on_grid(m)))
    h = hilbert_series(eq.measure) - circle_derivative(Q.series)
    print(f"{name:>10}:  E_Q = {eq.energy:+.6f}  C = {eq.constant_C:+.4f}  min density = {eq.min_density:.4f}")
    print(f"{'':>10}   variational residual {variational_residual(Q, eq.measure):.1e}, "
          f"integral formula gap {gap:.1e}, |H mu - Q'| {np.max(np.abs(h.coeffs)):.1e}, "
          f"I_Q(mu_Q) = {fisher_information_IQ(Q, eq.measure):.1e}")

# energy is minimal at the equilibrium: compare against a neighbouring density
Q = potentials["0.4 cos x"]
other = solve_equilibrium(Potential.cosine(0.3)).measure
print("\nE_Q(other) - E_Q =", energy(Q, other) - solve_equilibrium(Q).energy)
