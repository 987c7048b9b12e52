"""Chaos expansions on increment grids, and what refinement does to them.

A square-integrable functional of the Brownian increments over a grid of N
steps has a Fourier expansion in products of orthonormal Hermite polynomials
of the standardized increments.  Splitting every step into N1 substeps maps
each coefficient onto a cloud of fine-grid coefficients with explicit
weights, and the map is an isometry: no mass is lost, it just spreads out.
"""

import math

import numpy as np

from chaosco import chaos, montecarlo as mc
from chaosco.chaos import ChaosExpansion, GridSpec

# W_T^2 on a single step of a unit horizon: mean 1 plus sqrt(2) H_2
grid = GridSpec(T=1.0, N=1)
f = ChaosExpansion(grid, {(): 1.0, (2,): math.sqrt(2)})
print("one-step expansion of W_T^2:")
for a, c in f.items():
    print(f"  c_{a} = {c:.6f}")

# the same functional written on two half-steps
fine = chaos.refine(f, 2)
print("\nafter refining each step into 2 substeps:")
for a, c in fine.items():
    print(f"  c_{a} = {c:.6f}")
print(f"norm before {chaos.sobolev_norm(f, 0.0):.12f}, "
      f"after {chaos.sobolev_norm(fine, 0.0):.12f}  (isometry)")

# both describe the same random variable pathwise
rng = np.random.default_rng(0)
xi = rng.standard_normal((5, 2))
w_t = (xi[:, 0] + xi[:, 1]) / math.sqrt(2)
coarse_vals = chaos.evaluate(f, w_t[:, None])
fine_vals = chaos.evaluate(fine, xi)
print(f"max pathwise discrepancy: {np.max(np.abs(coarse_vals - fine_vals)):.2e}")

# terminal payoffs get their coefficients from one-dimensional quadrature
payoff = mc.PolynomialPayoff((0.0, 1.0, 0.5))  # x + x^2/2
g4 = mc.coeffs_terminal(payoff, GridSpec(1.0, 4), max_degree=4)
print(f"\nf(W_T) = x + x^2/2 on 4 steps: {len(g4.coeffs)} coefficients, "
      f"mean {g4.mean():.6f}")

# conditional expectation is a projection onto the leading slots
proj = chaos.conditional_expectation(g4, 2)
print(f"conditioned on the first half: {len(proj.coeffs)} coefficients, "
      f"norm {chaos.sobolev_norm(proj, 0.0):.6f} <= "
      f"{chaos.sobolev_norm(g4, 0.0):.6f}")
