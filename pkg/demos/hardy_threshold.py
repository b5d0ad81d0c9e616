"""Gaussian decay at two times, and where the product of the rates lands.

A handful of Gaussian initial data go through the free Schrodinger flow up
to T = 1. A Gaussian decay rate is fitted to |u| at both ends, and the
product of the two widths is printed. Data with the matched chirp sits exactly at 4T;
plain real Gaussians always land above it.
"""
import numpy as np

from hardylab import EvolutionParams, decay_fit, gaussian_field, hardy_classify, make_grid
from hardylab.diagnostics import hardy_product
from hardylab.operators import zero_generator
from hardylab.propagator import exact_free_trajectory

grid = make_grid(1, 16.0, 512)
gen = zero_generator(1)
T = 1.0

print(f"{'initial data':<28}{'product':>10}  class")
for label, coeff in [
    ("exp(-x^2)", 1.0),
    ("exp(-x^2/2)", 0.5),
    ("exp(-(1/4 + i/4) x^2)", 0.25 + 0.25j),
    ("exp(-(1 + i/4) x^2)", 1.0 + 0.25j),
]:
    u0 = gaussian_field(grid, coeff)
    tr = exact_free_trajectory(u0, gen, EvolutionParams(t_end=T, steps=10, record_every=10))
    f0, fT = decay_fit(tr.field(0)), decay_fit(tr.field(-1))
    print(f"{label:<28}{hardy_product(f0, fT):>10.4f}  {hardy_classify(f0, fT, T)}")
