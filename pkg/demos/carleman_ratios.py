"""Random space-time bumps against the two Carleman inequalities.

Draws a few compactly supported test fields for each R, with weight
parameters sampled in the admissible window, and prints rhs/lhs. Every ratio should be
at least one; in practice they sit far above it.
"""
import numpy as np

from hardylab import GeneratorSpec, carleman_ratio_parabolic, carleman_ratio_schrodinger, make_grid
from hardylab.carleman import random_bump_field, sample_window

grid = make_grid(1, 16.0, 512)
gen = GeneratorSpec(np.array([[0.3, 0.1], [0.1, -0.2]]))
rng = np.random.default_rng(1)

print(f"{'R':>5} {'mu_c':>7} {'eps':>7} {'schrodinger':>12} {'parabolic':>10}")
for R in (8.0, 16.0, 32.0):
    for _ in range(3):
        p, _ = sample_window(rng, R)
        v = random_bump_field(grid, 2, rng, n_times=129)
        rs = carleman_ratio_schrodinger(v, gen, p).ratio
        rp = carleman_ratio_parabolic(v, gen, p).ratio
        print(f"{R:>5.0f} {p.mu_c:>7.3f} {p.epsilon:>7.3f} {rs:>12.2f} {rp:>10.2f}")
