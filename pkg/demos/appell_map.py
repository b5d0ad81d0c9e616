"""The Appell change of variables applied to a free solution.

Evolve exp(-y^2/4) freely on s in [0, 1], map it with alpha = 1, beta = 2,
and check how well the result solves the transformed equation. The map at
alpha = beta is the identity, which is the second line of output.
"""
import numpy as np

from hardylab import AppellParams, EvolutionParams, appell_field, appell_solution_residual, gaussian_field, make_grid
from hardylab.operators import zero_generator
from hardylab.propagator import exact_free_trajectory

grid = make_grid(1, 32.0, 1024)
gen = zero_generator(1)
u = exact_free_trajectory(gaussian_field(grid, 0.25), gen, EvolutionParams(steps=1000))

p = AppellParams(1.0, 2.0)
res = appell_solution_residual(u, p, gen, times=np.linspace(0, 1, 101))
print(f"alpha=1, beta=2: relative residual {res.relative:.2e}")

same = appell_field(u, AppellParams(1.5, 1.5), [0.0, 0.5])
gap = np.linalg.norm(same.values[1] - u.at(0.5)) / np.linalg.norm(u.at(0.5))
print(f"alpha=beta:      distance from the input {gap:.1e}")

for t in (0.0, 0.5, 1.0):
    print(f"t={t:.1f}  s(t)={float(p.time_map(t)):.3f}  scale c(t)={float(p.scale(t)):.3f}")
