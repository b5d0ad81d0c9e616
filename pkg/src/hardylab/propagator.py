"""Time evolution for ``du/dt = z [Delta u + A u + V(x,t) u + F(x,t)]``, ``z = a + ib``.

Schemes
-------
free flow      exact per Fourier mode: ``exp(z t (A - |xi|^2))``
strang-split   half potential step (V at the step midpoint), exact spectral
               step, half potential step; a source enters as ``dt z F(t_mid)``
               between two half spectral steps
duhamel        Picard iteration on the variation-of-constants formula with
               ``W = Delta + A + V1`` and trapezoid quadrature in time
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import Blowup, NegativeTimeDissipative, NoConvergence
from .grid import (
    Field,
    Grid,
    Trajectory,
    containment_check,
    fft_values,
    ifft_values,
    norm_values,
)
from .linalg import expm, expm_hermitian
from .operators import GeneratorSpec, PotentialSpec, matvec

SCHEMES = ("exact-free", "strang-split", "duhamel")
BLOWUP_FACTOR = 1e12

Source = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class EvolutionParams:
    coeff_a: float = 0.0
    coeff_b: float = 1.0
    t_end: float = 1.0
    steps: int = 1000
    scheme: str = "strang-split"
    record_every: int = 1
    containment_tol: Optional[float] = 1e-12
    picard_tol: float = 1e-10
    picard_max_iter: int = 50

    def __post_init__(self):
        if self.coeff_a < 0:
            raise ValueError("coeff_a must be >= 0: backward dissipative flow is ill-posed")
        if not 0.0 < self.t_end <= 1.0:
            raise ValueError("t_end must lie in (0, 1]")
        if self.steps < 1 or self.record_every < 1:
            raise ValueError("steps and record_every must be positive")
        if self.steps % self.record_every:
            raise ValueError("steps must be a multiple of record_every")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def coeff(self) -> complex:
        return complex(self.coeff_a, self.coeff_b)

    @property
    def dt(self) -> float:
        return self.t_end / self.steps

    def digest(self) -> dict:
        return {"a": self.coeff_a, "b": self.coeff_b, "t_end": self.t_end,
                "steps": self.steps, "scheme": self.scheme, "record_every": self.record_every}


@dataclass(frozen=True)
class RegularizedFlowParams:
    epsilon: float
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")

    @property
    def alpha_eps(self) -> float:
        return self.alpha + 2.0 * self.epsilon

    @property
    def beta_eps(self) -> float:
        return self.beta + 2.0 * self.epsilon

    @property
    def gamma_eps(self) -> float:
        return self.gamma / (1.0 + 4.0 * self.gamma * self.epsilon)


# ---------------------------------------------------------------------------
# spectral building blocks
# ---------------------------------------------------------------------------

def _kinetic_factors(grid: Grid, gen: GeneratorSpec, z: complex, tau: float):
    """Scalar ``exp(-z tau |xi|^2)`` per mode and the fiber matrix ``exp(z tau A)``."""
    phase = np.exp(-z * tau * grid.xi2)[..., None]
    EA = expm_hermitian(gen.matrix, z * tau) if gen.fiber_dim > 1 else np.exp(z * tau * gen.matrix)
    return phase, EA


def _apply_kinetic(grid: Grid, factors, arr: np.ndarray) -> np.ndarray:
    phase, EA = factors
    hat = fft_values(grid, arr)
    return ifft_values(grid, phase * (hat @ EA.T))


def free_flow_values(grid: Grid, arr: np.ndarray, gen: GeneratorSpec, t: float, coeff: complex) -> np.ndarray:
    z = complex(coeff)
    if z.real > 0 and t < 0:
        raise NegativeTimeDissipative("dissipative flow (a > 0) cannot run backward in time")
    if t == 0:
        return np.array(arr, dtype=np.complex128)
    return _apply_kinetic(grid, _kinetic_factors(grid, gen, z, t), arr)


def free_flow(f: Field, gen: GeneratorSpec, t: float, coeff: complex) -> Field:
    """Exact solution of ``du/dt = z (Delta + A) u`` at time ``t`` started from ``f``."""
    return Field(f.grid, free_flow_values(f.grid, f.values, gen, t, coeff))


def _potential_exp(pot: PotentialSpec, grid: Grid, z: complex, tau: float, t: float) -> np.ndarray:
    V = pot.sample(grid, t)
    if pot.fiber_dim == 1:
        return np.exp(z * tau * V)
    if pot.hermitian:
        return expm_hermitian(V, z * tau)
    return expm(z * tau * V)


class _Stepper:
    """One Strang step of length ``dt`` for a fixed (grid, A, V, z)."""

    def __init__(self, grid: Grid, gen: GeneratorSpec, pot: Optional[PotentialSpec],
                 z: complex, dt: float, source: Optional[Source] = None):
        self.grid, self.z, self.dt, self.source = grid, z, dt, source
        self.pot = pot if (pot is not None and (pot.has_v1 or pot.has_v2)) else None
        self.full = _kinetic_factors(grid, gen, z, dt)
        self.half = _kinetic_factors(grid, gen, z, 0.5 * dt) if source is not None else None
        self._static = None
        if self.pot is not None and not self.pot.has_v2:
            self._static = _potential_exp(self.pot, grid, z, 0.5 * dt, 0.0)

    def _half_potential(self, t_mid: float) -> Optional[np.ndarray]:
        if self.pot is None:
            return None
        if self._static is not None:
            return self._static
        return _potential_exp(self.pot, self.grid, self.z, 0.5 * self.dt, t_mid)

    def step(self, u: np.ndarray, t: float) -> np.ndarray:
        t_mid = t + 0.5 * self.dt
        EV = self._half_potential(t_mid)
        if EV is not None:
            u = matvec(EV, u)
        if self.source is None:
            u = _apply_kinetic(self.grid, self.full, u)
        else:
            u = _apply_kinetic(self.grid, self.half, u)
            u = u + self.dt * self.z * np.asarray(self.source(t_mid), dtype=np.complex128)
            u = _apply_kinetic(self.grid, self.half, u)
        if EV is not None:
            u = matvec(EV, u)
        return u


def _guard(grid: Grid, u: np.ndarray, n0: float, tol: Optional[float], t: float) -> None:
    n = norm_values(grid, u)
    if not np.isfinite(n) or (n0 > 0 and n > BLOWUP_FACTOR * n0):
        raise Blowup(f"norm {n:.3e} at t={t:.4f} exceeds {BLOWUP_FACTOR:.0e} x initial")
    if tol is not None:
        containment_check(grid, u, tol=tol, label=f"solution at t={t:.4f}")


def split_step_flow(u0: Field, gen: GeneratorSpec, pot: Optional[PotentialSpec],
                    source: Optional[Source], params: EvolutionParams) -> Trajectory:
    """Strang-split evolution; records every ``record_every`` steps (and t = 0)."""
    grid = u0.grid
    z, dt = params.coeff, params.dt
    tol = params.containment_tol
    u = np.array(u0.values, dtype=np.complex128)
    n0 = norm_values(grid, u)
    if tol is not None:
        containment_check(grid, u, tol=tol, label="initial data")
    stepper = _Stepper(grid, gen, pot, z, dt, source)
    times, snaps = [0.0], [u.copy()]
    for j in range(params.steps):
        u = stepper.step(u, j * dt)
        if (j + 1) % params.record_every == 0:
            t = (j + 1) * dt
            _guard(grid, u, n0, tol, t)
            times.append(t)
            snaps.append(u.copy())
    digest = params.digest() | {"scheme": "strang-split",
                                "potential": None if pot is None else pot.registry_id,
                                "source": source is not None}
    return Trajectory(grid, np.array(times), np.stack(snaps), digest)


def exact_free_trajectory(u0: Field, gen: GeneratorSpec, params: EvolutionParams) -> Trajectory:
    grid = u0.grid
    times = params.dt * np.arange(0, params.steps + 1, params.record_every)
    times[-1] = params.t_end
    snaps = [free_flow_values(grid, u0.values, gen, t, params.coeff) for t in times]
    return Trajectory(grid, times, np.stack(snaps), params.digest() | {"scheme": "exact-free"})


def duhamel_flow(u0: Field, gen: GeneratorSpec, pot_v1: Optional[PotentialSpec],
                 pot_v2: Optional[PotentialSpec], params: EvolutionParams) -> Trajectory:
    """Variation of constants around ``W = Delta + A + V1`` solved by Picard iteration.

    With ``E`` one Strang step of ``exp(dt z W)`` and ``g_j = z V2(t_j) u_j``
    the integral term obeys the trapezoid recursion
    ``I_{j+1} = E[I_j + dt/2 g_j] + dt/2 g_{j+1}``. Iteration stops when the
    largest nodal change relative to ``max |u|`` is below ``picard_tol``.
    """
    grid = u0.grid
    z, dt, N = params.coeff, params.dt, params.steps
    tol = params.containment_tol
    v1 = pot_v1.v1_only() if pot_v1 is not None and pot_v1.has_v1 else None
    E = _Stepper(grid, gen, v1, z, dt)
    hom = np.empty((N + 1,) + u0.values.shape, dtype=np.complex128)
    hom[0] = u0.values
    for j in range(N):
        hom[j + 1] = E.step(hom[j], j * dt)
    has_v2 = pot_v2 is not None and pot_v2.has_v2
    increments = []
    u = hom
    if has_v2:
        V2 = [pot_v2.sample_v2(grid, j * dt) for j in range(N + 1)]
        scale = float(np.abs(hom).max()) or 1.0
        for it in range(params.picard_max_iter):
            g = np.stack([z * matvec(V2[j], u[j]) for j in range(N + 1)])
            new = np.empty_like(u)
            new[0] = hom[0]
            I = np.zeros_like(u[0])
            for j in range(N):
                I = E.step(I + 0.5 * dt * g[j], j * dt) + 0.5 * dt * g[j + 1]
                new[j + 1] = hom[j + 1] + I
            diff = float(np.abs(new - u).max()) / scale
            increments.append(norm_values(grid, new[-1] - u[-1]))
            u = new
            if diff < params.picard_tol:
                break
        else:
            raise NoConvergence(
                f"Picard iteration did not converge in {params.picard_max_iter} iterations "
                f"(last change {diff:.2e})")
    n0 = norm_values(grid, u0.values)
    if tol is not None:
        containment_check(grid, u0.values, tol=tol, label="initial data")
    idx = np.arange(0, N + 1, params.record_every)
    for j in idx[1:]:
        _guard(grid, u[j], n0, tol, j * dt)
    digest = params.digest() | {"scheme": "duhamel", "picard_iterations": len(increments),
                                "picard_increments": increments}
    return Trajectory(grid, dt * idx, u[idx].copy(), digest)


def evolve(u0: Field, gen: GeneratorSpec, pot: Optional[PotentialSpec],
           params: EvolutionParams, source: Optional[Source] = None) -> Trajectory:
    """Dispatch on ``params.scheme``."""
    if params.scheme == "exact-free":
        return exact_free_trajectory(u0, gen, params)
    if params.scheme == "duhamel":
        return duhamel_flow(u0, gen, pot, pot, params)
    return split_step_flow(u0, gen, pot, source, params)


# ---------------------------------------------------------------------------
# regularized flows
# ---------------------------------------------------------------------------

def semigroup_values(grid: Grid, arr: np.ndarray, gen: GeneratorSpec, pot_v1: Optional[PotentialSpec],
                     tau: float, dt: float = 1e-3) -> np.ndarray:
    """``exp(tau W) arr`` for ``tau >= 0`` by Strang steps no longer than ``dt``."""
    if tau == 0:
        return np.array(arr, dtype=np.complex128)
    if tau < 0:
        raise NegativeTimeDissipative("the dissipative semigroup needs tau >= 0")
    n = max(1, int(np.ceil(tau / dt - 1e-12)))
    v1 = pot_v1.v1_only() if pot_v1 is not None and pot_v1.has_v1 else None
    st = _Stepper(grid, gen, v1, 1.0, tau / n)
    u = np.array(arr, dtype=np.complex128)
    for j in range(n):
        u = st.step(u, 0.0)
    return u


def regularized_flow(u: Trajectory, gen: GeneratorSpec, pot_v1: Optional[PotentialSpec],
                     epsilon: float, dt: float = 1e-3) -> Trajectory:
    """Apply ``exp(eps t_j W)`` to every snapshot ``u(t_j)``."""
    RegularizedFlowParams(epsilon)
    snaps = np.stack([semigroup_values(u.grid, u.values[j], gen, pot_v1, epsilon * t, dt)
                      for j, t in enumerate(u.times)])
    return Trajectory(u.grid, u.times, snaps, dict(u.params_digest) | {"regularized_epsilon": epsilon})


def regularized_direct(u: Trajectory, gen: GeneratorSpec, pot: Optional[PotentialSpec],
                       epsilon: float, steps: Optional[int] = None, dt_semigroup: float = 1e-3) -> Trajectory:
    """Evolve ``du_eps/dt = (eps + i)(W u_eps + F_eps)`` from ``u(0)``.

    ``F_eps = i/(eps+i) exp(eps t W) V2 u`` is built from the recorded
    Schrodinger trajectory ``u`` (cubic interpolation in time); it vanishes
    when the potential has no time-dependent part.
    """
    RegularizedFlowParams(epsilon)
    grid = u.grid
    T = float(u.times[-1])
    steps = steps or (len(u.times) - 1)
    z = complex(epsilon, 1.0)
    source = None
    if pot is not None and pot.has_v2:
        F_nodes = np.stack([
            semigroup_values(grid, matvec(pot.sample_v2(grid, t), u.values[j]), gen, pot,
                             epsilon * t, dt_semigroup)
            for j, t in enumerate(u.times)]) * (1j / z)
        nodes_traj = Trajectory(grid, u.times, F_nodes)

        def source(t):
            return nodes_traj.at(t)

    v1 = pot.v1_only() if pot is not None and pot.has_v1 else None
    params = EvolutionParams(coeff_a=epsilon, coeff_b=1.0, t_end=T, steps=steps,
                             record_every=max(1, steps // (len(u.times) - 1)),
                             containment_tol=None)
    return split_step_flow(u.field(0), gen, v1, source, params)
