"""Appell transformation between the ``(y, s)`` and ``(x, t)`` pictures.

For ``c(t) = sqrt(alpha beta) mu(t)``, ``s(t) = beta t mu(t)`` and
``eta = (alpha - beta)|x|^2 mu(t) / (4 z)``,

    u~(x, t) = c^{n/2} u(c x, s) exp(eta)

turns a solution of ``du/ds = z[Delta u + A u + V u + F]`` into a solution of

    du~/dt = z[Delta u~ + c^2 A u~ + V~ u~ + F~],
    V~ = c^2 V(c x, s),   F~ = c^{n/2 + 2} F(c x, s) exp(eta),

because ``ds/dt = alpha beta mu^2 = c^2``. The factor ``c^2`` on the fiber
generator is kept; ``literal_generator=True`` drops it for comparison.
Weighted norms map as ``||e^{gamma|x|^2} u~(t)|| = ||e^{nu(s)|y|^2} u(s)||``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import (
    Grid,
    Trajectory,
    containment_check,
    interpolate_scaled,
    laplacian_values,
    norm_values,
    weighted_values,
)
from .operators import GeneratorSpec, PotentialSpec, matvec
from .diagnostics import _time_derivative

ETA_FORMS = ("consistent", "literal")


@dataclass(frozen=True)
class AppellParams:
    alpha: float
    beta: float
    a: float = 0.0
    b: float = 1.0
    gamma: float = 0.0
    eta_form: str = "consistent"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("alpha and beta must be positive")
        if self.a ** 2 + self.b ** 2 == 0:
            raise ValueError("a + ib must be nonzero")
        if self.eta_form not in ETA_FORMS:
            raise ValueError(f"eta_form must be one of {ETA_FORMS}")

    @property
    def z(self) -> complex:
        return complex(self.a, self.b)

    @property
    def identity(self) -> bool:
        return self.alpha == self.beta

    def mu(self, t):
        return 1.0 / (self.alpha * (1.0 - np.asarray(t, float)) + self.beta * np.asarray(t, float))

    def scale(self, t):
        """Spatial factor ``c(t) = sqrt(alpha beta) mu(t)``."""
        return np.sqrt(self.alpha * self.beta) * self.mu(t)

    def time_map(self, t):
        """``s(t) = beta t mu(t)``, increasing from 0 to 1."""
        return self.beta * np.asarray(t, float) * self.mu(t)

    def eta(self, r2: np.ndarray, t: float) -> np.ndarray:
        if self.identity:
            return np.zeros_like(r2, dtype=np.complex128)
        d = self.alpha - self.beta
        if self.eta_form == "consistent":
            return d * r2 * float(self.mu(t)) / (4.0 * self.z)
        # typeset reading: denominator 4 z alpha (1-t) + beta t
        return d * r2 / (4.0 * self.z * self.alpha * (1.0 - t) + self.beta * t)

    def nu(self, s):
        """Weight exponent on ``u(s)`` matching ``exp(gamma |x|^2)`` on ``u~(t)``."""
        s = np.asarray(s, float)
        w = self.alpha * s + self.beta * (1.0 - s)
        out = (self.gamma * self.alpha * self.beta / w ** 2
               + (self.alpha - self.beta) * self.a / (4.0 * (self.a ** 2 + self.b ** 2) * w))
        return float(out) if out.ndim == 0 else out


def _transform_snapshot(grid: Grid, arr: np.ndarray, p: AppellParams, t: float,
                        outside: str, tol: float, power: float) -> np.ndarray:
    c = float(p.scale(t))
    moved = interpolate_scaled(grid, arr, c, outside=outside, tol=tol)
    if p.identity:
        return moved
    eta = p.eta(grid.r2, t)
    phase = np.exp(1j * eta.imag)[..., None]
    return weighted_values(c ** power * moved * phase, eta.real)


def default_times(u: Trajectory, n_out: Optional[int] = None) -> np.ndarray:
    if n_out is None:
        n_out = max(11, (len(u) - 1) // 4 + 1)
    return np.linspace(0.0, 1.0, n_out)


def appell_field(u: Trajectory, p: AppellParams, times=None, outside: str = "zero",
                 tol: float = 1e-12) -> Trajectory:
    """Transformed trajectory on the same grid at output ``times`` (uniform default).

    Source snapshots are interpolated in ``s`` by local cubics and in space
    by trigonometric interpolation at ``c(t) x``; points mapped outside the box
    are zero-filled after a containment check of the source snapshot
    (``outside="raise"`` raises instead).
    """
    if not np.isclose(u.times[-1], 1.0):
        raise ValueError("the source trajectory must cover s in [0, 1]")
    grid = u.grid
    times = default_times(u) if times is None else np.asarray(times, float)
    n = grid.dim
    snaps = []
    s_of_t = p.time_map(times)
    for t, s in zip(times, s_of_t):
        src = u.at(min(float(s), float(u.times[-1])))
        snaps.append(_transform_snapshot(grid, src, p, float(t), outside, tol, n / 2.0))
    digest = dict(u.params_digest) | {"appell": {"alpha": p.alpha, "beta": p.beta,
                                                 "s_of_t": s_of_t.tolist()}}
    return Trajectory(grid, times, np.stack(snaps), digest)


def appell_potential(pot: PotentialSpec, p: AppellParams) -> PotentialSpec:
    """``V~(x, t) = c(t)^2 V(c(t) x, s(t))``, returned as a time-dependent part."""
    if not (pot.has_v1 or pot.has_v2):
        return PotentialSpec(pot.fiber_dim, registry_id=f"appell({pot.registry_id})")

    def v2(coords, t):
        c = float(p.scale(t))
        return c * c * pot.sample_at(tuple(c * x for x in coords), float(p.time_map(t)))

    return PotentialSpec(pot.fiber_dim, v2=v2, hermitian_v2=pot.hermitian,
                         registry_id=f"appell({pot.registry_id})",
                         params={"alpha": p.alpha, "beta": p.beta, "source": pot.params})


def appell_potential_sup(pot: PotentialSpec, p: AppellParams, grid: Grid, n_times: int = 64) -> dict:
    """Sampled ``sup ||V~||`` next to ``sup ||V||`` and the factor ``max c^2``."""
    from .linalg import spectral_norms

    tv = appell_potential(pot, p)
    ts = np.linspace(0.0, 1.0, n_times)
    sup_t = max(float(spectral_norms(tv.sample(grid, t)).max()) for t in ts)
    sup_s = max(float(spectral_norms(pot.sample(grid, s)).max()) for s in p.time_map(ts))
    factor = float(np.max(p.scale(ts) ** 2))
    return {"transformed_sup": sup_t, "source_sup": sup_s, "factor": factor}


SourceFn = Callable[[tuple, float], np.ndarray]


def appell_source(F, p: AppellParams, grid: Grid, tol: float = 1e-12) -> Callable[[float], np.ndarray]:
    """``F~(x, t) = c^{n/2+2} F(c x, s) exp(eta)`` as a callable of ``t``.

    ``F`` is either a callable ``(coords, s) -> values`` or a source
    :class:`Trajectory` in ``s`` (interpolated like :func:`appell_field`).
    """
    n = grid.dim

    def out(t: float) -> np.ndarray:
        c = float(p.scale(t))
        s = float(p.time_map(t))
        if isinstance(F, Trajectory):
            base = interpolate_scaled(grid, F.at(s), c, tol=tol)
        else:
            base = np.asarray(F(tuple(c * x for x in grid.coords), s), dtype=np.complex128)
        if p.identity:
            return base
        eta = p.eta(grid.r2, t)
        return weighted_values(c ** (n / 2.0 + 2.0) * base * np.exp(1j * eta.imag)[..., None], eta.real)

    return out


@dataclass(frozen=True)
class ResidualReport:
    relative: float
    max_relative: float
    times: np.ndarray
    series: np.ndarray


def equation_residual(traj: Trajectory, z: complex, gen: GeneratorSpec,
                      pot: Optional[PotentialSpec] = None,
                      source: Optional[Callable[[float], np.ndarray]] = None,
                      generator_scale: Optional[Callable[[float], float]] = None) -> ResidualReport:
    """Discrete residual of ``du/dt = z[Delta u + g(t) A u + V u + F]`` on uniform samples.

    ``du/dt`` uses 4th-order centered differences; the two samples at each
    end are excluded. ``relative`` is the space-time L^2 ratio
    ``||residual|| / ||u||`` and ``max_relative`` the worst time slice.
    """
    grid = traj.grid
    times = traj.times
    if times.size < 7:
        raise ValueError("need at least 7 uniform samples")
    dudt = _time_derivative(times, traj.values)
    idx = range(2, times.size - 2)
    num, den, series = 0.0, 0.0, []
    for j in idx:
        t = float(times[j])
        u = traj.values[j]
        g = 1.0 if generator_scale is None else float(generator_scale(t))
        rhs = laplacian_values(grid, u) + g * matvec(gen.matrix, u)
        if pot is not None and (pot.has_v1 or pot.has_v2):
            rhs = rhs + matvec(pot.sample(grid, t), u)
        if source is not None:
            rhs = rhs + np.asarray(source(t))
        r = norm_values(grid, dudt[j] - z * rhs)
        un = norm_values(grid, u)
        num += r * r
        den += un * un
        series.append(r / un if un > 0 else 0.0)
    rel = float(np.sqrt(num / den)) if den > 0 else 0.0
    ts = times[2:-2]
    return ResidualReport(rel, float(max(series)), ts, np.array(series))


def appell_solution_residual(u: Trajectory, p: AppellParams, gen: GeneratorSpec,
                             pot: Optional[PotentialSpec] = None, source=None, times=None,
                             literal_generator: bool = False,
                             transformed: Optional[Trajectory] = None) -> ResidualReport:
    """Residual of the transformed trajectory in the transformed equation.

    Pass ``transformed`` to test a precomputed (for instance perturbed)
    ``u~`` instead of transforming ``u``.
    """
    ut = transformed if transformed is not None else appell_field(u, p, times)
    tpot = appell_potential(pot, p) if pot is not None else None
    tsrc = appell_source(source, p, u.grid) if source is not None else None
    gscale = None if literal_generator else (lambda t: float(p.scale(t)) ** 2)
    return equation_residual(ut, p.z, gen, tpot, tsrc, gscale)


def weighted_norm_pair(u: Trajectory, ut: Trajectory, p: AppellParams, j: int) -> tuple:
    """``(||e^{gamma|x|^2} u~(t_j)||, ||e^{nu(s)|y|^2} u(s_j)||)`` for output index ``j``."""
    grid = u.grid
    t = float(ut.times[j])
    s = float(p.time_map(t))
    left = norm_values(grid, weighted_values(ut.values[j], p.gamma * grid.r2))
    right = norm_values(grid, weighted_values(u.at(s), p.nu(s) * grid.r2))
    return left, right


def check_contained(u: Trajectory, tol: float = 1e-12) -> None:
    for j in range(len(u)):
        containment_check(u.grid, u.values[j], tol=tol, label=f"source snapshot {j}")
