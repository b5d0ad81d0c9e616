"""Carleman weights, inequality ratios, cutoffs and random sweeps.

Weights (drift along the first axis, ``tau = t(1-t)``)::

    kappa = mu |x + R tau e1|^2 - R^2 tau / (8 mu)
    sigma = (1 + eps) R^2 tau / (16 mu)         (literal_sigma drops R^2)
    chi   = R^2 tau (1 - 2t) / 6

The Schrodinger ratio tests
``R sqrt(eps/(8 mu)) ||e^{kappa-sigma} v|| <= ||e^{kappa-sigma}(dv/dt - i(Delta+A)v)||``;
the parabolic ratio uses ``kappa - sigma + chi`` and ``dv/dt - (Delta+A)v``.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .diagnostics import _time_derivative
from .errors import DegenerateNorm, SupportViolation
from .grid import Grid, Trajectory, gradient_values, laplacian_values, norm_values, weighted_values
from .operators import (
    GeneratorSpec,
    PotentialSpec,
    carleman_quadratic,
    carleman_split,
    chi_value,
    commutator_closed_values,
    commutator_brute_values,
    kappa_value,
    matvec,
    sigma_value,
)

SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class CarlemanParams:
    mu_c: float
    epsilon: float
    R: float
    literal_sigma: bool = False

    def __post_init__(self):
        if not (self.mu_c > 0 and self.epsilon > 0 and self.R > 0):
            raise ValueError("mu_c, epsilon and R must be positive")

    @property
    def prefactor(self) -> float:
        return self.R * np.sqrt(self.epsilon / (8.0 * self.mu_c))

    @property
    def commutator_floor(self) -> float:
        """``eps R^2 / (8 mu)``: the lower bound per unit ``||f||^2``."""
        return self.epsilon * self.R ** 2 / (8.0 * self.mu_c)


def window_bounds(epsilon: float, gamma: float) -> tuple:
    """``((1+eps)^{3/2} / (2(1-eps)^3), gamma/(1+eps)]`` for the weight parameter."""
    lo = (1.0 + epsilon) ** 1.5 / (2.0 * (1.0 - epsilon) ** 3)
    return lo, gamma / (1.0 + epsilon)


def in_window(p: CarlemanParams, gamma: float) -> bool:
    lo, hi = window_bounds(p.epsilon, gamma)
    return lo < p.mu_c <= hi


def sample_window(rng: np.random.Generator, R: float, gamma_range=(0.75, 2.0),
                  eps_range=(0.02, 0.2)) -> tuple:
    """Draw ``(params, gamma)`` with ``mu_c`` uniform in a non-empty window."""
    while True:
        eps = rng.uniform(*eps_range)
        gamma = rng.uniform(*gamma_range)
        lo, hi = window_bounds(eps, gamma)
        if hi > lo:
            mu_c = rng.uniform(lo, hi)
            if mu_c > lo:
                return CarlemanParams(mu_c, eps, R), gamma


def weight_kappa(x, t, p: CarlemanParams):
    """``kappa`` at coordinates ``x`` (tuple of arrays or an ``(..., n)`` array)."""
    if isinstance(x, tuple):
        x1, r2 = x[0], sum(c * c for c in x)
    else:
        x = np.asarray(x, float)
        x1, r2 = x[..., 0], np.sum(x * x, axis=-1)
    return kappa_value(x1, r2, t, p.mu_c, p.R)


def weight_sigma(t, p: CarlemanParams):
    return sigma_value(t, p.mu_c, p.epsilon, p.R, p.literal_sigma)


def weight_chi(t, p: CarlemanParams):
    return chi_value(t, p.R)


# ---------------------------------------------------------------------------
# space-time test fields and ratios
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpaceTimeField:
    grid: Grid
    times: np.ndarray
    values: np.ndarray  # (Nt,) + grid.shape + (m,)


@dataclass(frozen=True)
class RatioResult:
    lhs: float
    rhs: float
    ratio: float
    degenerate: bool


def _bump(r: np.ndarray) -> np.ndarray:
    out = np.zeros_like(r, dtype=float)
    inside = np.abs(r) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


def random_bump_field(grid: Grid, m: int, rng: np.random.Generator, n_times: int = 257,
                      n_bumps: int = 2) -> SpaceTimeField:
    """Sum of tensor bumps (space ball x time interval) with random fiber mixing."""
    times = np.linspace(0.0, 1.0, n_times)
    vals = np.zeros((n_times,) + grid.shape + (m,), dtype=np.complex128)
    for _ in range(n_bumps):
        c = rng.uniform(-2.0, 2.0, size=grid.dim)
        rho = rng.uniform(1.5, 3.0)
        k = rng.uniform(-1.0, 1.0, size=grid.dim)
        r = np.sqrt(sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))) / rho
        space = _bump(r) * np.exp(1j * sum(ki * x for ki, x in zip(k, grid.coords)))
        t0 = rng.uniform(0.05, 0.35)
        t1 = rng.uniform(0.65, 0.95)
        tm, th = 0.5 * (t0 + t1), 0.5 * (t1 - t0)
        omega = rng.uniform(-4.0, 4.0)
        tprof = _bump((times - tm) / th) * np.exp(1j * omega * times)
        fib = rng.normal(size=m) + 1j * rng.normal(size=m)
        vals += (tprof.reshape((-1,) + (1,) * grid.dim) * space)[..., None] * fib
    return SpaceTimeField(grid, times, vals)


def check_support(v: SpaceTimeField, band: float = 0.05, tol: float = SUPPORT_TOL) -> bool:
    """True for the zero field; raises when mass touches the time ends or box edge."""
    mag = np.linalg.norm(v.values, axis=-1)
    peak = float(mag.max())
    if peak == 0.0:
        return True
    if float(max(mag[:2].max(), mag[-2:].max())) > tol * peak:
        raise SupportViolation("test field does not vanish near t = 0 and t = 1")
    edge = np.zeros(v.grid.shape, dtype=bool)
    for c in v.grid.coords:
        edge |= np.abs(c) >= (1.0 - band) * v.grid.half_width
    if float(mag[:, edge].max()) > tol * peak:
        raise SupportViolation("test field reaches the edge of the box")
    return False


def _support_mask(v: SpaceTimeField, pad: int = 2) -> np.ndarray:
    """Space-time support of ``v`` dilated by ``pad`` samples in every direction.

    ``P v`` vanishes off this set; masking stops the spectral rounding floor
    from being amplified by the weight far from the support.
    """
    mask = np.any(v.values != 0, axis=-1)
    for axis in range(mask.ndim):
        grown = mask.copy()
        for k in range(1, pad + 1):
            grown |= np.roll(mask, k, axis=axis) | np.roll(mask, -k, axis=axis)
        mask = grown
    return mask


def _carleman_ratio(v: SpaceTimeField, gen: GeneratorSpec, p: CarlemanParams,
                    parabolic: bool) -> RatioResult:
    if check_support(v):
        return RatioResult(0.0, 0.0, float("nan"), True)
    grid = v.grid
    weight = carleman_quadratic(p.mu_c, p.epsilon, p.R, parabolic, p.literal_sigma)
    z = 1.0 if parabolic else 1j
    dvdt = _time_derivative(v.times, v.values)
    mask = _support_mask(v)
    lhs2 = rhs2 = 0.0
    dt = float(v.times[1] - v.times[0])
    for j, t in enumerate(v.times):
        u = v.values[j]
        if not mask[j].any():
            continue
        phi = weight.nodal(grid, float(t))["phi"]
        Pv = dvdt[j] - z * (laplacian_values(grid, u) + matvec(gen.matrix, u))
        Pv = np.where(mask[j][..., None], Pv, 0.0)
        lhs2 += norm_values(grid, weighted_values(u, phi)) ** 2
        rhs2 += norm_values(grid, weighted_values(Pv, phi)) ** 2
    lhs = p.prefactor * np.sqrt(lhs2 * dt)
    rhs = np.sqrt(rhs2 * dt)
    if lhs == 0.0:
        return RatioResult(0.0, float(rhs), float("nan"), True)
    return RatioResult(float(lhs), float(rhs), float(rhs / lhs), False)


def carleman_ratio_schrodinger(v: SpaceTimeField, gen: GeneratorSpec, p: CarlemanParams) -> RatioResult:
    return _carleman_ratio(v, gen, p, parabolic=False)


def carleman_ratio_parabolic(v: SpaceTimeField, gen: GeneratorSpec, p: CarlemanParams) -> RatioResult:
    return _carleman_ratio(v, gen, p, parabolic=True)


def commutator_check(f: np.ndarray, grid: Grid, gen: GeneratorSpec, p: CarlemanParams, t: float,
                     parabolic: bool = False) -> dict:
    """Closed form, brute-force value and the floor ``eps R^2/(8 mu) ||f||^2`` at one ``t``."""
    split = carleman_split(p.mu_c, p.epsilon, p.R, parabolic, p.literal_sigma)
    closed = commutator_closed_values(split, grid, f, t)
    brute = float(commutator_brute_values(split, gen, grid, f, t).real)
    floor = p.commutator_floor * norm_values(grid, f) ** 2
    return {"closed": closed, "brute": brute, "floor": floor,
            "rel_diff": abs(closed - brute) / max(abs(closed), 1e-300)}


# ---------------------------------------------------------------------------
# cutoffs
# ---------------------------------------------------------------------------

_PROFILES = {
    # smooth step S on [0, 1] with S(0)=0, S(1)=1 and vanishing derivatives at both ends
    "C2": (np.array([0, 0, 0, 10, -15, 6], float)),
    "C4": (np.array([0, 0, 0, 0, 0, 126, -420, 540, -315, 70], float)),
}


def _step(r: np.ndarray, order: str, deriv: int = 0) -> np.ndarray:
    coef = np.polynomial.polynomial.Polynomial(_PROFILES[order])
    poly = coef.deriv(deriv) if deriv else coef
    rc = np.clip(r, 0.0, 1.0)
    out = poly(rc)
    if deriv:
        out = np.where((r <= 0.0) | (r >= 1.0), 0.0, out)
    return out


@dataclass(frozen=True)
class CutoffSpec:
    M: float
    R_t: float
    profile: str = "C4"

    def __post_init__(self):
        if self.M <= 0 or self.R_t <= 2:
            raise ValueError("need M > 0 and R_t > 2")
        if self.profile not in _PROFILES:
            raise ValueError(f"profile must be one of {sorted(_PROFILES)}")

    def theta(self, grid: Grid) -> tuple:
        """``(theta, grad theta list, laplacian theta)`` on the grid."""
        rad = np.sqrt(grid.r2)
        r = (rad - self.M) / self.M
        th = 1.0 - _step(r, self.profile)
        d1 = -_step(r, self.profile, 1) / self.M
        d2 = -_step(r, self.profile, 2) / self.M ** 2
        safe = np.where(rad > 0, rad, 1.0)
        grad = [d1 * c / safe for c in grid.coords]
        lap = d2 + np.where(rad > 0, d1 * (grid.dim - 1) / safe, 0.0)
        return th, grad, lap

    def eta(self, t) -> tuple:
        """``(eta_R(t), eta_R'(t))``."""
        t = np.asarray(t, float)
        w = 1.0 / (2.0 * self.R_t)
        up = (t - w) / w
        down = (1.0 - w - t) / w
        val = _step(up, self.profile) * _step(down, self.profile)
        der = (_step(up, self.profile, 1) / w) * _step(down, self.profile) \
            - _step(up, self.profile) * (_step(down, self.profile, 1) / w)
        return val, der


@dataclass(frozen=True)
class CutoffResult:
    times: np.ndarray
    v: np.ndarray
    source: np.ndarray


def cutoff_compose(u: Trajectory, c: CutoffSpec) -> CutoffResult:
    """``v = eta_R(t) theta_M(x) u`` and the commutator source

    ``eta' theta u - i eta (2 grad theta . grad u + u Delta theta)``,
    i.e. ``dv/dt - i(Delta + A + V) v`` whenever ``u`` solves the
    Schrodinger equation with the same ``A`` and ``V``.
    """
    grid = u.grid
    th, gth, lth = c.theta(grid)
    eta, deta = c.eta(u.times)
    vs, srcs = [], []
    for j in range(len(u)):
        uj = u.values[j]
        v = eta[j] * th[..., None] * uj
        src = deta[j] * th[..., None] * uj
        if eta[j] != 0.0:
            Du = gradient_values(grid, uj)
            comm = sum(2.0 * g[..., None] * D for g, D in zip(gth, Du)) + lth[..., None] * uj
            src = src - 1j * eta[j] * comm
        vs.append(v)
        srcs.append(src)
    return CutoffResult(u.times, np.stack(vs), np.stack(srcs))


def cutoff_residual(u: Trajectory, c: CutoffSpec, gen: GeneratorSpec,
                    pot: Optional[PotentialSpec] = None) -> dict:
    """Compare ``dv/dt - i(Delta + A + V)v`` with the returned source (interior samples)."""
    grid = u.grid
    res = cutoff_compose(u, c)
    dvdt = _time_derivative(res.times, res.v)
    num = den = vn = 0.0
    for j in range(2, len(u) - 2):
        v = res.v[j]
        Lv = laplacian_values(grid, v) + matvec(gen.matrix, v)
        if pot is not None:
            Lv = Lv + matvec(pot.sample(grid, float(res.times[j])), v)
        r = dvdt[j] - 1j * Lv - res.source[j]
        num += norm_values(grid, r) ** 2
        den += norm_values(grid, res.source[j]) ** 2
        vn += norm_values(grid, v) ** 2
    return {"relative_to_source": float(np.sqrt(num / den)) if den else 0.0,
            "relative_to_field": float(np.sqrt(num / vn)) if vn else 0.0}


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

SWEEP_COLUMNS = ("seed", "mu_c", "epsilon", "R", "lhs", "rhs", "ratio")


def carleman_sweep(grid: Grid, gen: GeneratorSpec, seeds, R_values=(8.0, 16.0, 32.0),
                   parabolic: bool = False, n_times: int = 257, base_seed: int = 0) -> list:
    """One row per seed; ``R`` cycles through ``R_values`` and parameters come from the window."""
    rows = []
    for k, seed in enumerate(seeds):
        rng = np.random.default_rng([base_seed, int(seed)])
        R = float(R_values[k % len(R_values)])
        p, _gamma = sample_window(rng, R)
        v = random_bump_field(grid, gen.fiber_dim, rng, n_times=n_times)
        r = _carleman_ratio(v, gen, p, parabolic)
        rows.append({"seed": int(seed), "mu_c": p.mu_c, "epsilon": p.epsilon, "R": R,
                     "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio})
    return rows


def write_sweep_csv(rows: list, path: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(float(row[k])) if k != "seed" else row[k]) for k in SWEEP_COLUMNS})
