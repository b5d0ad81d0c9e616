"""Operator data: Hermitian generator ``A``, matrix potentials ``V = V1 + V2``,
the nodal form ``Phi(A, V)`` and the symmetric/skew splitting of the
Gaussian-conjugated generator together with its commutator form.

Conjugation convention: for ``f = exp(gamma*phi) u`` and
``du/dt = z (Delta + A) u`` with ``z = a + ib``, one has ``df/dt = (S + K) f``
where

    S = a(Delta + A + gamma^2 |grad phi|^2) - i b gamma T + gamma phi_t
    K = i b(Delta + A + gamma^2 |grad phi|^2) - a gamma T
    T = 2 grad phi . grad + Delta phi

``T`` is discretized in the skew form ``sum_k (phi_k D_k + D_k phi_k)`` so
``S`` is exactly symmetric and ``K`` exactly skew on the grid.

Every weight here is quadratic, ``phi = q(t)|x + d(t) e1|^2 + p(t)``, which
covers the plain Gaussian ``|x|^2``, the shrinking parabolic weight and the
two Carleman weights. For this family the commutator has the closed form

    <(S_t + [S,K]) f, f> = gamma int phi_tt |f|^2
        + 4 a gamma^2 int (grad phi . grad phi_t)|f|^2
        - 2 i b gamma <T_t f, f>
        + 8 q gamma (a^2+b^2) (||grad f||^2 + gamma^2 int |grad phi|^2 |f|^2)
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np

from .errors import NotHermitian, ShapeMismatch, UnsupportedWeightKind, WeightOverflow
from .grid import (
    _LOG_WEIGHT_LIMIT,
    Field,
    Grid,
    gradient_values,
    inner_values,
    laplacian_values,
)
from .linalg import hermitian_defect, spectral_norms
from .weights import ParabolicWeight, WeightParams, mu

HERMITIAN_TOL = 1e-12


# ---------------------------------------------------------------------------
# generator
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GeneratorSpec:
    """Constant Hermitian fiber matrix ``A``."""

    matrix: np.ndarray

    def __post_init__(self):
        A = np.array(self.matrix, dtype=np.complex128)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ShapeMismatch(f"generator must be square, got shape {A.shape}")
        if hermitian_defect(A) > HERMITIAN_TOL:
            raise NotHermitian(f"generator is not Hermitian (defect {hermitian_defect(A):.2e})")
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    @property
    def fiber_dim(self) -> int:
        return self.matrix.shape[0]


def zero_generator(m: int) -> GeneratorSpec:
    return GeneratorSpec(np.zeros((m, m)))


def system_matrix(g, s: float, N: int) -> np.ndarray:
    """``a_{mj} = g_m 2^{s j}`` for ``m, j = 1..N`` (not symmetric in general)."""
    g = np.asarray(g, dtype=float)
    if g.size != N:
        raise ShapeMismatch(f"need {N} coefficients g_m, got {g.size}")
    j = np.arange(1, N + 1)
    return g[:, None] * (2.0 ** (s * j))[None, :]


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

Coords = tuple
MatrixFn1 = Callable[[Coords], np.ndarray]
MatrixFn2 = Callable[[Coords, float], np.ndarray]


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """``V(x,t) = V1(x) + V2(x,t)`` as nodal stacks of ``m x m`` matrices.

    ``v1(coords)`` and ``v2(coords, t)`` take a tuple of coordinate arrays
    (one per axis, all of one shape) and return that shape ``+ (m, m)``;
    ``None`` means the part vanishes. Taking coordinates rather than a grid
    lets callers sample at rescaled points.
    """

    fiber_dim: int
    v1: Optional[MatrixFn1] = None
    v2: Optional[MatrixFn2] = None
    hermitian_v1: bool = True
    hermitian_v2: bool = True
    registry_id: str = "custom"
    params: dict = dc_field(default_factory=dict)
    _cache: dict = dc_field(default_factory=dict, repr=False)

    @property
    def has_v1(self) -> bool:
        return self.v1 is not None

    @property
    def has_v2(self) -> bool:
        return self.v2 is not None

    @property
    def hermitian(self) -> bool:
        return (not self.has_v1 or self.hermitian_v1) and (not self.has_v2 or self.hermitian_v2)

    def _check(self, M: np.ndarray, shape: tuple, hermitian: bool, label: str) -> np.ndarray:
        M = np.asarray(M, dtype=np.complex128)
        want = tuple(shape) + (self.fiber_dim, self.fiber_dim)
        if M.shape != want:
            M = np.broadcast_to(M, want).copy()
        if not np.all(np.isfinite(M)):
            raise FloatingPointError(f"{label} has non-finite entries")
        if hermitian and hermitian_defect(M) > HERMITIAN_TOL * max(1.0, float(np.abs(M).max())):
            raise NotHermitian(f"{label} flagged Hermitian but is not")
        return M

    def sample_v1(self, grid: Grid) -> np.ndarray:
        m = self.fiber_dim
        if not self.has_v1:
            return np.zeros(grid.shape + (m, m), dtype=np.complex128)
        key = ("v1", grid)
        if key not in self._cache:
            M = self._check(self.v1(grid.coords), grid.shape, self.hermitian_v1, "V1")
            M.setflags(write=False)
            self._cache[key] = M
        return self._cache[key]

    def sample_v2(self, grid: Grid, t: float) -> np.ndarray:
        m = self.fiber_dim
        if not self.has_v2:
            return np.zeros(grid.shape + (m, m), dtype=np.complex128)
        return self._check(self.v2(grid.coords, float(t)), grid.shape, self.hermitian_v2, "V2")

    def sample_at(self, coords: Coords, t: float) -> np.ndarray:
        """``V(x, t)`` at arbitrary coordinate arrays (no caching)."""
        shape = np.shape(coords[0])
        m = self.fiber_dim
        out = np.zeros(tuple(shape) + (m, m), dtype=np.complex128)
        if self.has_v1:
            out += self._check(self.v1(coords), shape, self.hermitian_v1, "V1")
        if self.has_v2:
            out += self._check(self.v2(coords, float(t)), shape, self.hermitian_v2, "V2")
        return out

    def sample(self, grid: Grid, t: float) -> np.ndarray:
        if not self.has_v2:
            return self.sample_v1(grid)
        return self.sample_v1(grid) + self.sample_v2(grid, t)

    def v1_only(self) -> "PotentialSpec":
        return PotentialSpec(self.fiber_dim, v1=self.v1, hermitian_v1=self.hermitian_v1,
                             registry_id=self.registry_id + ":v1", params=self.params)

    def v2_only(self) -> "PotentialSpec":
        return PotentialSpec(self.fiber_dim, v2=self.v2, hermitian_v2=self.hermitian_v2,
                             registry_id=self.registry_id + ":v2", params=self.params)


def zero_potential(m: int) -> PotentialSpec:
    return PotentialSpec(m, registry_id="zero")


def _r2(coords: Coords) -> np.ndarray:
    return sum(c * c for c in coords)


def _shape(coords: Coords) -> tuple:
    return tuple(np.shape(coords[0]))


def _profile(coords: Coords, width: float) -> np.ndarray:
    return np.exp(-_r2(coords) / (width * width))


def _matrix_param(value, m: int, default: str = "identity") -> np.ndarray:
    if value is None:
        if default == "identity":
            return np.eye(m, dtype=np.complex128)
        # nearest-neighbour hopping plus unit diagonal
        J = np.eye(m, dtype=np.complex128)
        for i in range(m - 1):
            J[i, i + 1] = J[i + 1, i] = 1.0
        return J
    M = np.asarray(value, dtype=np.complex128)
    if M.ndim == 0:
        return M * np.eye(m)
    if M.shape != (m, m):
        raise ShapeMismatch(f"matrix parameter must be {m}x{m}, got {M.shape}")
    return M


def _reg_zero(m: int) -> PotentialSpec:
    return zero_potential(m)


def _reg_constant(m: int, value=1.0, imag=None, part: str = "v1") -> PotentialSpec:
    M = _matrix_param(value, m)
    if imag is not None:
        M = M + 1j * _matrix_param(imag, m)
    herm = hermitian_defect(M) <= HERMITIAN_TOL
    params = {"value": value, "imag": imag, "part": part}
    if part == "v2":
        return PotentialSpec(m, v2=lambda c, t: np.broadcast_to(M, _shape(c) + (m, m)),
                             hermitian_v2=herm, registry_id="constant", params=params)
    return PotentialSpec(m, v1=lambda c: np.broadcast_to(M, _shape(c) + (m, m)),
                         hermitian_v1=herm, registry_id="constant", params=params)


def _reg_gaussian_well(m: int, depth: float = 1.0, width: float = 1.0, matrix=None) -> PotentialSpec:
    B = _matrix_param(matrix, m)

    def v1(g):
        return -depth * _profile(g, width)[..., None, None] * B

    return PotentialSpec(m, v1=v1, hermitian_v1=hermitian_defect(B) <= HERMITIAN_TOL,
                         registry_id="gaussian_well",
                         params={"depth": depth, "width": width, "matrix": matrix})


def _reg_gaussian_coupling(m: int, strength: float = 0.5, width: float = 1.5,
                           detuning: float = 0.0) -> PotentialSpec:
    J = np.zeros((m, m), dtype=np.complex128)
    for i in range(m - 1):
        J[i, i + 1] = J[i + 1, i] = 1.0
    J += detuning * np.diag(np.linspace(-1.0, 1.0, m))

    def v1(g):
        return strength * _profile(g, width)[..., None, None] * J

    return PotentialSpec(m, v1=v1, registry_id="gaussian_coupling",
                         params={"strength": strength, "width": width, "detuning": detuning})


def _reg_decaying_pulse(m: int, amplitude: float = 0.5, decay: float = 0.5,
                        omega: float = 3.0, static_depth: float = 0.0,
                        static_width: float = 1.0) -> PotentialSpec:
    """Time-dependent V2 = amplitude exp(-decay|x|^2) cos(omega t) J, optional static well."""
    J = _matrix_param(None, m, default="hopping")

    def v2(g, t):
        return amplitude * np.cos(omega * t) * np.exp(-decay * _r2(g))[..., None, None] * J

    v1 = None
    if static_depth:
        def v1(g):
            return -static_depth * _profile(g, static_width)[..., None, None] * np.eye(m)

    return PotentialSpec(m, v1=v1, v2=v2, registry_id="decaying_pulse",
                         params={"amplitude": amplitude, "decay": decay, "omega": omega,
                                 "static_depth": static_depth, "static_width": static_width})


def kernel_matrix(m: int, length: float = 0.5) -> np.ndarray:
    """Symmetric midpoint-quadrature matrix of ``k(y,y') = exp(-(y-y')^2/l^2)`` on [0,1]."""
    y = (np.arange(m) + 0.5) / m
    w = np.full(m, 1.0 / m)
    K = np.exp(-((y[:, None] - y[None, :]) / length) ** 2)
    return np.sqrt(w)[:, None] * K * np.sqrt(w)[None, :]


def _reg_integral_kernel(m: int, strength: float = 1.0, width: float = 1.5,
                         length: float = 0.5) -> PotentialSpec:
    K = kernel_matrix(m, length).astype(np.complex128)

    def v1(g):
        return strength * _profile(g, width)[..., None, None] * K

    return PotentialSpec(m, v1=v1, registry_id="integral_kernel",
                         params={"strength": strength, "width": width, "length": length})


def _reg_system_coupling(m: int, g=None, s: float = -1.0, strength: float = 0.25,
                         width: float = 1.5) -> PotentialSpec:
    gv = np.ones(m) if g is None else np.asarray(g, dtype=float)
    Araw = system_matrix(gv, s, m)
    H = 0.5 * (Araw + Araw.T).astype(np.complex128)

    def v1(grid):
        return strength * _profile(grid, width)[..., None, None] * H

    return PotentialSpec(m, v1=v1, registry_id="system_coupling",
                         params={"g": None if g is None else list(gv), "s": s,
                                 "strength": strength, "width": width})


POTENTIAL_REGISTRY = {
    "zero": _reg_zero,
    "constant": _reg_constant,
    "gaussian_well": _reg_gaussian_well,
    "gaussian_coupling": _reg_gaussian_coupling,
    "decaying_pulse": _reg_decaying_pulse,
    "integral_kernel": _reg_integral_kernel,
    "system_coupling": _reg_system_coupling,
}


def build_potential(name: str, m: int, **params) -> PotentialSpec:
    """Instantiate a registry potential by name."""
    try:
        builder = POTENTIAL_REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown potential {name!r}; known: {sorted(POTENTIAL_REGISTRY)}") from None
    return builder(m, **params)


def matvec(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Nodewise ``M(x) v(x)``; ``M`` is ``(m, m)`` or a nodal stack."""
    if M.ndim == 2:
        return v @ M.T
    return np.einsum("...ij,...j->...i", M, v)


def phi_form(gen: GeneratorSpec, pot: PotentialSpec, v: Field, t: float,
             coeff: complex) -> np.ndarray:
    """Nodal ``a Re<(A+V)v, v> - b Im<(A+V)v, v>`` (a real array of shape grid.shape)."""
    if v.fiber_dim != gen.fiber_dim or pot.fiber_dim != gen.fiber_dim:
        raise ShapeMismatch("fiber dimensions of field, generator and potential differ")
    z = complex(coeff)
    w = matvec(gen.matrix, v.values) + matvec(pot.sample(v.grid, t), v.values)
    q = np.sum(w * np.conj(v.values), axis=-1)
    return z.real * q.real - z.imag * q.imag


# ---------------------------------------------------------------------------
# quadratic weights and the S/K split
# ---------------------------------------------------------------------------

def _const(c: float):
    return lambda t: (float(c), 0.0, 0.0)


@dataclass(frozen=True)
class QuadraticWeight:
    """``phi(x,t) = q(t)|x + d(t) e1|^2 + p(t)``.

    ``q``, ``d`` and ``p`` map ``t`` to ``(value, first, second)`` time derivatives.
    """

    q: Callable = _const(1.0)
    d: Callable = _const(0.0)
    p: Callable = _const(0.0)
    label: str = "gaussian"

    def nodal(self, grid: Grid, t: float) -> dict:
        q, dq, ddq = self.q(t)
        d, dd, ddd = self.d(t)
        p, dp, ddp = self.p(t)
        y = list(grid.coords)
        y[0] = y[0] + d
        ry2 = sum(c * c for c in y)
        n = grid.dim
        grad = [2.0 * q * c for c in y]
        grad_t = [2.0 * dq * c for c in y]
        grad_t[0] = grad_t[0] + 2.0 * q * dd
        return {
            "q": q,
            "phi": q * ry2 + p,
            "grad": grad,
            "lap": 2.0 * n * q,
            "phi_t": dq * ry2 + 2.0 * q * dd * y[0] + dp,
            "grad_t": grad_t,
            "lap_t": 2.0 * n * dq,
            "phi_tt": ddq * ry2 + 4.0 * dq * dd * y[0] + 2.0 * q * ddd * y[0]
            + 2.0 * q * dd * dd + ddp,
            "grad_sq": 4.0 * q * q * ry2,
        }


def gaussian_weight() -> QuadraticWeight:
    return QuadraticWeight(label="gaussian")


def parabolic_quadratic(pw: ParabolicWeight) -> QuadraticWeight:
    """``q(t)|x|^2`` with the shrinking coefficient of the parabolic weight (gamma folded in)."""
    return QuadraticWeight(q=pw.q_derivs, label="parabolic")


def sigma_value(t, mu_c: float, eps: float, R: float, literal: bool = False):
    """``(1+eps) R^2 t(1-t)/(16 mu)``; ``literal=True`` drops the ``R^2``."""
    t = np.asarray(t, dtype=float)
    scale = 1.0 if literal else R * R
    return (1.0 + eps) * scale * t * (1.0 - t) / (16.0 * mu_c)


def kappa_value(x1, r2, t, mu_c: float, R: float):
    """``mu|x + R t(1-t) e1|^2 - R^2 t(1-t)/(8 mu)`` given ``x1`` and ``|x|^2``."""
    tau = t * (1.0 - t)
    d = R * tau
    return mu_c * (r2 + 2.0 * d * x1 + d * d) - R * R * tau / (8.0 * mu_c)


def chi_value(t, R: float):
    t = np.asarray(t, dtype=float)
    return R * R * t * (1.0 - t) * (1.0 - 2.0 * t) / 6.0


def carleman_quadratic(mu_c: float, eps: float, R: float, parabolic: bool = False,
                       literal_sigma: bool = False) -> QuadraticWeight:
    """``kappa - sigma`` (Schrodinger) or ``kappa - sigma + chi`` (parabolic) as a quadratic weight."""
    s_scale = 1.0 if literal_sigma else R * R
    # p(t) = -c * tau with tau = t - t^2
    c = R * R / (8.0 * mu_c) + (1.0 + eps) * s_scale / (16.0 * mu_c)

    def d(t):
        return R * t * (1.0 - t), R * (1.0 - 2.0 * t), -2.0 * R

    def p(t):
        val, first, second = -c * t * (1.0 - t), -c * (1.0 - 2.0 * t), 2.0 * c
        if parabolic:
            val += R * R * (t - 3 * t * t + 2 * t ** 3) / 6.0
            first += R * R * (1.0 - 6 * t + 6 * t * t) / 6.0
            second += R * R * (2.0 * t - 1.0)
        return val, first, second

    label = "carleman-parabolic" if parabolic else "carleman-schrodinger"
    return QuadraticWeight(q=_const(mu_c), d=d, p=p, label=label)


WEIGHT_KINDS = ("gaussian", "carleman-schrodinger", "carleman-parabolic")


@dataclass(frozen=True)
class SkewSplit:
    gamma: float
    coeff: complex
    weight_kind: str = "gaussian"
    weight: QuadraticWeight = dc_field(default_factory=gaussian_weight)

    def __post_init__(self):
        if self.weight_kind not in WEIGHT_KINDS:
            raise UnsupportedWeightKind(f"unsupported weight kind {self.weight_kind!r}")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if complex(self.coeff).real < 0:
            raise ValueError("coefficient a must be non-negative")
        object.__setattr__(self, "coeff", complex(self.coeff))

    @property
    def a(self) -> float:
        return self.coeff.real

    @property
    def b(self) -> float:
        return self.coeff.imag


def gaussian_split(gamma: float, coeff: complex, weight: QuadraticWeight | None = None) -> SkewSplit:
    return SkewSplit(gamma, coeff, "gaussian", weight or gaussian_weight())


def carleman_split(mu_c: float, eps: float, R: float, parabolic: bool = False,
                   literal_sigma: bool = False) -> SkewSplit:
    kind = "carleman-parabolic" if parabolic else "carleman-schrodinger"
    coeff = 1.0 if parabolic else 1j
    return SkewSplit(1.0, coeff, kind, carleman_quadratic(mu_c, eps, R, parabolic, literal_sigma))


def _apply_T(grid: Grid, grad: list, f: np.ndarray) -> np.ndarray:
    """Skew form of ``2 g . grad f + (div g) f`` for a real vector field ``g``."""
    out = np.zeros_like(f)
    Df = gradient_values(grid, f)
    for k, gk in enumerate(grad):
        gk = gk[..., None]
        out += gk * Df[k] + gradient_values(grid, gk * f)[k]
    return out


def _apply_L(grid: Grid, gen: GeneratorSpec, gamma: float, nod: dict, f: np.ndarray) -> np.ndarray:
    return laplacian_values(grid, f) + matvec(gen.matrix, f) + (gamma ** 2) * nod["grad_sq"][..., None] * f


def _coerce(v) -> tuple:
    if isinstance(v, Field):
        return v.grid, v.values
    raise TypeError("expected a Field")


def apply_S_values(split: SkewSplit, gen: GeneratorSpec, grid: Grid, f: np.ndarray, t: float) -> np.ndarray:
    g, a, b = split.gamma, split.a, split.b
    nod = split.weight.nodal(grid, t)
    out = a * _apply_L(grid, gen, g, nod, f) + g * nod["phi_t"][..., None] * f
    if b != 0.0 and g != 0.0:
        out = out - 1j * b * g * _apply_T(grid, nod["grad"], f)
    return out


def apply_K_values(split: SkewSplit, gen: GeneratorSpec, grid: Grid, f: np.ndarray, t: float) -> np.ndarray:
    g, a, b = split.gamma, split.a, split.b
    nod = split.weight.nodal(grid, t)
    out = 1j * b * _apply_L(grid, gen, g, nod, f)
    if a != 0.0 and g != 0.0:
        out = out - a * g * _apply_T(grid, nod["grad"], f)
    return out


def apply_S(split: SkewSplit, gen: GeneratorSpec, v: Field, t: float) -> Field:
    grid, f = _coerce(v)
    return Field(grid, apply_S_values(split, gen, grid, f, t))


def apply_K(split: SkewSplit, gen: GeneratorSpec, v: Field, t: float) -> Field:
    grid, f = _coerce(v)
    return Field(grid, apply_K_values(split, gen, grid, f, t))


def commutator_closed_values(split: SkewSplit, grid: Grid, f: np.ndarray, t: float) -> float:
    g, a, b = split.gamma, split.a, split.b
    nod = split.weight.nodal(grid, t)
    h = grid.cell_volume
    dens = np.sum(np.abs(f) ** 2, axis=-1)
    grad_dot = sum(p * q for p, q in zip(nod["grad"], nod["grad_t"]))
    total = g * h * np.sum(nod["phi_tt"] * dens)
    total += 4.0 * a * g * g * h * np.sum(grad_dot * dens)
    if b != 0.0:
        Tt = _apply_T(grid, nod["grad_t"], f)
        total += (-2j * b * g * inner_values(grid, Tt, f)).real
    grad_f2 = sum(h * np.sum(np.abs(D) ** 2) for D in gradient_values(grid, f))
    total += 8.0 * nod["q"] * g * (a * a + b * b) * (
        grad_f2 + g * g * h * np.sum(nod["grad_sq"] * dens))
    return float(total)


def commutator_brute_values(split: SkewSplit, gen: GeneratorSpec, grid: Grid, f: np.ndarray,
                            t: float, dt: float = 1e-4) -> complex:
    """``<(S_t + SK - KS) f, f>`` by operator composition and a centered difference in t."""
    St = (apply_S_values(split, gen, grid, f, t + dt)
          - apply_S_values(split, gen, grid, f, t - dt)) / (2.0 * dt)
    Kf = apply_K_values(split, gen, grid, f, t)
    Sf = apply_S_values(split, gen, grid, f, t)
    SK = apply_S_values(split, gen, grid, Kf, t)
    KS = apply_K_values(split, gen, grid, Sf, t)
    return inner_values(grid, St + SK - KS, f)


def commutator_form(split: SkewSplit, gen: GeneratorSpec, v: Field, t: float,
                    mode: str = "closed", dt: float = 1e-4) -> float:
    """``<(S_t + [S, K]) v, v>``; ``mode`` is ``"closed"`` or ``"brute"``."""
    if split.weight_kind not in WEIGHT_KINDS:
        raise UnsupportedWeightKind(split.weight_kind)
    grid, f = _coerce(v)
    if mode == "closed":
        return commutator_closed_values(split, grid, f, t)
    if mode == "brute":
        return float(commutator_brute_values(split, gen, grid, f, t, dt).real)
    raise ValueError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# weighted potential bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialBounds:
    M1: float
    M2: float
    weighted_v2_sup: float
    re_v2_sup: float
    n_times: int


def weighted_potential_bound(pot: PotentialSpec, weight: WeightParams, grid: Grid,
                             n_times: int = 64, band: float = 0.05) -> PotentialBounds:
    """Sampled ``M1 = sup ||V||`` and ``M2 = sup ||e^{|x|^2 mu^2} V2|| e^{2 sup ||Re V2||}``.

    Sampling on the grid nodes and ``n_times`` uniform times gives lower
    bounds of the true suprema. A weighted sup that is attained on the outer
    ``band`` of the box means the weighted norm is not controlled by the
    sampled set, so :class:`WeightOverflow` is raised.
    """
    times = np.linspace(0.0, 1.0, n_times)
    M1 = 0.0
    log_w_sup = -np.inf
    re_sup = 0.0
    edge = np.zeros(grid.shape, dtype=bool)
    for c in grid.coords:
        edge |= np.abs(c) >= (1.0 - band) * grid.half_width
    for t in times:
        V = pot.sample(grid, t)
        M1 = max(M1, float(spectral_norms(V).max()))
        if not pot.has_v2:
            continue
        V2 = pot.sample_v2(grid, t)
        nrm = spectral_norms(V2)
        if not np.any(nrm > 0):
            continue
        with np.errstate(divide="ignore"):
            logw = np.log(nrm) + grid.r2 * mu(t, weight) ** 2
        if float(logw.max()) > _LOG_WEIGHT_LIMIT:
            raise WeightOverflow(f"weighted V2 exceeds the representable range at t={t:.3f}")
        if float(logw[edge].max()) >= float(logw[~edge].max()):
            raise WeightOverflow(
                f"weighted V2 does not decay toward the box edge at t={t:.3f}; "
                "the weighted bound is unbounded")
        log_w_sup = max(log_w_sup, float(logw.max()))
        ReV2 = 0.5 * (V2 + np.conj(np.swapaxes(V2, -1, -2)))
        re_sup = max(re_sup, float(spectral_norms(ReV2).max()))
    wsup = 0.0 if log_w_sup == -np.inf else float(np.exp(log_w_sup))
    return PotentialBounds(M1=M1, M2=wsup * float(np.exp(2.0 * re_sup)),
                           weighted_v2_sup=wsup, re_v2_sup=re_sup, n_times=n_times)
