"""Periodic spectral discretization of R^n and H-valued grid fields.

Conventions
-----------
* The box is ``[-L, L)^n`` sampled with ``P`` points per axis, ``h = 2L/P``.
* Field values are stored with shape ``grid.shape + (m,)``: node-major,
  fiber coordinate last.
* The DFT is unitary (``norm="ortho"``), so the discrete Parseval identity
  holds for :func:`inner_product` on both sides of the transform.
* :func:`inner_product` is linear in its first argument and conjugate-linear
  in the second: ``(f, g) = h^n * sum f * conj(g)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Callable, Sequence, Union

import numpy as np

from .errors import (
    ContainmentViolation,
    InterpolationOutOfRange,
    InvalidDimension,
    NonPowerOfTwo,
    ShapeMismatch,
    WeightOverflow,
)

#: weighted field magnitudes above this raise :class:`WeightOverflow`
WEIGHT_LIMIT = 1e200
_LOG_WEIGHT_LIMIT = float(np.log(WEIGHT_LIMIT))
_EXP_SAFE = 700.0

WeightLike = Union[float, np.ndarray, Callable[..., np.ndarray]]


@dataclass(frozen=True)
class Grid:
    dim: int
    half_width: float
    points: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise InvalidDimension(f"dim must be 1, 2 or 3, got {self.dim}")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        p = int(self.points)
        if p != self.points or p < 8 or p & (p - 1):
            raise NonPowerOfTwo(f"points must be a power of two >= 8, got {self.points}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.points

    @property
    def shape(self) -> tuple:
        return (self.points,) * self.dim

    @property
    def size(self) -> int:
        return self.points ** self.dim

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def axes(self) -> tuple:
        return tuple(range(self.dim))

    @cached_property
    def x(self) -> np.ndarray:
        """1D node coordinates, shared by every axis."""
        return -self.half_width + self.spacing * np.arange(self.points)

    @cached_property
    def xi(self) -> np.ndarray:
        """1D angular frequencies ``pi*k/L`` in DFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)

    @property
    def frequencies(self) -> list:
        return [self.xi] * self.dim

    @cached_property
    def coords(self) -> tuple:
        return tuple(np.meshgrid(*([self.x] * self.dim), indexing="ij"))

    @cached_property
    def wavenumbers(self) -> tuple:
        return tuple(np.meshgrid(*([self.xi] * self.dim), indexing="ij"))

    @cached_property
    def r2(self) -> np.ndarray:
        return sum(c * c for c in self.coords)

    @cached_property
    def xi2(self) -> np.ndarray:
        return sum(k * k for k in self.wavenumbers)

    @cached_property
    def xi_grad(self) -> np.ndarray:
        """First-derivative symbol with the unpaired Nyquist mode set to zero."""
        xi = self.xi.copy()
        xi[self.points // 2] = 0.0
        return xi

    def broadcast_axis(self, arr1d: np.ndarray, axis: int) -> np.ndarray:
        shape = [1] * self.dim
        shape[axis] = self.points
        return arr1d.reshape(shape)

    def evaluate(self, w: WeightLike) -> np.ndarray:
        """Evaluate a scalar node function (constant, array or callable of coords)."""
        if callable(w):
            out = np.asarray(w(*self.coords))
        else:
            out = np.asarray(w)
        return np.broadcast_to(out, self.shape)


def make_grid(dim: int, half_width: float, points: int) -> Grid:
    return Grid(int(dim), float(half_width), int(points))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Field:
    """An H-valued grid function; ``values`` has shape ``grid.shape + (m,)``.

    Fields produced by :func:`apply_weight` remember the unweighted ``base``
    and the accumulated exponent ``log_weight`` so that composed weights are
    exponentiated exactly once per node.
    """

    grid: Grid
    values: np.ndarray
    base: np.ndarray | None = dc_field(default=None, repr=False)
    log_weight: np.ndarray | None = dc_field(default=None, repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128)
        if vals.shape == self.grid.shape:
            vals = vals[..., None]
        if vals.ndim != self.grid.dim + 1 or vals.shape[:-1] != self.grid.shape:
            raise ShapeMismatch(
                f"values shape {vals.shape} incompatible with grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise FloatingPointError("field contains non-finite entries")
        object.__setattr__(self, "values", _freeze(vals))

    @property
    def fiber_dim(self) -> int:
        return self.values.shape[-1]

    def __add__(self, other: "Field") -> "Field":
        _check_compatible(self, other)
        return Field(self.grid, self.values + other.values)

    def __sub__(self, other: "Field") -> "Field":
        _check_compatible(self, other)
        return Field(self.grid, self.values - other.values)

    def __mul__(self, c) -> "Field":
        return Field(self.grid, self.values * c)

    __rmul__ = __mul__


def make_field(grid: Grid, values) -> Field:
    return Field(grid, values)


def _check_compatible(f: Field, g: Field) -> None:
    if f.grid != g.grid or f.values.shape != g.values.shape:
        raise ShapeMismatch("fields live on different grids or fiber dimensions")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time samples of a field; ``values`` has shape ``(len(times),) + grid.shape + (m,)``."""

    grid: Grid
    times: np.ndarray
    values: np.ndarray
    params_digest: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape[0] != times.size or vals.shape[1:-1] != self.grid.shape:
            raise ShapeMismatch("trajectory values do not match times/grid")
        if times.size == 0 or times[0] != 0.0:
            raise ValueError("trajectory times must start at 0")
        if np.any(np.diff(times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        object.__setattr__(self, "times", _freeze(times))
        object.__setattr__(self, "values", _freeze(vals))

    def __len__(self) -> int:
        return self.times.size

    @property
    def fiber_dim(self) -> int:
        return self.values.shape[-1]

    def field(self, j: int) -> Field:
        return Field(self.grid, self.values[j])

    @property
    def fields(self) -> list:
        return [self.field(j) for j in range(len(self))]

    def at(self, t: float) -> np.ndarray:
        """Local cubic (4-point Lagrange) interpolation of the snapshots in time."""
        return _lagrange_time(self.times, self.values, t)

    def norms(self) -> np.ndarray:
        h = self.grid.cell_volume
        axes = tuple(range(1, self.values.ndim))
        return np.sqrt(h * np.sum(np.abs(self.values) ** 2, axis=axes))


def _lagrange_time(times: np.ndarray, values: np.ndarray, t: float) -> np.ndarray:
    n = times.size
    if t < times[0] - 1e-14 or t > times[-1] + 1e-14:
        raise InterpolationOutOfRange(f"t={t} outside [{times[0]}, {times[-1]}]")
    j = int(np.searchsorted(times, t))
    if j < n and abs(times[j] - t) <= 1e-15 * max(1.0, abs(t)):
        return values[j]
    if j > 0 and abs(times[j - 1] - t) <= 1e-15 * max(1.0, abs(t)):
        return values[j - 1]
    if n < 4:
        lo, hi = max(j - 1, 0), min(max(j, 1), n - 1)
        w = (t - times[lo]) / (times[hi] - times[lo])
        return (1 - w) * values[lo] + w * values[hi]
    start = min(max(j - 2, 0), n - 4)
    idx = range(start, start + 4)
    out = np.zeros_like(values[0])
    for a in idx:
        la = 1.0
        for b in idx:
            if b != a:
                la *= (t - times[b]) / (times[a] - times[b])
        out = out + la * values[a]
    return out


# ---------------------------------------------------------------------------
# array-level kernels (used by the propagators without Field overhead)
# ---------------------------------------------------------------------------

def fft_values(grid: Grid, arr: np.ndarray) -> np.ndarray:
    return np.fft.fftn(arr, axes=grid.axes, norm="ortho")


def ifft_values(grid: Grid, arr: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(arr, axes=grid.axes, norm="ortho")


def gradient_values(grid: Grid, arr: np.ndarray) -> list:
    hat = fft_values(grid, arr)
    out = []
    for k in range(grid.dim):
        sym = grid.broadcast_axis(1j * grid.xi_grad, k)[..., None]
        out.append(ifft_values(grid, sym * hat))
    return out


def laplacian_values(grid: Grid, arr: np.ndarray) -> np.ndarray:
    hat = fft_values(grid, arr)
    return ifft_values(grid, -grid.xi2[..., None] * hat)


def inner_values(grid: Grid, f: np.ndarray, g: np.ndarray) -> complex:
    return complex(grid.cell_volume * np.vdot(g.ravel(), f.ravel()))


def norm_values(grid: Grid, f: np.ndarray) -> float:
    return float(np.sqrt(grid.cell_volume * np.sum(np.abs(f) ** 2)))


def weighted_values(base: np.ndarray, log_weight: np.ndarray) -> np.ndarray:
    """``base * exp(log_weight)`` with the overflow rule; one exp per node."""
    lw = np.asarray(log_weight, dtype=float)[..., None]
    mag = np.abs(base)
    nz = mag > 0
    with np.errstate(divide="ignore"):
        logmag = np.where(nz, np.log(np.where(nz, mag, 1.0)), -np.inf) + lw
    if np.any(logmag > _LOG_WEIGHT_LIMIT):
        worst = float(np.max(logmag))
        raise WeightOverflow(
            f"weighted field reaches e^{worst:.1f} > {WEIGHT_LIMIT:.0e} on the grid"
        )
    lwb = np.broadcast_to(lw, base.shape)
    direct = lwb <= _EXP_SAFE
    out = np.empty(base.shape, dtype=np.complex128)
    out[direct] = base[direct] * np.exp(lwb[direct])
    big = ~direct
    if np.any(big):
        phase = np.where(nz[big], base[big] / np.where(nz[big], mag[big], 1.0), 0.0)
        out[big] = np.where(nz[big], np.exp(np.where(nz[big], logmag[big], 0.0)), 0.0) * phase
    return out


# ---------------------------------------------------------------------------
# Field operations
# ---------------------------------------------------------------------------

def dft_forward(f: Field) -> Field:
    return Field(f.grid, fft_values(f.grid, f.values))


def dft_inverse(fhat: Field) -> Field:
    return Field(fhat.grid, ifft_values(fhat.grid, fhat.values))


def inner_product(f: Field, g: Field) -> complex:
    _check_compatible(f, g)
    return inner_values(f.grid, f.values, g.values)


def norm(f: Field) -> float:
    return norm_values(f.grid, f.values)


def spectral_gradient(f: Field) -> list:
    return [Field(f.grid, d) for d in gradient_values(f.grid, f.values)]


def spectral_laplacian(f: Field) -> Field:
    return Field(f.grid, laplacian_values(f.grid, f.values))


def apply_weight(f: Field, w: WeightLike) -> Field:
    """Multiply every fiber vector by ``exp(w(x))``.

    ``w`` is the exponent (a constant, a node array, or a callable of the
    coordinate arrays). Raises :class:`WeightOverflow` when any weighted
    node would exceed ``WEIGHT_LIMIT`` in magnitude.
    """
    expo = np.array(f.grid.evaluate(w), dtype=float)
    if not np.all(np.isfinite(expo)):
        raise WeightOverflow("weight exponent is not finite on the grid")
    if f.log_weight is None:
        base, lw = f.values, expo
    else:
        base, lw = f.base, f.log_weight + expo
    vals = weighted_values(base, lw)
    return Field(f.grid, vals, base=base, log_weight=_freeze(lw))


def continuous_fourier(f: Field) -> np.ndarray:
    """Riemann-sum samples of ``int f(x) exp(-i x.xi) dx`` at the grid frequencies."""
    grid = f.grid
    hat = fft_values(grid, f.values) * np.sqrt(grid.size) * grid.cell_volume
    phase = np.exp(1j * grid.half_width * sum(grid.wavenumbers))
    return hat * phase[..., None]


def boundary_ratio(grid: Grid, arr: np.ndarray, band: float = 0.05) -> float:
    """max |u| on the outer band of the box divided by max |u| overall."""
    mag = np.linalg.norm(arr, axis=-1)
    peak = float(mag.max())
    if peak == 0.0:
        return 0.0
    edge = np.zeros(grid.shape, dtype=bool)
    cut = (1.0 - band) * grid.half_width
    for c in grid.coords:
        edge |= np.abs(c) >= cut
    return float(mag[edge].max()) / peak


def containment_check(grid: Grid, arr: np.ndarray, tol: float = 1e-12,
                      band: float = 0.05, label: str = "") -> float:
    ratio = boundary_ratio(grid, arr, band)
    if ratio > tol:
        raise ContainmentViolation(
            f"{label or 'field'}: boundary/max = {ratio:.3e} exceeds {tol:.1e}"
        )
    return ratio


def _interp_basis(grid: Grid, pts: np.ndarray) -> np.ndarray:
    """Rows evaluate the trigonometric interpolant from unnormalized DFT data."""
    P = grid.points
    k = np.fft.fftfreq(P, d=1.0 / P)
    xi = np.pi * k / grid.half_width
    shift = pts[:, None] - grid.x[0]
    basis = np.exp(1j * shift * xi[None, :])
    nyq = P // 2
    basis[:, nyq] = np.cos(shift[:, 0] * xi[nyq])
    return basis / P


def interpolate_scaled(grid: Grid, arr: np.ndarray, scale: float,
                       outside: str = "zero", tol: float = 1e-12) -> np.ndarray:
    """Spectral interpolation of nodal ``arr`` at the points ``scale * x``.

    Points outside ``[-L, L)`` are filled with zero when ``outside="zero"``,
    which is admissible only for contained fields (checked against ``tol``);
    ``outside="raise"`` raises :class:`InterpolationOutOfRange` instead.
    """
    if scale == 1.0:
        return np.array(arr, dtype=np.complex128)
    pts = scale * grid.x
    out_of_box = (pts < -grid.half_width) | (pts >= grid.half_width)
    if np.any(out_of_box):
        if outside == "raise":
            raise InterpolationOutOfRange(
                f"scale {scale:.4g} maps the grid outside the source box"
            )
        containment_check(grid, arr, tol=tol, label="interpolation source")
    B = _interp_basis(grid, pts)
    B[out_of_box, :] = 0.0
    out = arr
    for ax in range(grid.dim):
        hat = np.fft.fft(out, axis=ax)
        out = np.moveaxis(np.tensordot(B, hat, axes=([1], [ax])), 0, ax)
    return out


def random_smooth_field(grid: Grid, m: int, rng: np.random.Generator,
                        n_bumps: int = 3, radius: float | None = None,
                        width: tuple = (0.6, 1.4), momentum: float = 2.0) -> Field:
    """Sum of complex Gaussian packets well inside the box (test helper).

    Wide, slow packets (``width ~ 2``, small ``momentum``) stay contained
    under unit-time Schrodinger flow; narrow ones disperse quickly.
    """
    L = grid.half_width
    radius = 0.3 * L if radius is None else radius
    vals = np.zeros(grid.shape + (m,), dtype=np.complex128)
    for _ in range(n_bumps):
        c = rng.uniform(-radius, radius, size=grid.dim)
        w = rng.uniform(*width)
        k = rng.uniform(-momentum, momentum, size=grid.dim)
        r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
        ph = sum(ki * x for ki, x in zip(k, grid.coords))
        amp = rng.normal(size=m) + 1j * rng.normal(size=m)
        vals += (np.exp(-r2 / (w * w) + 1j * ph))[..., None] * amp
    return Field(grid, vals)


def gaussian_field(grid: Grid, coeff: complex = 1.0, fiber: Sequence[complex] = (1.0,),
                   center: Sequence[float] | None = None) -> Field:
    """``exp(-coeff * |x-c|^2) * fiber``; ``coeff`` may be complex (chirped data)."""
    c = np.zeros(grid.dim) if center is None else np.asarray(center, dtype=float)
    r2 = sum((x - ci) ** 2 for x, ci in zip(grid.coords, c))
    prof = np.exp(-coeff * r2)
    return Field(grid, prof[..., None] * np.asarray(fiber, dtype=np.complex128))
