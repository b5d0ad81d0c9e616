"""Weighted-norm measurements: Gaussian and linear weights, frequency
functions, log-convexity verdicts, decay fits, Hardy classification and the
interpolation/bound checks built on them.

Every bound check reports measured constants; none asserts a closed-form
value for constants that the underlying estimates leave unspecified.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import DegenerateNorm, FitRejected, NonPositiveValue, WeightOverflow
from .grid import (
    Field,
    Grid,
    Trajectory,
    apply_weight,
    gradient_values,
    inner_values,
    norm,
    norm_values,
    weighted_values,
)
from .linalg import spectral_norms
from .operators import (
    GeneratorSpec,
    PotentialSpec,
    SkewSplit,
    apply_K_values,
    apply_S_values,
    commutator_closed_values,
)
from .weights import ParabolicWeight, WeightParams, mu

__all__ = [
    "WeightParams", "ParabolicWeight", "mu",
    "weighted_norm", "linear_weighted_norm", "weighted_grad_norm",
    "frequency_functions", "log_convexity_check", "theorem3_series",
    "theorem3_interpolation_check", "decay_fit", "hardy_classify",
    "lemma31_bound_check", "theorem51_check", "lemma51_check",
    "ConvexityReport", "DecayFit", "FrequencySeries", "InterpolationReport", "BoundReport",
    "hardy_product", "lemma31_MT", "HARDY_VERDICTS", "LEMMA31_FORMS",
]

SHARP_BAND = 0.02
FIT_RESIDUAL_MAX = 0.1


# ---------------------------------------------------------------------------
# weighted norms
# ---------------------------------------------------------------------------

def weighted_norm(u: Field, gamma: float) -> float:
    """``||exp(gamma |x|^2) u||``."""
    if gamma == 0:
        return norm(u)
    return norm(apply_weight(u, gamma * u.grid.r2))


def linear_weighted_norm(u: Field, lam: Sequence[float]) -> float:
    """``||exp(lambda . x) u||``."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    if lam.size != u.grid.dim:
        raise ValueError(f"lambda needs {u.grid.dim} components")
    if not np.any(lam):
        return norm(u)
    return norm(apply_weight(u, sum(l * c for l, c in zip(lam, u.grid.coords))))


def _log_weighted_norm(grid: Grid, arr: np.ndarray, expo: np.ndarray) -> float:
    """``log ||exp(expo) arr||`` with the overflow rule applied."""
    return float(np.log(norm_values(grid, weighted_values(arr, expo))))


GammaLike = Union[float, Callable[[float], float]]


def _gamma_at(gamma: GammaLike, t: float) -> float:
    return float(gamma(t)) if callable(gamma) else float(gamma)


def weighted_grad_norm(traj: Trajectory, gamma: GammaLike) -> tuple:
    """``(||eta grad u||_Z, ||eta |x| u||_Z)`` with ``eta = sqrt(t(1-t)) exp(gamma |x|^2)``.

    ``Z`` is ``L^2`` over space and ``[0, 1]``; the time integral is the
    trapezoid rule on the trajectory samples. ``gamma`` may be a function of
    ``t`` (for the weight ``|x|^2 mu(t)^2``).
    """
    grid = traj.grid
    r = np.sqrt(grid.r2)
    g_int, x_int = [], []
    for j, t in enumerate(traj.times):
        tau = t * (1.0 - t)
        if tau <= 0.0:
            g_int.append(0.0)
            x_int.append(0.0)
            continue
        expo = _gamma_at(gamma, t) * grid.r2
        u = traj.values[j]
        gsum = sum(norm_values(grid, weighted_values(D, expo)) ** 2 for D in gradient_values(grid, u))
        xs = norm_values(grid, weighted_values(r[..., None] * u, expo)) ** 2
        g_int.append(tau * gsum)
        x_int.append(tau * xs)
    return (float(np.sqrt(np.trapezoid(g_int, traj.times))),
            float(np.sqrt(np.trapezoid(x_int, traj.times))))


# ---------------------------------------------------------------------------
# frequency functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencySeries:
    times: np.ndarray
    Q: np.ndarray
    D: np.ndarray
    N: np.ndarray
    commutator: np.ndarray
    Qpp_identity: np.ndarray
    Qpp_fd: np.ndarray


def _time_derivative(times: np.ndarray, arr: np.ndarray) -> np.ndarray:
    """Centered differences (4th order inside, 2nd order near the ends)."""
    n = times.size
    h = float(times[1] - times[0])
    out = np.gradient(arr, times, axis=0, edge_order=2)
    if n >= 5 and np.allclose(np.diff(times), h, rtol=1e-9, atol=0):
        out[2:-2] = (arr[:-4] - 8 * arr[1:-3] + 8 * arr[3:-1] - arr[4:]) / (12.0 * h)
    return out


def frequency_functions(traj: Trajectory, split: SkewSplit, gen: GeneratorSpec) -> FrequencySeries:
    """``Q = (f, f)``, ``D = (S f, f)``, ``N = D/Q`` for ``f = exp(gamma phi) u``.

    ``Qpp_identity`` evaluates

        Q'' = 2 d/dt Re(f' - Sf - Kf, f) + 2 (S_t f + [S,K] f, f)
              + ||f' + Sf - Kf||^2 - ||f' - Sf - Kf||^2

    with discrete time derivatives; ``Qpp_fd`` differentiates ``Q`` twice.
    """
    grid = traj.grid
    times = traj.times
    F = np.stack([
        weighted_values(traj.values[j], split.gamma * split.weight.nodal(grid, t)["phi"])
        for j, t in enumerate(times)])
    fdot = _time_derivative(times, F)
    Q, D, comm, re_res, pos, neg = (np.empty(times.size) for _ in range(6))
    for j, t in enumerate(times):
        f = F[j]
        Q[j] = norm_values(grid, f) ** 2
        if Q[j] < 1e-300:
            raise DegenerateNorm(f"Q({t:.4f}) = {Q[j]:.2e} is degenerate")
        Sf = apply_S_values(split, gen, grid, f, t)
        Kf = apply_K_values(split, gen, grid, f, t)
        D[j] = inner_values(grid, Sf, f).real
        comm[j] = commutator_closed_values(split, grid, f, t)
        res = fdot[j] - Sf - Kf
        re_res[j] = inner_values(grid, res, f).real
        pos[j] = norm_values(grid, fdot[j] + Sf - Kf) ** 2
        neg[j] = norm_values(grid, res) ** 2
    Qpp_identity = 2.0 * _time_derivative(times, re_res) + 2.0 * comm + pos - neg
    Qpp_fd = _time_derivative(times, _time_derivative(times, Q))
    return FrequencySeries(times, Q, D, D / Q, comm, Qpp_identity, Qpp_fd)


# ---------------------------------------------------------------------------
# log convexity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexityReport:
    times: np.ndarray
    values: np.ndarray
    log_values: np.ndarray
    second_differences: np.ndarray
    min_second_difference: float
    tolerance: float
    verdict: bool
    slack_series: np.ndarray

    def csv_rows(self) -> list:
        d2 = np.full(self.times.size, np.nan)
        d2[1:-1] = self.second_differences
        return [(float(t), float(F), float(lF), float(s))
                for t, F, lF, s in zip(self.times, self.values, self.log_values, d2)]


def log_convexity_check(times, values=None, tolerance: float = 1e-3,
                        log_values=None) -> ConvexityReport:
    """Second differences ``log F_{j+1} - 2 log F_j + log F_{j-1}`` on a uniform grid.

    Pass ``log_values`` directly when ``F`` itself would overflow.
    """
    times = np.asarray(times, dtype=float)
    if log_values is None:
        vals = np.asarray(values, dtype=float)
        if np.any(~(vals > 0)):
            raise NonPositiveValue("log-convexity needs strictly positive values")
        logs = np.log(vals)
    else:
        logs = np.asarray(log_values, dtype=float)
        with np.errstate(over="ignore"):
            vals = np.exp(logs)
    if times.size < 3:
        raise ValueError("need at least three samples")
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-15):
        raise ValueError("samples must be uniform in t")
    d2 = logs[2:] - 2.0 * logs[1:-1] + logs[:-2]
    m = float(d2.min())
    return ConvexityReport(times, vals, logs, d2, m, float(tolerance), bool(m >= -tolerance),
                           d2 + tolerance)


def theorem3_series(traj: Trajectory, w: WeightParams) -> tuple:
    """``(times, log F)`` with ``F(t) = ||exp(|x|^2 mu(t)^2) u(t)||^{1/mu(t)}``."""
    grid = traj.grid
    logs = np.array([_log_weighted_norm(grid, traj.values[j], mu(t, w) ** 2 * grid.r2) / mu(t, w)
                     for j, t in enumerate(traj.times)])
    return traj.times, logs


@dataclass(frozen=True)
class InterpolationReport:
    times: np.ndarray
    log_lhs: np.ndarray
    log_rhs_core: np.ndarray
    exponent_sum: np.ndarray
    empirical_constant: float
    minimal_N: float
    zero_solution: bool
    form: str


def theorem3_interpolation_check(traj: Trajectory, w: WeightParams, M1: float, M2: float,
                                 form: str = "literal") -> InterpolationReport:
    """Empirical constant of the Gaussian interpolation inequality.

    ``form="literal"`` uses the endpoint weights ``exp(|x|^2/beta^2)`` at
    ``t = 0`` and ``exp(|x|^2/alpha^2)`` at ``t = 1`` with exponents
    ``beta(1-t)mu(t)`` and ``alpha t mu(t)``. ``form="endpoint"`` uses the
    weights ``exp(|x|^2 mu(0)^2)`` and ``exp(|x|^2 mu(1)^2)`` with exponents
    ``(1-t)/mu(0)`` and ``t/mu(1)``, the ones implied by log-convexity of F.

    ``empirical_constant = max_t [log LHS - log RHS]`` where RHS omits the
    ``exp(N(...))`` factor; ``minimal_N`` divides it by ``M1+M2+M1^2+M2^2``.
    """
    grid = traj.grid
    if not np.isclose(traj.times[-1], 1.0):
        raise ValueError("trajectory must end at t = 1")
    norms = traj.norms()
    times = traj.times
    if float(norms.max()) == 0.0:
        z = np.zeros_like(times)
        return InterpolationReport(times, z, z, z, 0.0, 0.0, True, form)
    _, log_lhs = theorem3_series(traj, w)
    m = mu(times, w)
    if form == "literal":
        e0 = _log_weighted_norm(grid, traj.values[0], grid.r2 / w.beta ** 2)
        e1 = _log_weighted_norm(grid, traj.values[-1], grid.r2 / w.alpha ** 2)
        p0, p1 = w.beta * (1.0 - times) * m, w.alpha * times * m
    elif form == "endpoint":
        m0, m1 = 1.0 / w.alpha, 1.0 / w.beta
        e0 = _log_weighted_norm(grid, traj.values[0], grid.r2 * m0 ** 2) / m0
        e1 = _log_weighted_norm(grid, traj.values[-1], grid.r2 * m1 ** 2) / m1
        p0, p1 = 1.0 - times, times
    else:
        raise ValueError(f"unknown form {form!r}")
    log_rhs = p0 * e0 + p1 * e1
    C = float(np.max(log_lhs - log_rhs))
    S = M1 + M2 + M1 ** 2 + M2 ** 2
    if C <= 0:
        N = 0.0
    elif S > 0:
        N = C / S
    else:
        N = float("inf")
    return InterpolationReport(times, log_lhs, log_rhs, p0 + p1, C, N, False, form)


# ---------------------------------------------------------------------------
# decay fits and the Hardy trichotomy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayFit:
    fitted_gamma: float
    intercept: float
    fit_window: tuple
    residual: float
    n_nodes: int
    rejected: bool


def decay_fit(u: Field, window: tuple = (2.0, 10.0), floor: float = 1e-14,
              max_residual: float = FIT_RESIDUAL_MAX) -> DecayFit:
    """Least-squares fit ``log ||u(x)|| ~ c - gamma |x|^2`` on ``|x|`` in ``window``.

    Nodes below ``floor * max ||u||`` are dropped; every node carries the
    quadrature weight ``h^n``. The residual is the weighted RMS misfit in
    log scale and the fit is flagged as rejected above ``max_residual``.
    """
    grid = u.grid
    mag = np.linalg.norm(u.values, axis=-1)
    peak = float(mag.max())
    if peak == 0.0:
        raise DegenerateNorm("cannot fit the decay of a zero field")
    r2 = grid.r2
    lo, hi = window
    sel = (r2 >= lo * lo) & (r2 <= hi * hi) & (mag >= floor * peak)
    n = int(sel.sum())
    if n < 3:
        return DecayFit(float("nan"), float("nan"), tuple(window), float("inf"), n, True)
    X = np.column_stack([np.ones(n), -r2[sel]])
    y = np.log(mag[sel])
    wts = np.full(n, grid.cell_volume)
    sw = np.sqrt(wts)
    coef, *_ = np.linalg.lstsq(X * sw[:, None], y * sw, rcond=None)
    res = y - X @ coef
    resid = float(np.sqrt(np.sum(wts * res ** 2) / np.sum(wts)))
    return DecayFit(float(coef[1]), float(coef[0]), tuple(window), resid, n, resid > max_residual)


HARDY_VERDICTS = ("forces-zero", "sharp-gaussian", "unconstrained")


def hardy_product(fit0: DecayFit, fitT: DecayFit) -> float:
    """``alpha_hat * beta_hat = 1/sqrt(gamma_T gamma_0)``."""
    if fit0.fitted_gamma <= 0 or fitT.fitted_gamma <= 0:
        return float("inf")
    return 1.0 / np.sqrt(fit0.fitted_gamma * fitT.fitted_gamma)


def hardy_classify(fit0: DecayFit, fitT: DecayFit, T: float, band: float = SHARP_BAND) -> str:
    """Classify ``alpha_hat beta_hat`` against ``4T`` with a relative ``band``."""
    if fit0.rejected or fitT.rejected:
        raise FitRejected("decay fit residual too large to classify")
    prod = hardy_product(fit0, fitT)
    thresh = 4.0 * T
    if abs(prod / thresh - 1.0) <= band:
        return "sharp-gaussian"
    if prod < thresh:
        return "forces-zero"
    return "unconstrained"


# ---------------------------------------------------------------------------
# bound checks
# ---------------------------------------------------------------------------

LEMMA31_FORMS = {
    # (c_left, c_right, c_F) as functions of M_T
    "literal": lambda M: (np.exp(M), M, 1.0),
    "exponential-right": lambda M: (1.0, np.exp(M), np.exp(M)),
}


@dataclass(frozen=True)
class BoundReport:
    lhs: float
    rhs: float
    ratio: float
    holds: bool
    M_T: float
    form: str
    details: dict = dc_field(default_factory=dict)


def lemma31_MT(traj: Trajectory, gen: GeneratorSpec, pot: Optional[PotentialSpec], coeff: complex) -> float:
    """``int_0^T sup_x sqrt(a^2+b^2) ||A + V(x,t)|| dt`` on the trajectory times."""
    grid = traj.grid
    z = complex(coeff)
    vals = []
    for t in traj.times:
        M = gen.matrix if pot is None else gen.matrix + pot.sample(grid, t)
        vals.append(abs(z) * float(np.max(spectral_norms(np.asarray(M)))))
    return float(np.trapezoid(vals, traj.times))


def lemma31_bound_check(traj: Trajectory, pw: ParabolicWeight, M_T: float,
                        source: Optional[Callable[[float], np.ndarray]] = None,
                        form: str = "literal", constants: Optional[tuple] = None,
                        tol: float = 1e-8) -> BoundReport:
    """Compare ``c_l ||e^{phi(T)} u(T)||`` with ``c_r ||e^{gamma|x|^2} u(0)|| + c_F |z| ||e^phi F||_{L^1}``.

    ``constants=(c_l, c_r, c_F)`` overrides the named ``form``.
    """
    grid = traj.grid
    cl, cr, cF = constants if constants is not None else LEMMA31_FORMS[form](M_T)
    T = float(traj.times[-1])
    lhs = cl * norm_values(grid, weighted_values(traj.values[-1], pw.q(T) * grid.r2))
    start = norm_values(grid, weighted_values(traj.values[0], pw.gamma * grid.r2))
    src = 0.0
    if source is not None:
        dens = [norm_values(grid, weighted_values(np.asarray(source(t)), pw.q(t) * grid.r2))
                for t in traj.times]
        src = float(np.trapezoid(dens, traj.times))
    rhs = cr * start + cF * np.hypot(pw.a, pw.b) * src
    if rhs == 0.0:
        ratio = 0.0 if lhs == 0.0 else float("inf")
    else:
        ratio = lhs / rhs
    return BoundReport(float(lhs), float(rhs), float(ratio), bool(lhs <= rhs * (1 + tol) + 1e-300),
                       float(M_T), form if constants is None else "custom",
                       {"start_norm": start, "source_L1": src})


def theorem51_check(traj: Trajectory, w: WeightParams, pot: Optional[PotentialSpec]) -> BoundReport:
    """Empirical constant of the weighted sup-plus-gradient bound for Schrodinger runs."""
    grid = traj.grid
    times = traj.times
    sup_w = max(norm_values(grid, weighted_values(traj.values[j], mu(t, w) ** 2 * grid.r2))
                for j, t in enumerate(times))
    grad, _ = weighted_grad_norm(traj, lambda t: mu(t, w) ** 2)
    lhs = sup_w + grad
    vsup = 0.0
    if pot is not None:
        vsup = max(float(spectral_norms(pot.sample(grid, t)).max()) for t in times)
    e0 = norm_values(grid, weighted_values(traj.values[0], grid.r2 / w.beta ** 2))
    e1 = norm_values(grid, weighted_values(traj.values[-1], grid.r2 / w.alpha ** 2))
    rhs = np.exp(vsup) * (e0 + e1 + float(traj.norms().max()))
    return BoundReport(float(lhs), float(rhs), float(lhs / rhs), True, 0.0, "empirical-N",
                       {"sup_weighted": sup_w, "weighted_grad": grad, "sup_V": vsup})


def lemma51_check(traj: Trajectory, lam: Sequence[float],
                  source: Optional[Callable[[float], np.ndarray]] = None) -> BoundReport:
    """Empirical constant of the linear-weight bound ``sup_t ||e^{lambda.x} u(t)||``."""
    grid = traj.grid
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    expo = sum(l * c for l, c in zip(lam, grid.coords))
    series = np.array([norm_values(grid, weighted_values(traj.values[j], expo))
                       for j in range(len(traj))])
    src = 0.0
    if source is not None:
        src = float(np.trapezoid([norm_values(grid, weighted_values(np.asarray(source(t)), expo))
                              for t in traj.times], traj.times))
    rhs = series[0] + series[-1] + src
    lhs = float(series.max())
    return BoundReport(lhs, float(rhs), lhs / float(rhs) if rhs else float("inf"), True, 0.0,
                       "empirical-N", {"series": series.tolist()})
