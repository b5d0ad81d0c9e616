import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardylab import (
    EvolutionParams, Field, GeneratorSpec, ParabolicWeight, WeightParams, decay_fit,
    frequency_functions, gaussian_field, gaussian_split, hardy_classify, lemma31_bound_check,
    lemma51_check, linear_weighted_norm, log_convexity_check, make_grid, mu, norm,
    split_step_flow, theorem3_interpolation_check, theorem51_check, weighted_grad_norm,
    weighted_norm, free_flow,
)
from hardylab.diagnostics import DecayFit, hardy_product, lemma31_MT
from hardylab.errors import DegenerateNorm, FitRejected, NonPositiveValue
from hardylab.grid import Trajectory, random_smooth_field
from hardylab.operators import zero_generator
from hardylab.propagator import exact_free_trajectory

from oracles import l2_quad, weighted_norm_quad


def _fit(gamma, rejected=False):
    return DecayFit(gamma, 0.0, (2.0, 10.0), 0.0, 100, rejected)


# --- mu and weighted norms ----------------------------------------------------------

def test_mu_example():
    assert mu(0.5, WeightParams(1.0, 3.0)) == pytest.approx(0.5)


@given(a=st.floats(0.1, 10.0), b=st.floats(0.1, 10.0))
def test_mu_positive_monotone_between_endpoints(a, b):
    w = WeightParams(a, b)
    m = mu(np.linspace(0, 1, 101), w)
    assert np.all(m > 0)
    assert m[0] == pytest.approx(1 / a) and m[-1] == pytest.approx(1 / b)
    d = np.diff(m)
    tol = 1e-14 * m.max()
    assert np.all(d <= tol) or np.all(d >= -tol)
    assert np.all(m >= min(1 / a, 1 / b) * (1 - 1e-12)) and np.all(m <= max(1 / a, 1 / b) * (1 + 1e-12))


def test_weight_params_validation():
    with pytest.raises(ValueError):
        WeightParams(0.0, 1.0)


def test_weighted_norm_zero_gamma_is_plain(grid1, rng):
    f = random_smooth_field(grid1, 2, rng)
    assert weighted_norm(f, 0.0) == norm(f)


def test_weighted_norm_gaussian_example(grid1):
    got = weighted_norm(gaussian_field(grid1), 0.5)
    oracle = weighted_norm_quad(lambda x: np.exp(-x * x), 0.5)
    assert abs(oracle - np.pi ** 0.25) <= 1e-12
    assert abs(got - oracle) <= 1e-8


@pytest.mark.parametrize("lam", [0.0, 0.5, -1.3])
def test_linear_weighted_norm(grid1, lam):
    got = linear_weighted_norm(gaussian_field(grid1), [lam])
    oracle = l2_quad(lambda x: np.exp(lam * x - x * x))
    assert abs(oracle - (np.pi / 2) ** 0.25 * np.exp(lam * lam / 4)) <= 1e-12
    assert abs(got - oracle) <= 1e-8
    with pytest.raises(ValueError):
        linear_weighted_norm(gaussian_field(grid1), [lam, lam])


@given(seed=st.integers(0, 10 ** 6), g1=st.floats(0.0, 0.5), g2=st.floats(0.0, 0.5))
def test_weighted_norm_monotone_in_gamma(seed, g1, g2):
    g = make_grid(1, 10.0, 128)
    f = random_smooth_field(g, 2, np.random.default_rng(seed))
    lo, hi = sorted((g1, g2))
    assert weighted_norm(f, lo) <= weighted_norm(f, hi)


def test_weighted_grad_norm_of_zero(grid1):
    tr = Trajectory(grid1, np.linspace(0, 1, 5), np.zeros((5,) + grid1.shape + (1,)))
    assert weighted_grad_norm(tr, 0.1) == (0.0, 0.0)


def test_weighted_grad_norm_stable_under_time_refinement(grid1):
    u0 = gaussian_field(grid1, 0.5)
    vals = []
    for steps in (50, 100):
        tr = exact_free_trajectory(u0, zero_generator(1), EvolutionParams(steps=steps))
        vals.append(weighted_grad_norm(tr, 0.1))
    for a, b in zip(*vals):
        assert np.isfinite(a) and abs(a - b) <= 0.01 * b


# --- frequency functions -----------------------------------------------------------------

def test_frequency_functions_zero_field_degenerate(grid1):
    tr = Trajectory(grid1, np.linspace(0, 1, 5), np.zeros((5,) + grid1.shape + (1,)))
    with pytest.raises(DegenerateNorm):
        frequency_functions(tr, gaussian_split(0.0, 1j), zero_generator(1))


def test_frequency_functions_free_schrodinger_has_constant_Q(grid1):
    gen = GeneratorSpec(np.array([[0.3, 0.1], [0.1, -0.2]]))
    tr = exact_free_trajectory(gaussian_field(grid1, 0.5, (1, 0.5j)), gen, EvolutionParams(steps=40))
    fs = frequency_functions(tr, gaussian_split(0.0, 1j), gen)
    assert np.ptp(fs.Q) <= 1e-12 * fs.Q[0]
    assert np.max(np.abs(fs.D)) <= 1e-12 * fs.Q[0]


def test_frequency_D_matches_quadrature_for_heat_flow(grid1):
    # f(x,t) = (1+4t)^{-1/2} exp(-x^2/(1+4t)); D = (Delta f, f) = -||f_x||^2
    p = EvolutionParams(coeff_a=1.0, coeff_b=0.0, steps=40)
    tr = exact_free_trajectory(gaussian_field(grid1), zero_generator(1), p)
    fs = frequency_functions(tr, gaussian_split(0.0, 1.0), zero_generator(1))
    for j in (0, 20, 40):
        t = tr.times[j]
        s = 1 + 4 * t

        def fx(x):
            return -2 * x / s * np.exp(-x * x / s) / np.sqrt(s)

        ref = -l2_quad(fx) ** 2
        assert abs(fs.D[j] - ref) <= 1e-6 * abs(ref)


def test_frequency_of_fiber_eigenvector_is_its_eigenvalue(grid1):
    A = np.array([[-0.5, 0.2], [0.2, -0.3]])
    lam, U = np.linalg.eigh(A)
    vals = np.broadcast_to(U[:, 0], grid1.shape + (2,))
    tr = Trajectory(grid1, np.linspace(0, 1, 9), np.stack([vals] * 9))
    fs = frequency_functions(tr, gaussian_split(0.0, 1.0), GeneratorSpec(A))
    assert np.allclose(fs.N, lam[0], atol=1e-12)


def test_second_derivative_identity_matches_finite_differences(grid1):
    gen = GeneratorSpec(np.array([[0.3, 0.1], [0.1, -0.2]]))
    p = EvolutionParams(steps=200, record_every=2)
    tr = split_step_flow(gaussian_field(grid1, 0.25, (1, 0.5j)), gen, None, None, p)
    fs = frequency_functions(tr, gaussian_split(0.05, 1j), gen)
    inner = slice(4, -4)
    scale = np.max(np.abs(fs.Qpp_fd[inner]))
    assert np.max(np.abs(fs.Qpp_identity[inner] - fs.Qpp_fd[inner])) <= 1e-4 * scale


# --- log convexity and interpolation --------------------------------------------------------

def test_log_convexity_constant():
    r = log_convexity_check(np.linspace(0, 1, 11), np.full(11, 2.5))
    assert r.min_second_difference == 0.0 and r.verdict


def test_log_convexity_exact_quadratic():
    t = np.linspace(0, 1, 11)
    r = log_convexity_check(t, np.exp(t ** 2))
    h = t[1] - t[0]
    assert np.allclose(r.second_differences, 2 * h * h, atol=1e-14) and r.verdict


def test_log_concave_fails():
    t = np.linspace(0, 1, 11)
    assert not log_convexity_check(t, np.exp(-t ** 2), tolerance=1e-4).verdict


def test_log_convexity_input_errors():
    with pytest.raises(NonPositiveValue):
        log_convexity_check(np.linspace(0, 1, 5), [1, 2, 0, 1, 1])
    with pytest.raises(ValueError):
        log_convexity_check([0, 0.1, 0.5], [1, 1, 1])


@given(c=st.floats(1e-6, 1e6), seed=st.integers(0, 10 ** 6))
def test_log_convexity_scale_invariant(c, seed):
    t = np.linspace(0, 1, 17)
    F = np.exp(np.random.default_rng(seed).normal(size=17) * 0.01 + t ** 2)
    a, b = log_convexity_check(t, F), log_convexity_check(t, c * F)
    assert a.verdict == b.verdict
    assert np.allclose(a.second_differences, b.second_differences, atol=1e-12)


def test_interpolation_zero_solution(grid1):
    tr = Trajectory(grid1, np.linspace(0, 1, 5), np.zeros((5,) + grid1.shape + (1,)))
    rep = theorem3_interpolation_check(tr, WeightParams(4, 5), 0.0, 0.0)
    assert rep.zero_solution and rep.empirical_constant == 0.0


def _free_lc(points, steps, w):
    g = make_grid(1, 16.0, points)
    tr = exact_free_trajectory(gaussian_field(g, 0.25), zero_generator(1),
                               EvolutionParams(steps=steps, record_every=steps // 32))
    return tr


def test_interpolation_exponent_algebra_at_start():
    w = WeightParams(4.0, 5.0)
    rep = theorem3_interpolation_check(_free_lc(512, 64, w), w, 0.0, 0.0, "literal")
    assert rep.exponent_sum[0] == pytest.approx(w.beta / w.alpha)
    assert not np.allclose(rep.exponent_sum, 1.0)


def test_interpolation_constant_stable_under_refinement():
    w = WeightParams(4.0, 4.0)
    C = [theorem3_interpolation_check(_free_lc(P, n, w), w, 0.0, 0.0, "literal").empirical_constant
         for P, n in ((512, 64), (1024, 128))]
    assert all(np.isfinite(C))
    assert abs(C[0] - C[1]) <= 0.1 * max(abs(C[0]), abs(C[1]))


def test_theorem3_quantity_log_convex_on_free_gaussian():
    w = WeightParams(4.0, 5.0)
    from hardylab.diagnostics import theorem3_series
    ts, lf = theorem3_series(_free_lc(512, 64, w), w)
    assert log_convexity_check(ts, log_values=lf, tolerance=1e-3).verdict


# --- Hardy trichotomy --------------------------------------------------------------------

def test_decay_fit_recovers_gaussian_exponent(grid1):
    fit = decay_fit(gaussian_field(grid1, 0.3))
    assert fit.fitted_gamma == pytest.approx(0.3, rel=1e-10) and not fit.rejected


def test_decay_fit_zero_and_noise(grid1, rng):
    with pytest.raises(DegenerateNorm):
        decay_fit(Field(grid1, np.zeros(grid1.shape + (1,))))
    noisy = Field(grid1, rng.normal(size=grid1.shape + (1,)))
    assert decay_fit(noisy).rejected
    with pytest.raises(FitRejected):
        hardy_classify(decay_fit(noisy), decay_fit(noisy), 1.0)


def test_free_unit_gaussian_product(grid1):
    # |u(x,1)| ~ exp(-x^2/17) for u0 = exp(-x^2): product sqrt(17), just above 4
    u0 = gaussian_field(grid1)
    u1 = free_flow(u0, zero_generator(1), 1.0, 1j)
    f0, f1 = decay_fit(u0), decay_fit(u1)
    assert hardy_product(f0, f1) == pytest.approx(np.sqrt(17.0), rel=1e-8)
    assert hardy_classify(f0, f1, 1.0) == "unconstrained"


@pytest.mark.parametrize("beta", [0.8, 1.0, 1.5])
def test_sharp_data_classified_sharp(grid1, beta):
    T = 1.0
    u0 = gaussian_field(grid1, 1 / beta ** 2 + 1j / (4 * T))
    uT = free_flow(u0, zero_generator(1), T, 1j)
    f0, fT = decay_fit(u0), decay_fit(uT)
    assert hardy_product(f0, fT) == pytest.approx(4 * T, rel=0.02)
    assert hardy_classify(f0, fT, T) == "sharp-gaussian"


def test_classification_bands():
    assert hardy_classify(_fit(0.01), _fit(0.01), 1.0) == "unconstrained"
    assert hardy_classify(_fit(1.0), _fit(1.0), 1.0) == "forces-zero"
    assert hardy_classify(_fit(0.25), _fit(0.25), 1.0) == "sharp-gaussian"


@given(c=st.floats(1e-3, 1e3), width=st.floats(0.2, 2.0))
def test_hardy_classify_scale_invariant(c, width):
    g = make_grid(1, 16.0, 512)
    u0 = gaussian_field(g, width)
    uT = free_flow(u0, zero_generator(1), 1.0, 1j)
    a = hardy_classify(decay_fit(u0), decay_fit(uT), 1.0)
    b = hardy_classify(decay_fit(Field(g, c * u0.values)), decay_fit(Field(g, c * uT.values)), 1.0)
    assert a == b


# --- bound checks -------------------------------------------------------------------------

def _heat(grid, u0, gen, steps=100):
    p = EvolutionParams(coeff_a=1.0, coeff_b=0.0, steps=steps, record_every=steps // 10)
    return split_step_flow(u0, gen, None, None, p)


def test_lemma31_on_heat_gaussian(grid1):
    tr = _heat(grid1, gaussian_field(grid1), zero_generator(1))
    pw = ParabolicWeight(0.2, 1.0)
    rep = lemma31_bound_check(tr, pw, lemma31_MT(tr, zero_generator(1), None, 1.0))
    assert np.isfinite(rep.lhs) and rep.lhs > 0
    assert np.isfinite(rep.ratio) or rep.rhs == 0.0


def test_lemma31_zero_data(grid1):
    tr = Trajectory(grid1, np.linspace(0, 1, 5), np.zeros((5,) + grid1.shape + (1,)))
    rep = lemma31_bound_check(tr, ParabolicWeight(0.2, 1.0), 0.0)
    assert rep.lhs == 0.0 and rep.rhs == 0.0 and rep.holds


def test_lemma31_unweighted_contraction(grid1):
    A = np.array([[-0.5, 0.2], [0.2, -0.3]])
    gen = GeneratorSpec(A)
    tr = _heat(grid1, gaussian_field(grid1, 0.5, (1, 0.5j)), gen)
    MT = lemma31_MT(tr, gen, None, 1.0)
    assert MT == pytest.approx(np.linalg.norm(A, 2))
    rep = lemma31_bound_check(tr, ParabolicWeight(0.0, 1.0), MT, form="exponential-right")
    assert rep.ratio <= 1.0 and rep.holds


def test_theorem51_and_lemma51_constants(grid1):
    w = WeightParams(4.0, 4.0)
    tr = exact_free_trajectory(gaussian_field(grid1, 0.25), zero_generator(1),
                               EvolutionParams(steps=50, record_every=5))
    r = theorem51_check(tr, w, None)
    assert np.isfinite(r.ratio) and r.ratio > 0
    r5 = lemma51_check(tr, [0.5])
    assert 0 < r5.ratio < 1
