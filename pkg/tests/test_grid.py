import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardylab import (
    Field, apply_weight, continuous_fourier, dft_forward, dft_inverse, gaussian_field,
    inner_product, make_field, make_grid, norm, spectral_gradient, spectral_laplacian,
)
from hardylab.errors import (
    ContainmentViolation, InvalidDimension, NonPowerOfTwo, ShapeMismatch, WeightOverflow,
)
from hardylab.grid import containment_check, interpolate_scaled, random_smooth_field

from oracles import l2_quad, trapezoid_fourier


def _random_field(grid, m, seed):
    r = np.random.default_rng(seed)
    vals = r.normal(size=grid.shape + (m,)) + 1j * r.normal(size=grid.shape + (m,))
    return Field(grid, vals)


def test_spacing_from_half_width_and_points():
    assert make_grid(1, 16.0, 512).spacing == pytest.approx(0.0625)


def test_non_power_of_two_rejected():
    with pytest.raises(NonPowerOfTwo):
        make_grid(1, 16.0, 500)


def test_dimension_limited_to_three():
    with pytest.raises(InvalidDimension):
        make_grid(4, 1.0, 8)


def test_two_dimensional_layout():
    g = make_grid(2, 8.0, 64)
    assert g.size == 4096 and g.shape == (64, 64)
    assert np.max(np.abs(g.xi)) == pytest.approx(np.pi / 8.0 * 32)


def test_constant_field_lives_in_zero_mode(grid1):
    f = make_field(grid1, np.full(grid1.shape + (2,), 3.0 + 1j))
    hat = dft_forward(f).values
    energy = np.sum(np.abs(hat) ** 2, axis=-1)
    assert energy[0] > 0 and np.all(energy[1:] < 1e-20 * energy[0])


def test_gaussian_transform_matches_quadrature(grid1):
    f = gaussian_field(grid1)
    got = continuous_fourier(f)[:, 0]
    xi = grid1.xi
    quad = trapezoid_fourier(lambda x: np.exp(-x * x), xi)
    closed = np.sqrt(np.pi) * np.exp(-xi ** 2 / 4.0)
    assert np.max(np.abs(quad - closed)) <= 1e-12
    assert np.max(np.abs(got - quad)) <= 1e-10


def test_gaussian_self_inner_product(grid1):
    f = gaussian_field(grid1)
    ip = inner_product(f, f)
    assert ip.imag == 0.0
    assert abs(ip.real - l2_quad(lambda x: np.exp(-x * x)) ** 2) <= 1e-12
    assert abs(ip.real - np.sqrt(np.pi / 2.0)) <= 1e-12


def test_disjoint_orthogonal_fibers(grid1):
    x = grid1.x
    a = np.zeros(grid1.shape + (2,), complex)
    b = np.zeros_like(a)
    a[x < -2, 0] = 1.0
    b[x > 2, 1] = 1.0
    assert inner_product(Field(grid1, a), Field(grid1, b)) == 0


def test_inner_product_conjugate_linear_in_second_slot(grid1):
    f, g = _random_field(grid1, 2, 1), _random_field(grid1, 2, 2)
    c = 0.3 - 1.7j
    lhs = inner_product(f, Field(grid1, c * g.values))
    assert lhs == pytest.approx(np.conj(c) * inner_product(f, g), rel=1e-13)


def test_inner_product_grid_mismatch(grid1):
    with pytest.raises(ShapeMismatch):
        inner_product(gaussian_field(grid1), gaussian_field(make_grid(1, 16.0, 256)))


def test_gradient_of_constant_is_zero(grid1):
    f = make_field(grid1, np.ones(grid1.shape + (1,)))
    assert np.max(np.abs(spectral_gradient(f)[0].values)) < 1e-14


def test_gradient_band_limited_exact(grid1):
    L, x = grid1.half_width, grid1.x
    f = make_field(grid1, np.sin(np.pi * x / L)[:, None])
    d = spectral_gradient(f)[0].values[:, 0]
    assert np.max(np.abs(d - np.pi / L * np.cos(np.pi * x / L))) <= 1e-10


def test_gradient_of_gaussian(grid1):
    x = grid1.x
    d = spectral_gradient(gaussian_field(grid1))[0].values[:, 0]
    assert np.max(np.abs(d + 2 * x * np.exp(-x * x))) <= 1e-8


def test_laplacian_of_gaussian(grid1):
    x = grid1.x
    lap = spectral_laplacian(gaussian_field(grid1)).values[:, 0]
    assert np.max(np.abs(lap - (4 * x * x - 2) * np.exp(-x * x))) <= 1e-8


def test_gradient_agrees_with_finite_differences_to_second_order():
    errs = []
    for P in (128, 256):
        g = make_grid(1, 8.0, P)
        x = g.x
        u = np.exp(-x * x) * np.cos(2 * x)
        d = spectral_gradient(make_field(g, u[:, None]))[0].values[:, 0].real
        fd = (np.roll(u, -1) - np.roll(u, 1)) / (2 * g.spacing)
        errs.append(np.max(np.abs(d - fd)))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_zero_weight_is_identity(grid1):
    f = _random_field(grid1, 2, 3)
    assert np.array_equal(apply_weight(f, 0.0).values, f.values)
    assert np.array_equal(apply_weight(f, 0.0 * grid1.r2).values, f.values)


def test_weight_overflow_on_wide_support():
    # e^{|x|^2} crosses 1e200 at |x| = sqrt(ln 1e200) ~ 21.46
    g = make_grid(1, 32.0, 1024)
    ones = np.ones(g.shape + (1,))
    with pytest.raises(WeightOverflow):
        apply_weight(make_field(g, ones), g.r2)
    inside = np.where(np.abs(g.x) < 21.0, 1.0, 0.0)[:, None]
    apply_weight(make_field(g, inside), g.r2)
    outside = np.where(np.abs(g.x) < 22.0, 1.0, 0.0)[:, None]
    with pytest.raises(WeightOverflow):
        apply_weight(make_field(g, outside), g.r2)


def test_weight_finite_on_unit_gaussian(grid1):
    # e^{|x|^2} e^{-|x|^2} = 1 everywhere: finite, no overflow
    w = apply_weight(gaussian_field(grid1), grid1.r2)
    assert np.allclose(np.abs(w.values), 1.0)
    with pytest.raises(WeightOverflow):
        apply_weight(gaussian_field(grid1), 3.0 * grid1.r2)  # e^{2*256} at the edge


def test_containment_check(grid1):
    containment_check(grid1, gaussian_field(grid1).values)
    with pytest.raises(ContainmentViolation):
        containment_check(grid1, np.ones(grid1.shape + (1,)))


def test_interpolation_identity_and_dilation(grid1):
    u = gaussian_field(grid1).values
    assert np.array_equal(interpolate_scaled(grid1, u, 1.0), u)
    out = interpolate_scaled(grid1, u, 0.5)
    assert np.max(np.abs(out[:, 0] - np.exp(-0.25 * grid1.x ** 2))) < 1e-12


@given(seed=st.integers(0, 2 ** 32 - 1), P=st.sampled_from([8, 64, 512, 1024]),
       m=st.integers(1, 8), dim=st.sampled_from([1, 2]))
def test_round_trip(seed, P, m, dim):
    if dim == 2 and P > 64:
        P = 64
    g = make_grid(dim, 5.0, P)
    f = _random_field(g, m, seed)
    back = dft_inverse(dft_forward(f)).values
    assert np.linalg.norm(back - f.values) <= 1e-12 * np.linalg.norm(f.values)


@given(seed=st.integers(0, 2 ** 32 - 1), m=st.integers(1, 4), dim=st.sampled_from([1, 2, 3]))
def test_parseval(seed, m, dim):
    g = make_grid(dim, 3.0, {1: 256, 2: 32, 3: 8}[dim])
    f, h = _random_field(g, m, seed), _random_field(g, m, seed + 1)
    lhs = inner_product(f, h)
    rhs = inner_product(dft_forward(f), dft_forward(h))
    assert abs(lhs - rhs) <= 1e-10 * norm(f) * norm(h)
    assert abs(norm(dft_forward(f)) - norm(f)) <= 1e-10 * norm(f)


@given(c1=st.floats(-0.5, 0.5), c2=st.floats(-0.5, 0.5), seed=st.integers(0, 1000))
def test_weight_composition_exact(c1, c2, seed):
    g = make_grid(1, 8.0, 128)
    f = random_smooth_field(g, 2, np.random.default_rng(seed))
    w1, w2 = c1 * g.r2, c2 * g.r2 + 0.1 * g.x
    once = apply_weight(f, w1 + w2).values
    twice = apply_weight(apply_weight(f, w1), w2).values
    assert np.array_equal(once, twice)
