import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscilab.grid import (
    Field,
    apply_multiplier,
    band_limited_field,
    conj_field,
    constant_field,
    dilate_field,
    field_from_function,
    field_from_spectrum,
    make_grid,
    multiply_fields,
    philox_rng,
    random_field,
    transform,
)


def test_make_grid_spacing_and_lattice():
    g = make_grid(1, 8, np.pi)
    assert g.spacing == pytest.approx(np.pi / 4)
    assert sorted(g.frequency_axis()) == list(range(-4, 4))


def test_make_grid_total_points():
    assert make_grid(2, 16, np.pi).size == 256


@pytest.mark.parametrize("n, G, L", [(1, 7, np.pi), (1, 2, np.pi), (0, 8, 1.0), (1, 8, 0.0)])
def test_make_grid_rejects(n, G, L):
    with pytest.raises(ValueError):
        make_grid(n, G, L)


def test_grid_exact_relation():
    g = make_grid(2, 12, 1.5)
    assert g.spacing * g.points_per_dim == 2 * g.half_width


def test_constant_transform():
    g = make_grid(1, 16, np.pi)
    spec = transform(constant_field(g, 1.0), "spectral")
    assert spec.samples[0] == pytest.approx(2 * np.pi)
    assert np.max(np.abs(spec.samples[1:])) < 1e-12


@pytest.mark.parametrize("n, G", [(1, 16), (1, 64), (2, 16), (3, 8)])
def test_round_trip(n, G):
    g = make_grid(n, G, np.pi)
    f = random_field(g, philox_rng(n * 100 + G))
    back = transform(transform(f, "spectral"), "physical")
    rel = np.max(np.abs(back.samples - f.samples)) / np.max(np.abs(f.samples))
    assert rel <= 1e-12


@pytest.mark.parametrize("n, G", [(1, 32), (2, 16)])
def test_plancherel(n, G):
    g = make_grid(n, G, np.pi)
    f = random_field(g, philox_rng(5))
    spec = transform(f, "spectral")
    lhs = np.sum(np.abs(f.samples) ** 2) * g.spacing**n
    rhs = np.sum(np.abs(spec.samples) ** 2) * g.freq_step**n / (2 * np.pi) ** n
    assert abs(lhs - rhs) / lhs <= 1e-10


def test_multiplier_identity():
    g = make_grid(1, 16, np.pi)
    f = random_field(g, philox_rng(1))
    out = apply_multiplier(lambda xi: np.ones(xi.shape[:-1]), f)
    assert np.max(np.abs(out.samples - f.samples)) < 1e-13


def test_multiplier_derivative_of_sine():
    # oracle: d/dx sin(x) = cos(x), compared pointwise on the lattice
    g = make_grid(1, 32, np.pi)
    f = field_from_function(g, lambda x: np.sin(x[..., 0]))
    df = apply_multiplier(lambda xi: 1j * xi[..., 0], f)
    assert np.max(np.abs(df.samples - np.cos(g.physical_axis()))) <= 1e-10


def test_multiplier_band_projection_idempotent():
    g = make_grid(1, 32, np.pi)
    f = random_field(g, philox_rng(2))
    band = lambda xi: (np.abs(xi[..., 0]) <= 5).astype(float)
    once = apply_multiplier(band, f)
    twice = apply_multiplier(band, once)
    assert np.max(np.abs(once.samples - twice.samples)) < 1e-13


def test_multiplier_rejects_nonfinite():
    g = make_grid(1, 8, np.pi)
    f = constant_field(g)
    with np.errstate(divide="ignore"):
        with pytest.raises(ValueError, match="xi"):
            apply_multiplier(lambda xi: 1.0 / np.sum(xi**2, axis=-1), f)


@settings(max_examples=20, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 10**6))
def test_multiplier_linear(a, b, seed):
    g = make_grid(1, 16, np.pi)
    rng = philox_rng(seed)
    f, h = random_field(g, rng), random_field(g, rng)
    m = lambda xi: np.exp(-np.sum(xi**2, axis=-1) / 9.0)
    comb = Field(grid=g, representation="physical",
                 samples=a * f.samples + b * h.samples)
    lhs = apply_multiplier(m, comb).samples
    rhs = a * apply_multiplier(m, f).samples + b * apply_multiplier(m, h).samples
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(lhs)))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_multiplier_composition(seed):
    g = make_grid(1, 16, np.pi)
    f = random_field(g, philox_rng(seed))
    m1 = lambda xi: 1.0 / (1.0 + np.sum(xi**2, axis=-1))
    m2 = lambda xi: np.cos(xi[..., 0] / 7.0)
    lhs = apply_multiplier(m1, apply_multiplier(m2, f)).samples
    rhs = apply_multiplier(lambda xi: m1(xi) * m2(xi), f).samples
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(rhs)))


def test_fields_immutable():
    g = make_grid(1, 8, np.pi)
    f = constant_field(g)
    with pytest.raises(ValueError):
        f.samples[0] = 3.0


def test_field_shape_mismatch():
    g = make_grid(1, 8, np.pi)
    with pytest.raises(ValueError):
        Field(grid=g, representation="physical", samples=np.zeros(4))


def test_dilate_reindexes_exactly():
    g = make_grid(1, 16, np.pi)
    f = field_from_function(g, lambda x: np.sin(x[..., 0]) + 0.3 * np.cos(2 * x[..., 0]))
    d = dilate_field(f, 2)
    x = g.physical_axis()
    expected = np.sin(2 * x) + 0.3 * np.cos(4 * x)
    assert np.max(np.abs(d.samples - expected)) <= 1e-12


def test_conj_field_spectrum_reflects():
    g = make_grid(1, 16, np.pi)
    f = band_limited_field(g, 5, philox_rng(4))
    spec = transform(f, "spectral").samples
    cspec = transform(conj_field(f), "spectral").samples
    # conj(f) has fhat(xi) = conj(fhat(-xi)) away from the Nyquist row
    for k in range(-5, 6):
        assert cspec[k] == pytest.approx(np.conj(spec[-k]), abs=1e-12)


def test_multiply_fields_matches_numpy():
    g = make_grid(1, 16, np.pi)
    rng = philox_rng(8)
    f, h = random_field(g, rng), random_field(g, rng)
    prod = multiply_fields(f, h)
    assert np.allclose(prod.samples, f.samples * h.samples)


def test_band_limited_support():
    g = make_grid(1, 32, np.pi)
    f = band_limited_field(g, 6, philox_rng(7))
    spec = f.samples
    r = np.abs(g.frequency_axis())
    assert np.all(np.abs(spec[r > 6.01]) == 0)
    assert np.all(np.abs(spec[r <= 6.0]) > 0)


def test_field_from_spectrum_single_mode():
    g = make_grid(1, 16, np.pi)
    spec = np.zeros(16, dtype=complex)
    spec[3] = 2 * np.pi
    f = transform(field_from_spectrum(g, spec), "physical")
    x = g.physical_axis()
    assert np.max(np.abs(f.samples - np.exp(3j * x))) <= 1e-12
