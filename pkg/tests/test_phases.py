import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscilab.phases import (
    builtin_phase,
    custom_phase,
    eval_phase,
    grad_phase,
    homogeneous_power,
    klein_gordon,
    scale_phase,
    verify_order_bounds,
    zero_phase,
)


def test_wave_phase_at_3_4():
    assert eval_phase(builtin_phase("wave"), [3.0, 4.0]) == pytest.approx(5.0)


def test_klein_gordon_at_origin():
    assert eval_phase(klein_gordon(), [0.0]) == pytest.approx(1.0)


def test_water_wave_at_4():
    assert eval_phase(builtin_phase("water_wave"), [4.0]) == pytest.approx(2.0)


def test_homogeneous_phase_vanishes_at_origin():
    for name in ("water_wave", "wave", "capillary", "airy"):
        assert eval_phase(builtin_phase(name), [0.0, 0.0]) == 0.0


def test_schrodinger_gradient():
    grad = grad_phase(builtin_phase("schrodinger"), [1.0, 2.0])
    assert np.allclose(grad, [2.0, 4.0])


def test_klein_gordon_gradient_at_origin():
    assert np.allclose(grad_phase(klein_gordon(), [0.0, 0.0]), 0.0)


def test_gradient_rejected_at_singularity():
    with pytest.raises(ValueError):
        grad_phase(builtin_phase("wave"), [0.0])


def test_custom_phase_fd_gradient():
    phase = custom_phase(lambda xi: np.sqrt(np.sum(xi**2, axis=-1)), s=1.0)
    g = grad_phase(phase, [3.0])
    assert abs(g[0] - 1.0) <= 1e-6


@settings(max_examples=40, deadline=None)
@given(s=st.sampled_from([0.5, 1.0, 1.5, 2.0, 3.0]),
       t=st.sampled_from([2.0, 4.0, 0.5]),
       xi=st.lists(st.floats(-50, 50), min_size=1, max_size=2).filter(
           lambda v: sum(x * x for x in v) > 1e-6))
def test_homogeneity_exact(s, t, xi):
    phase = homogeneous_power(s)
    xi = np.asarray(xi)
    lhs = eval_phase(phase, t * xi)
    rhs = t**s * eval_phase(phase, xi)
    assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.mark.parametrize("name", ["water_wave", "capillary", "schrodinger", "airy",
                                  "klein_gordon"])
def test_gradient_matches_finite_differences(name):
    phase = builtin_phase(name)
    rng = np.random.default_rng(11)
    xi = rng.uniform(-8, 8, size=(50, 2))
    xi = xi[np.linalg.norm(xi, axis=1) >= 1.0]
    analytic = grad_phase(phase, xi)
    h = 1e-5 * np.maximum(1.0, np.linalg.norm(xi, axis=1))[:, None]
    for i in range(2):
        e = np.zeros(2)
        e[i] = 1.0
        fd = (phase.fn(xi + h * e) - phase.fn(xi - h * e)) / (2 * h[:, 0])
        denom = np.maximum(np.abs(analytic[:, i]), 1.0)
        assert np.max(np.abs(fd - analytic[:, i]) / denom) <= 1e-6


def test_scale_phase():
    phase = scale_phase(builtin_phase("schrodinger"), -2.0)
    assert eval_phase(phase, [3.0]) == pytest.approx(-18.0)
    assert np.allclose(grad_phase(phase, [3.0]), [-12.0])


def test_zero_phase():
    assert eval_phase(zero_phase(), [5.0, 1.0]) == 0.0


def test_order_bounds_quadratic_alpha0():
    phase = homogeneous_power(2.0)
    samples = np.linspace(1.0, 16.0, 16)[:, None]
    rep = verify_order_bounds(phase, 2.0, 0, samples)
    assert rep.constants[(0,)] == pytest.approx(1.0, rel=1e-12)


def test_order_bounds_wave_first_derivative():
    phase = homogeneous_power(1.0)
    samples = np.linspace(1.0, 32.0, 16)[:, None]
    rep = verify_order_bounds(phase, 1.0, 1, samples)
    assert rep.constants[(1,)] == pytest.approx(1.0, rel=1e-4)


def test_order_bounds_klein_gordon_finite():
    phase = klein_gordon()
    rng = np.random.default_rng(3)
    r = np.exp(rng.uniform(0, np.log(64), size=200))
    theta = rng.uniform(0, 2 * np.pi, size=200)
    samples = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    rep = verify_order_bounds(phase, 1.0, 2, samples)
    assert all(np.isfinite(c) for c in rep.constants.values())
    assert len(rep.constants) == 6  # multi-indices of order <= 2 in 2 dims


def test_order_bounds_stable_under_refinement():
    phase = klein_gordon()
    base = np.exp(np.linspace(0, np.log(64), 40))[:, None]
    fine = np.exp(np.linspace(0, np.log(64), 80))[:, None]
    rep_a = verify_order_bounds(phase, 1.0, 2, base)
    rep_b = verify_order_bounds(phase, 1.0, 2, fine)
    for alpha, c in rep_a.constants.items():
        assert rep_b.constants[alpha] == pytest.approx(c, rel=0.05)


def test_order_bounds_rejects_degenerate_samples():
    with pytest.raises(ValueError):
        verify_order_bounds(homogeneous_power(1.0), 1.0, 1, np.ones((4, 1)))


def test_order_bounds_rejects_origin():
    samples = np.concatenate([np.zeros((1, 1)), np.ones((8, 1))])
    with pytest.raises(ValueError):
        verify_order_bounds(homogeneous_power(1.0), 1.0, 1, samples)


def test_unknown_phase_kind():
    with pytest.raises(ValueError):
        builtin_phase("quartic")
