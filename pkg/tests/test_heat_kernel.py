"""Sampled Gauss-Weierstrass kernel and its grid application."""

import numpy as np
import pytest
from scipy import ndimage

from chernoff_heat import (
    EdgeClipping,
    GaussianBump1D,
    Grid,
    MismatchedGrid,
    ScalarField,
    StepTooSmall,
    apply_gaussian,
    heat_kernel_value,
    make_plan,
)
from chernoff_heat.heat_kernel import _GEMM_THRESHOLD


def _line(lo, hi, h):
    n = int(round((hi - lo) / h)) + 1
    return Grid(origin=(lo,), spacing=h, shape=(n,))


def _square(lo, hi, h):
    n = int(round((hi - lo) / h)) + 1
    return Grid(origin=(lo, lo), spacing=h, shape=(n, n))


# ---------------------------------------------------------------------------
# density values


def test_kernel_value_closed_form():
    t = 0.03
    x = np.array([-0.4, 0.0, 0.7])
    expect = (4 * np.pi * t) ** -0.5 * np.exp(-(x**2) / (4 * t))
    assert np.max(np.abs(heat_kernel_value(t, x) - expect)) < 1e-16


def test_kernel_value_2d_is_product_of_1d():
    t = 0.05
    pts = np.array([[0.3, -0.2], [0.0, 0.0], [1.0, 0.5]])
    got = heat_kernel_value(t, pts, ndim=2)
    expect = heat_kernel_value(t, pts[:, 0]) * heat_kernel_value(t, pts[:, 1])
    assert np.max(np.abs(got - expect)) < 1e-15


def test_kernel_value_integrates_to_one():
    t = 0.01
    h = 1e-3
    x = np.arange(-1.5, 1.5 + h / 2, h)
    assert np.trapezoid(heat_kernel_value(t, x), dx=h) == pytest.approx(1.0, abs=1e-10)


def test_kernel_value_validation():
    with pytest.raises(ValueError):
        heat_kernel_value(0.0, 0.5)
    with pytest.raises(ValueError):
        heat_kernel_value(0.1, 0.5, ndim=3)


# ---------------------------------------------------------------------------
# plan construction


def test_plan_weights_normalised_symmetric_nonnegative():
    plan = make_plan(1e-3, 5e-3, 1)
    w = plan.weights
    assert abs(w.sum() - 1.0) < 1e-14
    assert np.array_equal(w, w[::-1])
    assert np.all(w > 0.0)
    assert len(w) == 2 * plan.half_width + 1


def test_plan_second_moment_matches_diffusion():
    # variance of the discrete kernel must be 2 t: that is the whole
    # point of the scheme's consistency
    t, h = 1e-3, 5e-3
    plan = make_plan(t, h, 1)
    offsets = np.arange(-plan.half_width, plan.half_width + 1) * h
    moment = np.sum(plan.weights * offsets**2)
    assert moment == pytest.approx(2.0 * t, rel=1e-4)


def test_plan_radius_formula():
    t, tol = 2e-3, 1e-10
    plan = make_plan(t, 1e-3, 1, tol)
    assert plan.radius == pytest.approx(2.0 * np.sqrt(t * np.log(1.0 / tol)))


def test_plan_rejects_unresolvable_steps():
    with pytest.raises(StepTooSmall, match="refine the grid"):
        make_plan(1e-8, 0.01, 1)


def test_plan_validation():
    with pytest.raises(ValueError):
        make_plan(0.0, 0.01, 1)
    with pytest.raises(ValueError):
        make_plan(1e-3, 0.0, 1)
    with pytest.raises(ValueError):
        make_plan(1e-3, 0.01, 1, tol=2e-3)  # beyond the supported range
    with pytest.raises(ValueError):
        make_plan(1e-3, 0.01, 1, tol=0.0)
    with pytest.raises(ValueError):
        make_plan(1e-3, 0.01, 3)


# ---------------------------------------------------------------------------
# application to fields


def test_constant_field_is_preserved():
    grid = _line(-1.0, 2.0, 0.01)
    field = ScalarField(grid, np.full(grid.shape, 0.7))
    out = apply_gaussian(field, make_plan(4e-4, 0.01, 1))
    assert np.max(np.abs(out.values - 0.7)) < 1e-13


def test_free_space_gaussian_matches_closed_form():
    h = 2e-3
    grid = _line(-1.5, 2.5, h)
    bump = GaussianBump1D(0.5, 1e-3)
    field = ScalarField(grid, bump(grid.axis_coords(0)))
    t = 4e-4
    out = apply_gaussian(field, make_plan(t, h, 1))
    expect = bump.evolved(t)(grid.axis_coords(0))
    assert np.max(np.abs(out.values - expect)) < 1e-6


def test_two_half_steps_compose_to_one():
    h = 2e-3
    grid = _line(-1.0, 2.0, h)
    bump = GaussianBump1D(0.5, 2e-3)
    field = ScalarField(grid, bump(grid.axis_coords(0)))
    half = make_plan(2e-4, h, 1)
    full = make_plan(4e-4, h, 1)
    twice = apply_gaussian(apply_gaussian(field, half), half)
    once = apply_gaussian(field, full)
    assert np.max(np.abs(twice.values - once.values)) < 1e-8


def test_sup_contraction_and_positivity():
    rng = np.random.default_rng(7)
    grid = _line(0.0, 1.0, 1e-3)
    vals = rng.uniform(0.0, 1.0, grid.shape)
    vals[:220] = vals[219]  # flatten the edge bands so clipping cannot trip
    vals[-220:] = vals[-220]
    field = ScalarField(grid, vals)
    out = apply_gaussian(field, make_plan(4e-4, 1e-3, 1))
    assert np.max(out.values) <= np.max(vals) + 1e-14
    assert np.min(out.values) >= 0.0


def test_edge_clipping_detected():
    h = 0.01
    grid = _line(0.0, 1.0, h)
    bump = GaussianBump1D(0.05, 1e-3)  # mass parked on the left edge
    field = ScalarField(grid, bump(grid.axis_coords(0)))
    with pytest.raises(EdgeClipping, match="enlarge the grid pad"):
        apply_gaussian(field, make_plan(1e-3, h, 1))


def test_mismatched_grid_rejected():
    grid = _line(0.0, 1.0, 0.01)
    field = ScalarField(grid, np.zeros(grid.shape))
    with pytest.raises(MismatchedGrid):
        apply_gaussian(field, make_plan(4e-4, 0.02, 1))
    with pytest.raises(MismatchedGrid):
        apply_gaussian(field, make_plan(4e-4, 0.01, 2))


def test_2d_separable_application():
    h = 0.01
    grid = _square(-1.0, 1.0, h)
    x = grid.axis_coords(0)
    field = ScalarField(grid, np.exp(-(x[:, None] ** 2 + x[None, :] ** 2) / 4e-3))
    t = 2e-4
    out = apply_gaussian(field, make_plan(t, h, 2))
    # product structure: evolving the separable field evolves each factor
    gx = GaussianBump1D(0.0, 1e-3)
    line = gx.evolved(t)(x)
    assert np.max(np.abs(out.values - line[:, None] * line[None, :])) < 1e-6


def test_dense_fast_path_matches_direct_correlation():
    # big enough that the separable matrix product kicks in
    h = 0.01
    grid = _square(-3.0, 2.99, h)
    assert grid.shape == (600, 600)
    x, y = grid.axis_coords(0), grid.axis_coords(1)
    vals = 0.5 + np.exp(-((x[:, None]) ** 2 + (y[None, :]) ** 2) / 2e-2)
    field = ScalarField(grid, vals)
    t = 8.143e-4  # tuned for 61 taps at tol 1e-12
    plan = make_plan(t, h, 2)
    assert len(plan.weights) == 61
    assert vals.size * len(plan.weights) > _GEMM_THRESHOLD
    out = apply_gaussian(field, plan)
    manual = ndimage.correlate1d(vals, plan.weights, axis=0, mode="nearest")
    manual = ndimage.correlate1d(manual, plan.weights, axis=1, mode="nearest")
    assert np.max(np.abs(out.values - manual)) < 1e-13
