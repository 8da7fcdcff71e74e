# pylint: disable=redefined-outer-name

"""Tests for plane_navier_stokes.radial_grid."""

import numpy as np
import pytest
from .context import plane_navier_stokes

from plane_navier_stokes.errors import GridError, OperatorError, ProfileError
from plane_navier_stokes.radial_grid import (
    Grading, Junction, RadialProfile, TailModel, build_grid, differentiate, fit_tail, integrate,
    segment_integrals, tail_exponent)


@pytest.fixture
def grid():
    return build_grid(1.0, 16.0, 128)


@pytest.fixture
def square(grid):
    """s^2 in closed form."""
    return RadialProfile.from_function(grid, lambda s: np.asarray(s, dtype=float) ** 2 + 0j)

# --- TESTS --- #

def test_build_grid_layout(grid):
    nodes = grid.nodes
    assert nodes[0] == 0.0
    assert nodes[-1] == 16.0
    assert nodes[grid.r_star_index] == 1.0
    assert grid.r_star == 1.0
    assert np.all(np.diff(nodes) > 0.0)
    assert grid.size == 128
    assert grid.quadrature_points.shape == (127, grid.quadrature_order)


def test_build_grid_uniform_snaps_r_star():
    grid = build_grid(1.5, 64.0, 512, Grading('uniform'))
    assert grid.nodes[grid.r_star_index] == 1.5
    assert np.all(np.diff(grid.nodes) > 0.0)


@pytest.mark.parametrize('r_star, r_max, size', [
    (0.5, 16.0, 128),
    (1.0, 3.0, 128),
    (1.0, 16.0, 32),
])
def test_build_grid_rejects(r_star, r_max, size):
    with pytest.raises(GridError):
        build_grid(r_star, r_max, size)


def test_build_grid_rejects_unresolved_origin():
    with pytest.raises(GridError):
        build_grid(1.0, 1000.0, 64, Grading('uniform'))


def test_build_grid_rejects_unknown_grading():
    with pytest.raises(GridError):
        build_grid(1.0, 16.0, 128, Grading('chebyshev'))


def test_integrate_closed_form(square):
    assert integrate(square, 0.0, 2.0) == pytest.approx(8.0 / 3.0, rel=1e-12)
    assert integrate(square, 0.3, 0.7, power=1.0) == pytest.approx((0.7 ** 4 - 0.3 ** 4) / 4.0, rel=1e-12)


def test_integrate_hermite_is_exact_for_quintics(grid):
    r = grid.nodes
    profile = RadialProfile(grid, r ** 2, (2.0 * r, np.full(grid.size, 2.0)))
    assert integrate(profile, 0.0, 2.0) == pytest.approx(8.0 / 3.0, rel=1e-12)


def test_integrate_spline_is_exact_for_cubics(grid):
    r = grid.nodes
    profile = RadialProfile(grid, r ** 3)
    assert integrate(profile, 0.0, 2.0) == pytest.approx(4.0, rel=1e-10)


def test_integrate_uses_tail_beyond_r_max(grid):
    profile = RadialProfile.from_function(
        grid, lambda s: 8.0 / np.maximum(np.asarray(s, dtype=float), 1.0) ** 3 + 0j)
    profile = profile.with_tail(TailModel(8.0, 3.0))
    assert integrate(profile, 2.0, np.inf) == pytest.approx(1.0, rel=1e-10)


def test_integrate_without_tail_raises(grid):
    profile = RadialProfile(grid, np.zeros(grid.size))
    with pytest.raises(ProfileError):
        integrate(profile, 1.0, np.inf)


def test_integrate_rejects_reversed_range(square):
    with pytest.raises(OperatorError):
        integrate(square, 2.0, 1.0)


def test_segment_integrals_sum_to_integral(square, grid):
    total = np.sum(segment_integrals(square))
    assert total == pytest.approx(grid.r_max ** 3 / 3.0, rel=1e-12)


def test_tail_model_integral():
    tail = TailModel(2.0, 3.0)
    assert tail.integral(4.0) == pytest.approx(1.0 / 16.0, rel=1e-14)
    assert tail.integral(4.0, 8.0, power=2.0) == pytest.approx(2.0 * np.log(2.0), rel=1e-14)


def test_tail_model_rejects_divergence():
    with pytest.raises(OperatorError):
        TailModel(1.0, 1.5).integral(1.0, np.inf, power=1.0)
    with pytest.raises(ProfileError):
        TailModel(1.0, 1.0)


def test_profile_rejects_mismatched_tail(grid):
    with pytest.raises(ProfileError):
        RadialProfile(grid, np.ones(grid.size), tail=TailModel(10.0, 3.0))


def test_fit_tail_recovers_power_law(grid):
    r = np.maximum(grid.nodes, 1.0)
    profile = RadialProfile(grid, (3.0 - 1.0j) * r ** -2.5)
    tail = fit_tail(profile, 2.5)
    assert tail.coefficient == pytest.approx(3.0 - 1.0j, rel=1e-12)


def test_differentiate_is_exact_for_quadratics(square, grid):
    first = differentiate(square, 1)
    np.testing.assert_allclose(first.values, 2.0 * grid.nodes, atol=1e-9)
    np.testing.assert_allclose(first.derivatives[0], 2.0, atol=1e-7)
    second = differentiate(square, 2)
    np.testing.assert_allclose(second.values, 2.0, atol=1e-7)
    with pytest.raises(ProfileError):
        differentiate(square, 3)


def test_second_derivative_at_the_endpoints(grid):
    cube = RadialProfile.from_function(grid, lambda s: np.asarray(s, dtype=float) ** 3 + 0j)
    second = differentiate(cube, 2).values
    assert abs(second[0]) <= 1e-8
    assert second[-1] == pytest.approx(6.0 * grid.r_max, rel=1e-9)
    first = differentiate(cube, 1)
    np.testing.assert_array_equal(first.derivatives[0], second)


def test_profile_arithmetic(grid):
    r = grid.nodes
    f = RadialProfile(grid, r, (np.ones(grid.size),))
    g = RadialProfile(grid, 1j * r, (1j * np.ones(grid.size),))
    h = 2.0 * f - g
    np.testing.assert_array_equal(h.values, (2.0 - 1.0j) * r)
    np.testing.assert_array_equal(h.derivative(1), np.full(grid.size, 2.0 - 1.0j))
    np.testing.assert_array_equal((-f).values, -r)
    np.testing.assert_array_equal(f.conj().values, r)
    with pytest.raises(ProfileError):
        f.derivative(2)


def test_zeros_profile_integrates_to_zero(grid):
    zero = RadialProfile.zeros(grid)
    assert zero.order == 2
    assert integrate(zero, 0.0, np.inf) == 0.0


def test_junction_combine_and_conj():
    a = Junction(1.0, 2.0j, 1.0, 2.0j)
    b = Junction(1.0, 0.0, 3.0, 1.0, 5.0, 6.0)
    c = a.combine(b, 2.0, 1.0)
    assert (c.left_value, c.right_value) == (3.0, 5.0)
    assert c.left_second is None
    assert a.conj().left_derivative == -2.0j


def test_tail_exponent_roles():
    assert tail_exponent('vorticity', 0.25) == 2.25
    assert tail_exponent('source', 0.25) == 2.25
    assert tail_exponent('bilinear', 0.25) == 1.25
