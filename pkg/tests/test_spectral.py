# pylint: disable=redefined-outer-name

"""Tests for plane_navier_stokes.spectral and plane_navier_stokes.parallel."""

import numpy as np
import pytest
from .context import plane_navier_stokes

from plane_navier_stokes.errors import GridError, SymmetryError
from plane_navier_stokes.parallel import THREADS_VARIABLE, map_modes, worker_count
from plane_navier_stokes.radial_grid import RadialProfile, build_grid
from plane_navier_stokes.spectral import (
    FourierVector, angular_grid, decompose_angular, parseval_gap, spectral_tail, synthesize_angular,
    synthesize_rows)


@pytest.fixture
def grid():
    return build_grid(1.0, 16.0, 128)


def field(r, theta):
    """r cos(theta) + r^2 sin(2 theta) + exp(-r^2)."""
    return r * np.cos(theta) + r ** 2 * np.sin(2.0 * theta) + np.exp(-r ** 2)


@pytest.fixture
def modes(grid):
    return decompose_angular(field, 3, grid)

# --- TESTS --- #

def test_decompose_angular_coefficients(modes, grid):
    r = grid.nodes
    np.testing.assert_allclose(modes[0].values, np.exp(-r ** 2), atol=1e-12)
    np.testing.assert_allclose(modes[1].values, r / 2.0, atol=1e-12)
    np.testing.assert_allclose(modes[2].values, -0.5j * r ** 2, atol=1e-10)
    np.testing.assert_allclose(modes[3].values, 0.0, atol=1e-10)


def test_negative_modes_are_conjugates(modes):
    np.testing.assert_array_equal(modes[-2].values, np.conj(modes[2].values))
    assert modes.indices == range(-3, 4)
    with pytest.raises(IndexError):
        modes[4]


def test_synthesis_inverts_decomposition(modes, grid):
    theta = angular_grid(17)
    expected = field(grid.nodes[:, None], theta[None, :])
    np.testing.assert_allclose(synthesize_angular(modes, theta), expected, atol=1e-9)


def test_decompose_from_samples(grid):
    theta = angular_grid(16)
    samples = field(grid.nodes[:, None], theta[None, :])
    fv = decompose_angular(samples, 3, grid)
    np.testing.assert_allclose(fv[1].values, grid.nodes / 2.0, atol=1e-12)


def test_decompose_rejects_too_few_angles(grid):
    with pytest.raises(GridError):
        decompose_angular(field, 3, grid, theta_count=8)


def test_stack_shape(modes, grid):
    stacked = modes.stack()
    assert stacked.shape == (7, grid.size)
    np.testing.assert_array_equal(stacked[3], modes[0].values)
    np.testing.assert_array_equal(stacked[1], modes[-2].values)


def test_zero_mode_must_be_real(grid):
    with pytest.raises(SymmetryError):
        FourierVector((RadialProfile(grid, 1j * np.ones(grid.size)),))


def test_zero_mode_rounding_is_projected(grid):
    values = np.ones(grid.size) + 1e-14j
    fv = FourierVector((RadialProfile(grid, values),))
    assert np.all(fv[0].values.imag == 0.0)


def test_modes_must_vanish_at_origin(grid):
    zero = RadialProfile(grid, np.ones(grid.size))
    with pytest.raises(SymmetryError):
        FourierVector((zero, RadialProfile(grid, np.ones(grid.size))))


def test_real_linear_combinations(modes):
    twice = modes + modes
    np.testing.assert_allclose(twice[1].values, 2.0 * modes[1].values, rtol=0, atol=1e-15)
    np.testing.assert_array_equal((modes - modes)[2].values, 0.0)
    np.testing.assert_array_equal((-modes)[1].values, -modes[1].values)


def test_synthesize_rows_matches_vector_synthesis(modes):
    theta = angular_grid(9)
    rows = np.array([m.values for m in modes.modes])
    np.testing.assert_array_equal(synthesize_rows(rows, theta), synthesize_angular(modes, theta))


def test_parseval_gap(modes, grid):
    theta = angular_grid(32)
    samples = field(grid.nodes[:, None], theta[None, :])
    assert parseval_gap(modes, samples) < 1e-10


def test_spectral_tail(modes):
    assert spectral_tail(modes) < 1e-10
    assert spectral_tail(FourierVector(modes.modes[:3])) > 1.0


def test_worker_count(monkeypatch):
    monkeypatch.setenv(THREADS_VARIABLE, '4')
    assert worker_count() == 4
    monkeypatch.setenv(THREADS_VARIABLE, 'many')
    assert worker_count() == 1
    monkeypatch.delenv(THREADS_VARIABLE)
    assert worker_count() == 1


def test_map_modes_is_independent_of_threads(monkeypatch, modes):
    def square(n):
        return modes[n].values * modes[n].values
    monkeypatch.setenv(THREADS_VARIABLE, '1')
    serial = map_modes(square, range(4))
    monkeypatch.setenv(THREADS_VARIABLE, '4')
    threaded = map_modes(square, range(4))
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a, b)
