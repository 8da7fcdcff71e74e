# pylint: disable=redefined-outer-name

"""Tests for plane_navier_stokes.verify."""

import numpy as np
import pytest
from .context import plane_navier_stokes

from plane_navier_stokes.errors import NormSpecError, ProfileError
from plane_navier_stokes.operators import map_L
from plane_navier_stokes.profiles import PolynomialBump, PowerLaw, gaussian_bump, mode_vector
from plane_navier_stokes.radial_grid import Junction, RadialProfile, build_grid
from plane_navier_stokes.solver import background_from_phi, map_Phi, reconstruct_solution
from plane_navier_stokes.spectral import FourierVector
from plane_navier_stokes.verify import (
    OracleRow, OracleSettings, WeightedNormSpec, consistency_Gstar_H, decay_metric, distance_weighted,
    matching_gap, norm_weighted, random_band, residual_system, run_oracles, sampled_matching_gap,
    sampled_stream_residual)


@pytest.fixture
def grid():
    return build_grid(1.0, 32.0, 256)


@pytest.fixture
def weak(grid):
    return background_from_phi(PolynomialBump(0.06, 2, 1.0).profile(grid), 1.0, grid)


@pytest.fixture
def zero(grid):
    return mode_vector(grid, 3, [])


@pytest.fixture
def band(grid):
    return mode_vector(grid, 3, [
        (0, gaussian_bump(0, 0.02, 1.0)),
        (2, gaussian_bump(2, 0.01 - 0.03j, 1.5)),
        (3, gaussian_bump(3, 0.01j, 0.8)),
    ])

# --- TESTS --- #

@pytest.mark.parametrize('family, alpha, kappa, m', [
    ('W', 1.0, 2.0, 0),
    ('U', 0.0, 2.0, 0),
    ('U', 1.0, 1.0, 0),
    ('U', 1.0, 2.0, 3),
    ('V', 1.0, 1.5, 2),
])
def test_norm_spec_rejects(family, alpha, kappa, m):
    with pytest.raises(NormSpecError):
        WeightedNormSpec(family, alpha, kappa, m)


def test_norm_spec_orders():
    assert list(WeightedNormSpec('U', 1.0, 3.0, 2).orders(0)) == [0, 1, 2]
    assert list(WeightedNormSpec('V', 1.0, 3.0, 2).orders(0)) == [1, 2]
    assert list(WeightedNormSpec('V', 1.0, 3.0, 2).orders(1)) == [0, 1, 2]


def test_norm_of_zero(zero):
    assert norm_weighted(zero, WeightedNormSpec('U', 2.5, 3.0, 1)) == 0.0


def test_norm_of_matched_power_law(grid):
    fv = FourierVector((PowerLaw(1.0, 0, 2.5).profile(grid),))
    assert norm_weighted(fv, WeightedNormSpec('U', 2.5, 2.0)) == pytest.approx(1.0, rel=1e-12)


def test_norm_is_homogeneous(band):
    spec = WeightedNormSpec('U', 2.0, 4.0, 1)
    assert norm_weighted(band.scaled(-3.0), spec) == pytest.approx(3.0 * norm_weighted(band, spec), rel=1e-14)


def test_norm_grows_with_weights(band):
    assert norm_weighted(band, WeightedNormSpec('U', 1.0, 2.0)) < norm_weighted(band, WeightedNormSpec('U', 2.0, 2.0))
    assert norm_weighted(band, WeightedNormSpec('U', 1.0, 2.0)) < norm_weighted(band, WeightedNormSpec('U', 1.0, 3.0))


def test_v_family_ignores_zero_mode_level(grid):
    flat = RadialProfile(grid, np.ones(grid.size), (np.zeros(grid.size), np.zeros(grid.size)))
    fv = FourierVector((flat,))
    assert norm_weighted(fv, WeightedNormSpec('V', 1.0, 2.0, 1)) == 0.0
    assert norm_weighted(fv, WeightedNormSpec('U', 1.0, 2.0, 1)) > 1.0


def test_norm_needs_derivative_data(grid):
    fv = FourierVector((RadialProfile(grid, np.ones(grid.size)),))
    with pytest.raises(ProfileError):
        norm_weighted(fv, WeightedNormSpec('U', 1.0, 2.0, 1))


def test_distance(band, zero, grid):
    spec = WeightedNormSpec('U', 2.0, 4.0, 1)
    assert distance_weighted(band, band, spec) == 0.0
    assert distance_weighted(band, zero, spec) == pytest.approx(norm_weighted(band, spec), rel=1e-14)
    with pytest.raises(ProfileError):
        distance_weighted(band, mode_vector(grid, 2, []), spec)


def test_residuals_of_zero(zero, weak):
    report = residual_system(map_L(zero), zero, zero, weak)
    assert report.scale == 0.0
    assert report.stream_max == 0.0
    assert report.vorticity_max == 0.0
    assert set(report.stream) == {0, 1, 2, 3}


def test_stream_residual_of_mapped_vorticity(band, weak):
    report = residual_system(map_L(band), band, band, weak)
    assert report.stream_max <= 1e-10


def test_consistency_of_zero(zero):
    assert consistency_Gstar_H(map_L(zero), zero) == 0.0


def test_decay_metric_rejects_alpha(zero, weak):
    solution = reconstruct_solution(zero, zero, weak)
    with pytest.raises(NormSpecError):
        decay_metric(solution, 0.0)
    with pytest.raises(NormSpecError):
        decay_metric(solution, 0.5)


def test_decay_metric_of_background_alone(zero, weak):
    solution = reconstruct_solution(zero, zero, weak)
    metric = decay_metric(solution, 0.5 * weak.rho_star)
    assert metric.sup_value == 0.0
    assert metric.fitted_slope is None
    assert metric.window == (2.0, 16.0)


def test_matching_gap_of_blended_mode(band, weak):
    gap = matching_gap(map_Phi(band, weak), 2)
    assert gap.value < 1e-8
    assert gap.derivative < 1e-8
    assert gap.second is not None


def test_matching_gap_flags_a_jump(grid):
    broken = RadialProfile(grid, np.zeros(grid.size), junction=Junction(1.0, 0.0, 1.1, 0.0))
    fv = FourierVector((RadialProfile.zeros(grid), RadialProfile.zeros(grid), broken))
    gap = matching_gap(fv, -2)
    assert gap.value == pytest.approx(0.1 / 1.1)
    assert gap.derivative == 0.0
    assert gap.second is None


def test_matching_gap_of_smooth_profile(band):
    gap = matching_gap(band, 2)
    assert gap.value < 1e-4
    assert gap.derivative < 1e-4


def test_oracle_row():
    assert OracleRow('ok', 1e-9, 1e-8).passed
    assert not OracleRow('too large', 1e-7, 1e-8).passed
    assert not OracleRow('nan', float('nan'), 1e-8).passed


def test_oracles_pass():
    rows = run_oracles(OracleSettings())
    assert len({row.name for row in rows}) == len(rows)
    failed = [(row.name, row.value) for row in rows if not row.passed]
    assert not failed


def test_unnormalized_gap_scales_quadratically(grid):
    band = random_band(grid, 3, np.random.default_rng(5), scale=1.0)
    gamma = map_L(band)
    modes = list(gamma.modes)
    d1, d2, d3 = modes[1].derivatives
    modes[1] = RadialProfile(grid, modes[1].values, (2.0 * d1, d2, d3))
    skewed = FourierVector(tuple(modes), derivative_only=True)
    base = consistency_Gstar_H(skewed, band, normalize=False)
    assert base > 0.0
    for c in (2.0, 0.5):
        scaled = consistency_Gstar_H(skewed.scaled(c), band.scaled(c), normalize=False)
        assert scaled == pytest.approx(c * c * base, rel=1e-12)


def test_sampled_matching_gap(grid, band):
    r = grid.nodes
    stepped = FourierVector((RadialProfile.zeros(grid), RadialProfile.zeros(grid),
                             RadialProfile(grid, np.where(r <= 1.0, r * r, 1.1 * r * r))))
    gap = sampled_matching_gap(stepped[2])
    assert gap.value == pytest.approx(0.1 / 1.1, rel=1e-6)
    assert gap.derivative == pytest.approx(0.2 / 2.2, rel=1e-6)
    assert gap.second is None
    smooth = sampled_matching_gap(RadialProfile(grid, band[2].values))
    assert smooth.value < 1e-6
    assert smooth.derivative < 1e-4


def test_sampled_stream_residual(band):
    gamma = map_L(band)
    bare = FourierVector(tuple(RadialProfile(band.grid, m.values) for m in gamma.modes), derivative_only=True)
    residuals = sampled_stream_residual(bare, band)
    assert set(residuals) == {0, 1, 2, 3}
    assert max(residuals.values()) < 1e-2
    assert sampled_stream_residual(bare, band.scaled(2.0))[2] > 1e-2
