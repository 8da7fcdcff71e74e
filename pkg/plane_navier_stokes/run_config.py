"""Run configuration: a TOML document describing one solve."""

from dataclasses import dataclass, field
import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np
import toml

from plane_navier_stokes.errors import ConfigError, SolverError
from plane_navier_stokes.profiles import (
    PiecewisePolynomial, PolynomialBump, RadialFamily, gaussian_bump, mode_vector, power_law)
from plane_navier_stokes.radial_grid import Grading, RadialGrid, RadialProfile, build_grid
from plane_navier_stokes.spectral import FourierVector


BACKGROUND_FAMILIES = ('polynomial-bump', 'piecewise-polynomial')
PERTURBATION_FAMILIES = ('power-law', 'gaussian-bump')

# alpha as a share of the upper end of the decay range, when no alpha is given.
DEFAULT_ALPHA_FRACTION = 0.9


@dataclass(frozen=True)
class BackgroundSpec:
    family: str
    r_star: float
    amplitude: float = 0.0
    power: float = 2.0
    coefficients: Tuple[float, ...] = ()

    def radial_family(self) -> RadialFamily:
        if self.family == 'polynomial-bump':
            return PolynomialBump(self.amplitude, self.power, self.r_star)
        return PiecewisePolynomial(self.coefficients, self.r_star)


@dataclass(frozen=True)
class PerturbationSpec:
    n: int
    family: str
    amplitude: float
    phase: float = 0.0
    width: float = 1.0

    @property
    def complex_amplitude(self) -> complex:
        return complex(self.amplitude * np.exp(1j * self.phase))

    def radial_family(self, alpha: float) -> RadialFamily:
        if self.family == 'power-law':
            return power_law(self.n, self.complex_amplitude, alpha)
        return gaussian_bump(self.n, self.complex_amplitude, self.width)


@dataclass(frozen=True)
class NumericsSpec:
    alpha: Optional[float] = None
    alpha_fraction: float = DEFAULT_ALPHA_FRACTION
    kappa: float = 2.0
    modes: int = 16
    nodes: int = 1024
    r_max: float = 32.0
    grading: str = 'quadratic'
    quadrature_order: int = 6
    tol: float = 1e-8
    max_iter: int = 30
    delta: float = 0.1
    epsilon: float = 1.0
    r_max_study: Tuple[float, ...] = ()


@dataclass(frozen=True)
class OutputSpec:
    directory: str = 'output'
    field_extent: float = 4.0
    field_points: int = 41


@dataclass(frozen=True)
class RunConfig:
    """Everything one solve needs; all quantities are dimensionless."""

    background: BackgroundSpec
    perturbations: Tuple[PerturbationSpec, ...] = ()
    numerics: NumericsSpec = field(default_factory=NumericsSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    def resolve_alpha(self, rho_star: float) -> float:
        """alpha, checked against the decay range (0, min(1/2, rho*))."""
        limit = min(0.5, rho_star)
        alpha = self.numerics.alpha
        if alpha is None:
            alpha = self.numerics.alpha_fraction * limit
        if not 0.0 < alpha < limit:
            raise ConfigError(
                'numerics.alpha={} violates the decay range 0 < alpha < min(1/2, rho*) = {:.6g}'.format(alpha, limit))
        return alpha

    def grid(self, r_max: float = None) -> RadialGrid:
        numerics = self.numerics
        try:
            return build_grid(self.background.r_star, numerics.r_max if r_max is None else r_max,
                              numerics.nodes, Grading(numerics.grading), numerics.quadrature_order)
        except SolverError as e:
            raise ConfigError('Invalid grid: {}'.format(e))

    def forcing(self, grid: RadialGrid) -> RadialProfile:
        return self.background.radial_family().profile(grid)

    def perturbation(self, grid: RadialGrid, alpha: float) -> FourierVector:
        components = [(p.n, p.radial_family(alpha)) for p in self.perturbations]
        return mode_vector(grid, self.numerics.modes, components, alpha)


def _pick(table: Dict[str, Any], name: str, key: str, kind, default=None, required=False):
    if key not in table:
        if required:
            raise ConfigError('{}.{} is required'.format(name, key))
        return default
    try:
        return kind(table[key])
    except (TypeError, ValueError) as e:
        raise ConfigError('{}.{} has an invalid value {!r}: {}'.format(name, key, table[key], e))


def _background(table: Dict[str, Any]) -> BackgroundSpec:
    family = _pick(table, 'background', 'family', str, required=True)
    if family not in BACKGROUND_FAMILIES:
        raise ConfigError('background.family must be one of {}, got {!r}'.format(BACKGROUND_FAMILIES, family))
    spec = BackgroundSpec(
        family,
        _pick(table, 'background', 'r_star', float, required=True),
        _pick(table, 'background', 'amplitude', float, 0.0, required=family == 'polynomial-bump'),
        _pick(table, 'background', 'power', float, 2.0),
        _pick(table, 'background', 'coefficients', lambda v: tuple(float(c) for c in v), (),
              required=family == 'piecewise-polynomial'))
    if spec.r_star < 1.0:
        raise ConfigError('background.r_star must be at least 1, got {}'.format(spec.r_star))
    try:
        spec.radial_family()
    except SolverError as e:
        raise ConfigError('background: {}'.format(e))
    return spec


def _perturbation(index: int, table: Dict[str, Any], modes: int) -> PerturbationSpec:
    name = 'perturbation[{}]'.format(index)
    family = _pick(table, name, 'family', str, required=True)
    if family not in PERTURBATION_FAMILIES:
        raise ConfigError('{}.family must be one of {}, got {!r}'.format(name, PERTURBATION_FAMILIES, family))
    spec = PerturbationSpec(
        _pick(table, name, 'n', int, required=True),
        family,
        _pick(table, name, 'amplitude', float, required=True),
        _pick(table, name, 'phase', float, 0.0),
        _pick(table, name, 'width', float, 1.0))
    if not 0 <= spec.n <= modes:
        raise ConfigError('{}.n={} must lie in [0, numerics.modes={}]'.format(name, spec.n, modes))
    if spec.n == 0 and spec.phase != 0.0:
        raise ConfigError('{}.phase must be 0 for the real zero mode'.format(name))
    if spec.width <= 0.0:
        raise ConfigError('{}.width must be positive'.format(name))
    return spec


def _numerics(table: Dict[str, Any]) -> NumericsSpec:
    defaults = NumericsSpec()
    spec = NumericsSpec(
        _pick(table, 'numerics', 'alpha', float),
        _pick(table, 'numerics', 'alpha_fraction', float, defaults.alpha_fraction),
        _pick(table, 'numerics', 'kappa', float, defaults.kappa),
        _pick(table, 'numerics', 'modes', int, defaults.modes),
        _pick(table, 'numerics', 'nodes', int, defaults.nodes),
        _pick(table, 'numerics', 'r_max', float, defaults.r_max),
        _pick(table, 'numerics', 'grading', str, defaults.grading),
        _pick(table, 'numerics', 'quadrature_order', int, defaults.quadrature_order),
        _pick(table, 'numerics', 'tol', float, defaults.tol),
        _pick(table, 'numerics', 'max_iter', int, defaults.max_iter),
        _pick(table, 'numerics', 'delta', float, defaults.delta),
        _pick(table, 'numerics', 'epsilon', float, defaults.epsilon),
        _pick(table, 'numerics', 'r_max_study', lambda v: tuple(float(x) for x in v), ()))
    if not 0.0 < spec.alpha_fraction < 1.0:
        raise ConfigError('numerics.alpha_fraction must lie in (0, 1), got {}'.format(spec.alpha_fraction))
    if spec.kappa <= 1.0:
        raise ConfigError('numerics.kappa must exceed 1, got {}'.format(spec.kappa))
    if spec.modes < 0:
        raise ConfigError('numerics.modes must be non-negative, got {}'.format(spec.modes))
    if spec.grading not in ('quadratic', 'uniform'):
        raise ConfigError('numerics.grading must be quadratic or uniform, got {!r}'.format(spec.grading))
    if spec.tol <= 0.0 or spec.max_iter < 1:
        raise ConfigError('numerics.tol must be positive and numerics.max_iter at least 1')
    return spec


def _output(table: Dict[str, Any]) -> OutputSpec:
    defaults = OutputSpec()
    spec = OutputSpec(
        _pick(table, 'output', 'directory', str, defaults.directory),
        _pick(table, 'output', 'field_extent', float, defaults.field_extent),
        _pick(table, 'output', 'field_points', int, defaults.field_points))
    if spec.field_extent <= 0.0 or spec.field_points < 2:
        raise ConfigError('output.field_extent must be positive and output.field_points at least 2')
    return spec


def parse_config(document: Dict[str, Any]) -> RunConfig:
    """Validates a decoded TOML document."""
    if 'background' not in document:
        raise ConfigError('[background] table is missing')
    numerics = _numerics(document.get('numerics', {}))
    perturbations = document.get('perturbation', [])
    if not isinstance(perturbations, list):
        raise ConfigError('perturbation must be an array of tables ([[perturbation]])')
    return RunConfig(
        _background(document['background']),
        tuple(_perturbation(i, p, numerics.modes) for i, p in enumerate(perturbations)),
        numerics,
        _output(document.get('output', {})))


def load_config(path: str) -> RunConfig:
    """Reads and validates the TOML run configuration at path."""
    try:
        with open(path, 'r') as config_file:
            document = toml.load(config_file)
    except toml.TomlDecodeError as e:
        raise ConfigError('Failed to parse {}: {}'.format(path, e), getattr(e, 'lineno', None))
    except OSError as e:
        raise ConfigError('Failed to read {}: {}'.format(path, e))
    config = parse_config(document)
    logging.info('Loaded run configuration from %s', path)
    return config
