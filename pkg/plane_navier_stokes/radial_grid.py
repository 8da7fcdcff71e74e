"""Graded radial grids, radial profiles, quadrature and on-grid differentiation."""

from dataclasses import dataclass, field, replace
from functools import cached_property
import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from plane_navier_stokes.errors import GridError, OperatorError, ProfileError


# Smallest admissible node count.
MIN_NODES = 64

# Nodes required in [0, min(1, R*)] and in [R*, 2R*].
MIN_CLUSTER_NODES = 8

DEFAULT_QUADRATURE_ORDER = 6

# Share of the outermost nodes used to fit a tail model.
TAIL_FIT_FRACTION = 0.1

# Relative mismatch allowed between the last sample and the tail model there.
TAIL_FIT_TOL = 0.25

# Decay rate alpha assumed when a caller does not supply one.
DEFAULT_ALPHA = 0.25

# Tail exponent offsets over alpha, by the role a profile plays.
TAIL_ROLES = {
    'vorticity': 2.0,
    'source': 2.0,
    'bilinear': 1.0,
}


def tail_exponent(role: str, alpha: float = DEFAULT_ALPHA) -> float:
    """Decay exponent beta of the power-law tail of a profile playing role."""
    return alpha + TAIL_ROLES[role]


@dataclass(frozen=True)
class Grading:
    """How nodes cluster: 'quadratic' near 0 and R*, or 'uniform'."""

    kind: str = 'quadratic'
    inner_fraction: float = 0.25


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Strictly increasing nodes on [0, R_max] with R* as an exact node."""

    nodes: np.ndarray
    r_star_index: int
    grading: Grading
    quadrature_order: int = DEFAULT_QUADRATURE_ORDER

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def r_star(self) -> float:
        return float(self.nodes[self.r_star_index])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    @cached_property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    @cached_property
    def quadrature_points(self) -> np.ndarray:
        """Gauss-Legendre abscissae of every segment, shape (K-1, q)."""
        x, _ = _unit_gauss(self.quadrature_order)
        return self.nodes[:-1, None] + self.spacing[:, None] * x[None, :]

    @cached_property
    def quadrature_weights(self) -> np.ndarray:
        _, w = _unit_gauss(self.quadrature_order)
        return self.spacing[:, None] * w[None, :]

    @cached_property
    def inner(self) -> np.ndarray:
        """Mask of nodes in [0, R*]."""
        return np.arange(self.size) <= self.r_star_index

    @cached_property
    def outer(self) -> np.ndarray:
        """Mask of nodes in [R*, R_max]."""
        return np.arange(self.size) >= self.r_star_index


@dataclass(frozen=True)
class TailModel:
    """Power-law continuation coefficient * r**(-exponent) beyond R_max."""

    coefficient: complex
    exponent: float

    def __post_init__(self):
        if not self.exponent > 1.0:
            raise ProfileError('Tail exponent must exceed 1, got {}'.format(self.exponent))

    def __call__(self, r):
        return self.coefficient * np.asarray(r, dtype=float) ** (-self.exponent)

    def integral(self, lower: float, upper: float = np.inf, power: complex = 0.0) -> complex:
        """Closed form of the integral of s**power * tail(s) over [lower, upper]."""
        q = power + 1.0 - self.exponent
        if np.isinf(upper):
            if not np.real(q) < 0.0:
                raise OperatorError(
                    'Divergent tail: exponent {} against weight s^{}'.format(self.exponent, power))
            return complex(-self.coefficient * _power(lower, q) / q)
        if q == 0:
            return complex(self.coefficient * np.log(upper / lower))
        return complex(self.coefficient * (_power(upper, q) - _power(lower, q)) / q)

    def conj(self) -> 'TailModel':
        return TailModel(np.conj(self.coefficient), self.exponent)

    def scaled(self, factor: complex) -> 'TailModel':
        return TailModel(factor * self.coefficient, self.exponent)


@dataclass(frozen=True)
class Junction:
    """One-sided values and derivatives of a profile at R*."""

    left_value: complex
    left_derivative: complex
    right_value: complex
    right_derivative: complex
    left_second: Optional[complex] = None
    right_second: Optional[complex] = None

    def conj(self) -> 'Junction':
        return Junction(*[None if v is None else np.conj(v) for v in (
            self.left_value, self.left_derivative, self.right_value,
            self.right_derivative, self.left_second, self.right_second)])

    def combine(self, other: 'Junction', a: complex = 1.0, b: complex = 1.0) -> 'Junction':
        def mix(x, y):
            if x is None or y is None:
                return None
            return a * x + b * y
        return Junction(
            mix(self.left_value, other.left_value),
            mix(self.left_derivative, other.left_derivative),
            mix(self.right_value, other.right_value),
            mix(self.right_derivative, other.right_derivative),
            mix(self.left_second, other.left_second),
            mix(self.right_second, other.right_second))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """
    A complex function of r >= 0 sampled on a RadialGrid.

    derivatives[k] holds the (k+1)-th radial derivative at the nodes. A profile known
    in closed form keeps the callable in `function`, which quadrature then uses
    instead of the interpolant.
    """

    grid: RadialGrid
    values: np.ndarray
    derivatives: Tuple[np.ndarray, ...] = ()
    tail: Optional[TailModel] = None
    function: Optional[Callable] = field(default=None, repr=False)
    junction: Optional[Junction] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        object.__setattr__(self, 'values', values)
        if values.shape != (self.grid.size,):
            raise ProfileError('Profile has {} values for {} nodes'.format(values.shape, self.grid.size))
        derivatives = tuple(np.asarray(d, dtype=complex) for d in self.derivatives)
        for d in derivatives:
            if d.shape != values.shape:
                raise ProfileError('Derivative data is not aligned with the nodes')
        object.__setattr__(self, 'derivatives', derivatives)
        if self.tail is not None:
            last = values[-1]
            mismatch = abs(last - self.tail(self.grid.r_max))
            if mismatch > TAIL_FIT_TOL * abs(last) + 1e-300:
                raise ProfileError('Tail model does not continue the last sample ({} vs {})'.format(
                    self.tail(self.grid.r_max), last))

    @classmethod
    def from_function(cls, grid: RadialGrid, function: Callable,
                      derivatives: Sequence[Callable] = (),
                      tail: Optional[TailModel] = None) -> 'RadialProfile':
        """Samples a closed-form function and its derivatives on the grid."""
        r = grid.nodes
        return cls(grid, function(r), tuple(d(r) for d in derivatives), tail, function)

    @classmethod
    def zeros(cls, grid: RadialGrid, orders: int = 2) -> 'RadialProfile':
        z = np.zeros(grid.size, dtype=complex)
        return cls(grid, z, tuple(z.copy() for _ in range(orders)), TailModel(0.0, 2.0),
                   lambda s: np.zeros(np.shape(s), dtype=complex))

    @property
    def order(self) -> int:
        """Highest derivative order carried."""
        return len(self.derivatives)

    def derivative(self, order: int) -> np.ndarray:
        if order == 0:
            return self.values
        if order > len(self.derivatives):
            raise ProfileError('Profile carries no derivative of order {}'.format(order))
        return self.derivatives[order - 1]

    def with_tail(self, tail: Optional[TailModel]) -> 'RadialProfile':
        return replace(self, tail=tail)

    def with_fitted_tail(self, exponent: float) -> 'RadialProfile':
        return replace(self, tail=fit_tail(self, exponent))

    def truncated(self, orders: int) -> 'RadialProfile':
        return replace(self, derivatives=self.derivatives[:orders])

    def conj(self) -> 'RadialProfile':
        function = None
        if self.function is not None:
            source = self.function
            function = lambda s: np.conj(source(s))
        return RadialProfile(
            self.grid, np.conj(self.values), tuple(np.conj(d) for d in self.derivatives),
            None if self.tail is None else self.tail.conj(), function,
            None if self.junction is None else self.junction.conj())

    def scaled(self, factor: complex) -> 'RadialProfile':
        function = None
        if self.function is not None:
            source = self.function
            function = lambda s: factor * source(s)
        return RadialProfile(
            self.grid, factor * self.values, tuple(factor * d for d in self.derivatives),
            None if self.tail is None else self.tail.scaled(factor), function,
            None if self.junction is None else self.junction.combine(self.junction, factor, 0.0))

    def combined(self, other: 'RadialProfile', a: complex = 1.0, b: complex = 1.0) -> 'RadialProfile':
        """The linear combination a*self + b*other."""
        if other.grid is not self.grid:
            raise ProfileError('Cannot combine profiles on different grids')
        orders = min(self.order, other.order)
        function = None
        if self.function is not None and other.function is not None:
            f, g = self.function, other.function
            function = lambda s: a * f(s) + b * g(s)
        junction = None
        if self.junction is not None and other.junction is not None:
            junction = self.junction.combine(other.junction, a, b)
        combination = RadialProfile(
            self.grid, a * self.values + b * other.values,
            tuple(a * self.derivatives[k] + b * other.derivatives[k] for k in range(orders)),
            None, function, junction)
        if self.tail is not None and other.tail is not None:
            exponent = min(self.tail.exponent, other.tail.exponent)
            combination = combination.with_fitted_tail(exponent)
        return combination

    def __add__(self, other: 'RadialProfile') -> 'RadialProfile':
        return self.combined(other)

    def __sub__(self, other: 'RadialProfile') -> 'RadialProfile':
        return self.combined(other, 1.0, -1.0)

    def __mul__(self, factor: complex) -> 'RadialProfile':
        return self.scaled(factor)

    __rmul__ = __mul__

    def __neg__(self) -> 'RadialProfile':
        return self.scaled(-1.0)

    def evaluate(self, s) -> np.ndarray:
        """Values at arbitrary radii, continued by the tail model beyond R_max."""
        s = np.asarray(s, dtype=float)
        out = np.empty(s.shape, dtype=complex)
        beyond = s > self.grid.r_max
        within = ~beyond
        if np.any(beyond):
            if self.function is not None:
                out[beyond] = self.function(s[beyond])
            elif self.tail is not None:
                out[beyond] = self.tail(s[beyond])
            else:
                raise ProfileError('Profile has no tail model beyond R_max={}'.format(self.grid.r_max))
        if np.any(within):
            out[within] = self._interpolate(s[within])
        return out

    def _interpolate(self, s: np.ndarray) -> np.ndarray:
        if self.function is not None:
            return np.asarray(self.function(s), dtype=complex)
        if self.order == 0:
            return self._spline(s)
        nodes = self.grid.nodes
        index = np.clip(np.searchsorted(nodes, s, side='right') - 1, 0, self.grid.size - 2)
        h = self.grid.spacing[index]
        t = (s - nodes[index]) / h
        return self._hermite(index, h, t)

    def _hermite(self, index: np.ndarray, h: np.ndarray, t: np.ndarray) -> np.ndarray:
        f = self.values
        d1 = self.derivatives[0]
        if self.order >= 2:
            d2 = self.derivatives[1]
            b = _quintic_basis(t)
            return (b[0] * f[index] + h * b[1] * d1[index] + h * h * b[2] * d2[index]
                    + b[3] * f[index + 1] + h * b[4] * d1[index + 1] + h * h * b[5] * d2[index + 1])
        b = _cubic_basis(t)
        return b[0] * f[index] + h * b[1] * d1[index] + b[2] * f[index + 1] + h * b[3] * d1[index + 1]

    @cached_property
    def _spline(self) -> CubicSpline:
        return CubicSpline(self.grid.nodes, self.values)

    @cached_property
    def quadrature_samples(self) -> np.ndarray:
        """The profile at every Gauss-Legendre abscissa of the grid, shape (K-1, q)."""
        grid = self.grid
        points = grid.quadrature_points
        if self.function is not None:
            return np.asarray(self.function(points), dtype=complex)
        if self.order == 0:
            return self._spline(points)
        x, _ = _unit_gauss(grid.quadrature_order)
        index = np.repeat(np.arange(grid.size - 1)[:, None], len(x), axis=1)
        h = np.repeat(grid.spacing[:, None], len(x), axis=1)
        t = np.broadcast_to(x[None, :], index.shape)
        return self._hermite(index, h, t)


def _power(r, p):
    """r**p for r > 0 through exp(p ln r) (principal branch)."""
    return np.exp(p * np.log(r))


def _unit_gauss(order: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return (x + 1.0) / 2.0, w / 2.0


def _cubic_basis(t):
    t2 = t * t
    t3 = t2 * t
    return (2 * t3 - 3 * t2 + 1, t3 - 2 * t2 + t, -2 * t3 + 3 * t2, t3 - t2)


def _quintic_basis(t):
    t2 = t * t
    t3 = t2 * t
    t4 = t3 * t
    t5 = t4 * t
    return (1 - 10 * t3 + 15 * t4 - 6 * t5,
            t - 6 * t3 + 8 * t4 - 3 * t5,
            (t2 - 3 * t3 + 3 * t4 - t5) / 2,
            10 * t3 - 15 * t4 + 6 * t5,
            -4 * t3 + 7 * t4 - 3 * t5,
            (t3 - 2 * t4 + t5) / 2)


def build_grid(r_star: float, r_max: float, size: int, grading: Grading = Grading(),
               quadrature_order: int = DEFAULT_QUADRATURE_ORDER) -> RadialGrid:
    """Builds a graded grid on [0, r_max] holding r_star as an exact node."""

    if r_star < 1.0:
        raise GridError('R* must be at least 1, got {}'.format(r_star))
    if r_max <= r_star or r_max < 4.0 * r_star:
        raise GridError('R_max={} must be at least 4 R*={}'.format(r_max, 4.0 * r_star))
    if size < MIN_NODES:
        raise GridError('At least {} nodes are required, got {}'.format(MIN_NODES, size))

    if grading.kind == 'quadratic':
        inner_size = max(2 * MIN_CLUSTER_NODES, int(round(size * grading.inner_fraction)))
        t = np.linspace(0.0, 1.0, inner_size)
        inner = r_star * (1.0 - np.cos(np.pi * t)) / 2.0
        t = np.linspace(0.0, 1.0, size - inner_size + 1)[1:]
        outer = r_star + (r_max - r_star) * t ** 2
        nodes = np.concatenate([inner, outer])
        r_star_index = inner_size - 1
    elif grading.kind == 'uniform':
        nodes = np.linspace(0.0, r_max, size)
        r_star_index = int(np.argmin(np.abs(nodes - r_star)))
    else:
        raise GridError('Unknown grading {!r}'.format(grading.kind))

    nodes[0] = 0.0
    nodes[r_star_index] = r_star
    nodes[-1] = r_max

    if np.any(np.diff(nodes) <= 0.0):
        raise GridError('Grid nodes are not strictly increasing')
    near_origin = np.count_nonzero(nodes <= min(1.0, r_star))
    near_star = np.count_nonzero((nodes >= r_star) & (nodes <= 2.0 * r_star))
    if near_origin < MIN_CLUSTER_NODES or near_star < MIN_CLUSTER_NODES:
        raise GridError('Grid resolves [0, 1] with {} and [R*, 2R*] with {} nodes; increase the node count'.format(
            near_origin, near_star))

    logging.debug('Built %s grid: %d nodes, R*=%s at index %d, R_max=%s',
                  grading.kind, size, r_star, r_star_index, r_max)
    return RadialGrid(nodes, r_star_index, grading, quadrature_order)


def segment_integrals(f: RadialProfile, power: complex = 0.0,
                      weight: Optional[Callable] = None) -> np.ndarray:
    """Integral of s**power * weight(s) * f(s) over every grid segment."""
    grid = f.grid
    factor = grid.quadrature_weights
    if power != 0:
        factor = factor * _power(grid.quadrature_points, power)
    if weight is not None:
        factor = factor * weight(grid.quadrature_points)
    return np.sum(factor * f.quadrature_samples, axis=1)


def integrate(f: RadialProfile, a: float, b: float, power: complex = 0.0) -> complex:
    """
    Integral of s**power * f(s) over [a, b]; b may be +inf.

    The finite part is composite Gauss-Legendre on the grid segments cut at a and b,
    the part beyond R_max is the closed form of the tail model.
    """

    if a < 0.0 or b < a:
        raise OperatorError('Invalid integration range [{}, {}]'.format(a, b))
    if a == b:
        return 0j
    grid = f.grid
    total = 0j
    upper = min(b, grid.r_max)
    if a < upper:
        inside = grid.nodes[(grid.nodes > a) & (grid.nodes < upper)]
        breaks = np.concatenate([[a], inside, [upper]])
        x, w = _unit_gauss(grid.quadrature_order)
        h = np.diff(breaks)
        points = breaks[:-1, None] + h[:, None] * x[None, :]
        weights = h[:, None] * w[None, :]
        if power != 0:
            weights = weights * _power(points, power)
        total += np.sum(weights * f.evaluate(points))
    if b > grid.r_max:
        if f.tail is None:
            raise ProfileError('Integration beyond R_max={} needs a tail model'.format(grid.r_max))
        total += f.tail.integral(max(a, grid.r_max), b, power)
    return complex(total)


def _edge_second(nodes: np.ndarray, values: np.ndarray) -> complex:
    """Second derivative at nodes[0] of the cubic through four consecutive samples."""
    dx = nodes - nodes[0]
    coefficients = np.linalg.solve(np.vander(dx, 4, increasing=True), values)
    return 2.0 * coefficients[2]


def _second_derivative(nodes: np.ndarray, values: np.ndarray, first: np.ndarray) -> np.ndarray:
    second = np.gradient(first, nodes, edge_order=2)
    # one-sided cubic stencils keep the endpoints second order
    second[0] = _edge_second(nodes[:4], values[:4])
    second[-1] = _edge_second(nodes[-1:-5:-1], values[-1:-5:-1])
    return second


def differentiate(f: RadialProfile, order: int) -> RadialProfile:
    """Finite-difference derivative on the (graded) nodes, exact for quadratics."""

    if order not in (1, 2):
        raise ProfileError('Only first and second derivatives are supported, got order {}'.format(order))
    if f.grid.size < 5:
        raise ProfileError('Differentiation needs at least 5 nodes')
    nodes = f.grid.nodes
    first = np.gradient(f.values, nodes, edge_order=2)
    second = _second_derivative(nodes, f.values, first)
    if order == 1:
        return RadialProfile(f.grid, first, (second,))
    return RadialProfile(f.grid, second)


def fit_tail(f: RadialProfile, exponent: float) -> TailModel:
    """Least-squares coefficient of r**(-exponent) over the outermost nodes."""

    nodes = f.grid.nodes
    count = max(3, int(np.ceil(TAIL_FIT_FRACTION * f.grid.size)))
    r = nodes[-count:]
    basis = r ** (-exponent)
    coefficient = np.sum(f.values[-count:] * basis) / np.sum(basis * basis)
    last = f.values[-1]
    if abs(last - coefficient * nodes[-1] ** (-exponent)) > TAIL_FIT_TOL * abs(last):
        logging.debug('Tail fit with exponent %s misses the last sample; anchoring at R_max', exponent)
        coefficient = last * nodes[-1] ** exponent
    return TailModel(complex(coefficient), exponent)
