"""Angular Fourier analysis and synthesis of real fields on the plane."""

from dataclasses import dataclass
import logging
from typing import Callable, Sequence, Tuple, Union

import numpy as np

from plane_navier_stokes.errors import GridError, SymmetryError
from plane_navier_stokes.parallel import map_modes
from plane_navier_stokes.radial_grid import RadialGrid, RadialProfile, fit_tail


DEFAULT_MODES = 16

# Relative size (against the largest mode) of an admissible symmetry defect.
SYMMETRY_TOL = 1e-10


def _real_part(profile: RadialProfile) -> RadialProfile:
    function = None
    if profile.function is not None:
        source = profile.function
        function = lambda s: np.real(source(s)).astype(complex)
    junction = profile.junction
    if junction is not None:
        junction = junction.combine(junction.conj(), 0.5, 0.5)
    real = RadialProfile(
        profile.grid, profile.values.real, tuple(d.real for d in profile.derivatives),
        None, function, junction)
    if profile.tail is not None:
        real = real.with_tail(fit_tail(real, profile.tail.exponent))
    return real


@dataclass(frozen=True, eq=False)
class FourierVector:
    """
    The angular modes f_n, -N <= n <= N, of a real field.

    Only n >= 0 is stored; f_{-n} is the conjugate of f_n. With derivative_only set the
    zero mode is tracked through its radial derivatives alone.
    """

    modes: Tuple[RadialProfile, ...]
    derivative_only: bool = False

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise SymmetryError('A Fourier vector needs at least the zero mode')
        grid = modes[0].grid
        if any(m.grid is not grid for m in modes):
            raise SymmetryError('All modes must share one radial grid')
        scale = max(float(np.max(np.abs(m.values))) for m in modes)
        zero = modes[0]
        if np.any(zero.values.imag != 0.0) or any(np.any(d.imag != 0.0) for d in zero.derivatives):
            defect = float(np.max(np.abs(zero.values.imag)))
            if defect > SYMMETRY_TOL * scale:
                raise SymmetryError('Zero mode is not real (imaginary part {:.3e})'.format(defect))
            zero = _real_part(zero)
        for n in range(1, len(modes)):
            origin = abs(modes[n].values[0])
            if origin > SYMMETRY_TOL * scale:
                raise SymmetryError('Mode {} does not vanish at r=0 (|f(0)|={:.3e})'.format(n, origin))
        object.__setattr__(self, 'modes', (zero,) + modes[1:])

    @classmethod
    def zeros(cls, grid: RadialGrid, modes: int, orders: int = 2,
              derivative_only: bool = False) -> 'FourierVector':
        zero = RadialProfile.zeros(grid, orders)
        return cls(tuple(zero for _ in range(modes + 1)), derivative_only)

    @property
    def N(self) -> int:
        return len(self.modes) - 1

    @property
    def grid(self) -> RadialGrid:
        return self.modes[0].grid

    @property
    def indices(self) -> range:
        return range(-self.N, self.N + 1)

    def __getitem__(self, n: int) -> RadialProfile:
        if abs(n) > self.N:
            raise IndexError('Mode {} is outside the band [-{}, {}]'.format(n, self.N, self.N))
        if n >= 0:
            return self.modes[n]
        return self.modes[-n].conj()

    def stack(self, order: int = 0) -> np.ndarray:
        """Derivative data of every mode n = -N..N as rows of a (2N+1, K) array."""
        positive = np.array([m.derivative(order) for m in self.modes])
        return np.concatenate([np.conj(positive[:0:-1]), positive])

    def map(self, function: Callable[[int, RadialProfile], RadialProfile],
            derivative_only: bool = None) -> 'FourierVector':
        """Applies function(n, f_n) to every stored mode n >= 0."""
        if derivative_only is None:
            derivative_only = self.derivative_only
        modes = map_modes(lambda n: function(n, self.modes[n]), range(self.N + 1))
        return FourierVector(tuple(modes), derivative_only)

    def combined(self, other: 'FourierVector', a: float = 1.0, b: float = 1.0) -> 'FourierVector':
        """The real linear combination a*self + b*other."""
        if other.N != self.N:
            raise SymmetryError('Cannot combine bands {} and {}'.format(self.N, other.N))
        a, b = float(a), float(b)
        return FourierVector(
            tuple(f.combined(g, a, b) for f, g in zip(self.modes, other.modes)),
            self.derivative_only and other.derivative_only)

    def scaled(self, factor: float) -> 'FourierVector':
        factor = float(factor)
        return FourierVector(tuple(m.scaled(factor) for m in self.modes), self.derivative_only)

    def __add__(self, other):
        return self.combined(other)

    def __sub__(self, other):
        return self.combined(other, 1.0, -1.0)

    def __mul__(self, factor):
        return self.scaled(factor)

    __rmul__ = __mul__

    def __neg__(self):
        return self.scaled(-1.0)


def angular_grid(count: int) -> np.ndarray:
    """count equispaced angles on [0, 2 pi)."""
    return 2.0 * np.pi * np.arange(count) / count


def decompose_angular(field: Union[Callable, np.ndarray], N: int, grid: RadialGrid,
                      theta_count: int = None) -> FourierVector:
    """
    Angular modes of field, either a vectorized callable f(r, theta) or samples of
    shape (K, M) on the grid nodes times angular_grid(M).

    The angular integral is the trapezoidal rule, i.e. a discrete Fourier transform.
    """

    if callable(field):
        count = 4 * N + 1 if theta_count is None else theta_count
        theta = angular_grid(count)
        samples = np.broadcast_to(
            np.asarray(field(grid.nodes[:, None], theta[None, :]), dtype=float), (grid.size, count))
    else:
        samples = np.asarray(field, dtype=float)
        if samples.ndim != 2 or samples.shape[0] != grid.size:
            raise GridError('Field samples must have shape (nodes, angles), got {}'.format(samples.shape))
        count = samples.shape[1]
    if count < 4 * N + 1:
        raise GridError('{} angles cannot resolve {} modes; at least {} are needed'.format(count, N, 4 * N + 1))

    coefficients = np.fft.rfft(samples, axis=1) / count
    logging.debug('Decomposed field into %d modes from %d angles', N + 1, count)
    return FourierVector(tuple(RadialProfile(grid, coefficients[:, n]) for n in range(N + 1)))


def synthesize_rows(rows: np.ndarray, theta: Sequence[float]) -> np.ndarray:
    """f_0 + 2 Re sum_{n>0} f_n e^(i n theta) on nodes x theta from rows n = 0..N."""

    rows = np.asarray(rows)
    theta = np.asarray(theta, dtype=float)
    field = np.repeat(rows[0].real[:, None], len(theta), axis=1)
    if rows.shape[0] > 1:
        phase = np.exp(1j * np.outer(np.arange(1, rows.shape[0]), theta))
        field = field + 2.0 * np.real(rows[1:].T @ phase)
    return field


def synthesize_angular(fv: FourierVector, theta: Sequence[float], order: int = 0) -> np.ndarray:
    """Real field (or its order-th radial derivative) on nodes x theta."""
    return synthesize_rows(np.array([m.derivative(order) for m in fv.modes]), theta)


def parseval_gap(fv: FourierVector, samples: np.ndarray) -> float:
    """Largest relative gap between sum |f_n|^2 and the angular mean of f^2 over the nodes."""

    data = np.abs(np.array([m.values for m in fv.modes])) ** 2
    modal = data[0] + 2.0 * np.sum(data[1:], axis=0)
    angular = np.mean(np.asarray(samples, dtype=float) ** 2, axis=1)
    scale = float(np.max(angular))
    if scale == 0.0:
        return float(np.max(modal))
    return float(np.max(np.abs(modal - angular)) / scale)


def spectral_tail(fv: FourierVector) -> float:
    """sup_r |f_N| of the highest retained mode."""
    return float(np.max(np.abs(fv.modes[-1].values)))
