"""Closed-form radial families for backgrounds and perturbations."""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from plane_navier_stokes.errors import ProfileError
from plane_navier_stokes.radial_grid import DEFAULT_ALPHA, RadialGrid, RadialProfile, TailModel, tail_exponent
from plane_navier_stokes.spectral import FourierVector


def _terms(r, terms: Iterable[Tuple[complex, float]]) -> np.ndarray:
    """sum of coefficient * r**power, skipping vanishing coefficients."""
    r = np.asarray(r, dtype=float)
    out = np.zeros(r.shape, dtype=complex)
    for coefficient, power in terms:
        if coefficient != 0:
            out = out + coefficient * np.power(r, power)
    return out


class RadialFamily(object):
    """A radial function known with its first two derivatives in closed form."""

    def value(self, r) -> np.ndarray:
        raise NotImplementedError

    def first(self, r) -> np.ndarray:
        raise NotImplementedError

    def second(self, r) -> np.ndarray:
        raise NotImplementedError

    def decay(self, alpha: float) -> float:
        return tail_exponent('vorticity', alpha)

    def tail(self, grid: RadialGrid, alpha: float) -> TailModel:
        """Power law through the value at R_max."""
        beta = self.decay(alpha)
        return TailModel(complex(self.value(grid.r_max)) * grid.r_max ** beta, beta)

    def profile(self, grid: RadialGrid, alpha: float = DEFAULT_ALPHA) -> RadialProfile:
        return RadialProfile.from_function(grid, self.value, (self.first, self.second), self.tail(grid, alpha))


@dataclass(frozen=True)
class PolynomialBump(RadialFamily):
    """c (1 - (r/R)^2)^p on [0, R], zero beyond."""

    amplitude: float
    power: float
    radius: float

    def __post_init__(self):
        if self.power < 1:
            raise ProfileError('Bump power must be at least 1, got {}'.format(self.power))

    def _inside(self, r):
        r = np.asarray(r, dtype=float)
        inside = r < self.radius
        return r, inside, 1.0 - (r[inside] / self.radius) ** 2

    def value(self, r):
        r, inside, u = self._inside(r)
        out = np.zeros(r.shape, dtype=complex)
        out[inside] = self.amplitude * u ** self.power
        return out

    def first(self, r):
        r, inside, u = self._inside(r)
        c, p, R = self.amplitude, self.power, self.radius
        out = np.zeros(r.shape, dtype=complex)
        out[inside] = -2.0 * c * p * r[inside] * u ** (p - 1) / R ** 2
        return out

    def second(self, r):
        r, inside, u = self._inside(r)
        c, p, R = self.amplitude, self.power, self.radius
        out = np.zeros(r.shape, dtype=complex)
        curvature = u ** (p - 1)
        if p != 1:
            curvature = curvature - 2.0 * (p - 1) * u ** (p - 2) * r[inside] ** 2 / R ** 2
        out[inside] = -2.0 * c * p * curvature / R ** 2
        return out

    @property
    def mass(self) -> float:
        """integral_0^R s phi(s) ds."""
        return self.amplitude * self.radius ** 2 / (2.0 * (self.power + 1.0))


@dataclass(frozen=True)
class PiecewisePolynomial(RadialFamily):
    """sum_k c_k r^k on [0, R], zero beyond; must vanish at R."""

    coefficients: Tuple[float, ...]
    radius: float

    def __post_init__(self):
        object.__setattr__(self, 'coefficients', tuple(float(c) for c in self.coefficients))
        scale = sum(abs(c) * self.radius ** k for k, c in enumerate(self.coefficients))
        edge = sum(c * self.radius ** k for k, c in enumerate(self.coefficients))
        if abs(edge) > 1e-12 * max(scale, 1.0):
            raise ProfileError('Polynomial does not vanish at R={} (value {})'.format(self.radius, edge))

    def _masked(self, r, terms):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex)
        inside = r < self.radius
        out[inside] = _terms(r[inside], terms)
        return out

    def value(self, r):
        return self._masked(r, [(c, k) for k, c in enumerate(self.coefficients)])

    def first(self, r):
        return self._masked(r, [(k * c, k - 1) for k, c in enumerate(self.coefficients) if k >= 1])

    def second(self, r):
        return self._masked(r, [(k * (k - 1) * c, k - 2) for k, c in enumerate(self.coefficients) if k >= 2])

    @property
    def mass(self) -> float:
        return sum(c * self.radius ** (k + 2) / (k + 2) for k, c in enumerate(self.coefficients))


@dataclass(frozen=True)
class PowerLaw(RadialFamily):
    """a r^m (1 + r)^(-q)."""

    amplitude: complex
    m: int
    q: float

    def value(self, r):
        r = np.asarray(r, dtype=float)
        return self.amplitude * _terms(r, [(1.0, self.m)]) * (1.0 + r) ** (-self.q)

    def first(self, r):
        r = np.asarray(r, dtype=float)
        m, q = self.m, self.q
        return self.amplitude * (_terms(r, [(m, m - 1)]) * (1.0 + r) ** (-q)
                                 - q * _terms(r, [(1.0, m)]) * (1.0 + r) ** (-q - 1))

    def second(self, r):
        r = np.asarray(r, dtype=float)
        m, q = self.m, self.q
        return self.amplitude * (_terms(r, [(m * (m - 1), m - 2)]) * (1.0 + r) ** (-q)
                                 - 2.0 * m * q * _terms(r, [(1.0, m - 1)]) * (1.0 + r) ** (-q - 1)
                                 + q * (q + 1) * _terms(r, [(1.0, m)]) * (1.0 + r) ** (-q - 2))

    def decay(self, alpha):
        # r^m (1+r)^(-q) ~ r^(m-q) far out
        return self.q - self.m


@dataclass(frozen=True)
class GaussianBump(RadialFamily):
    """a r^m exp(-(r/b)^2)."""

    amplitude: complex
    m: int
    width: float

    def _envelope(self, r):
        return np.exp(-(np.asarray(r, dtype=float) / self.width) ** 2)

    def value(self, r):
        return self.amplitude * _terms(r, [(1.0, self.m)]) * self._envelope(r)

    def first(self, r):
        m, b = self.m, self.width
        return self.amplitude * _terms(r, [(m, m - 1), (-2.0 / b ** 2, m + 1)]) * self._envelope(r)

    def second(self, r):
        m, b = self.m, self.width
        return self.amplitude * _terms(r, [(m * (m - 1), m - 2), (-2.0 * (2 * m + 1) / b ** 2, m),
                                           (4.0 / b ** 4, m + 2)]) * self._envelope(r)


def power_law(n: int, amplitude: complex, alpha: float) -> PowerLaw:
    """r^|n| (1+r)^(-(alpha+2+|n|)), decaying like r^(-(alpha+2))."""
    m = abs(n)
    return PowerLaw(amplitude, m, alpha + 2.0 + m)


def gaussian_bump(n: int, amplitude: complex, width: float) -> GaussianBump:
    return GaussianBump(amplitude, abs(n), width)


def mode_vector(grid: RadialGrid, N: int, components: Sequence[Tuple[int, RadialFamily]],
                alpha: float = DEFAULT_ALPHA) -> FourierVector:
    """
    The Fourier vector with f_n the sum of the families listed for n (n >= 0);
    f_{-n} follows by conjugation.
    """

    grouped: Dict[int, List[RadialProfile]] = {}
    for n, family in components:
        if n < 0 or n > N:
            raise ProfileError('Mode {} is outside [0, {}]'.format(n, N))
        grouped.setdefault(n, []).append(family.profile(grid, alpha))
    modes = []
    for n in range(N + 1):
        profiles = grouped.get(n)
        if not profiles:
            modes.append(RadialProfile.zeros(grid))
            continue
        total = profiles[0]
        for profile in profiles[1:]:
            total = total + profile
        modes.append(total)
    return FourierVector(tuple(modes))
