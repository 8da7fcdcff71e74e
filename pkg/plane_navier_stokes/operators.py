"""
Radial Green-type integral operators, mode-wise Laplacians and the map from
vorticity modes to streamfunction modes.

For a complex index z with Re z > 0,

    I^T_z[f](r) = r^z / (2z) * integral_r^T s^(1-z) f(s) ds
    J^t_z[f](r) = r^(-z) / (2z) * integral_t^r s^(1+z) f(s) ds

so that -(I^inf_z + J^0_z)[f] inverts d^2/dr^2 + (1/r) d/dr - z^2/r^2 on f.
"""

from dataclasses import dataclass
from functools import cached_property
import logging
from typing import Union

import numpy as np

from plane_navier_stokes.errors import OperatorError, ProfileError
from plane_navier_stokes.radial_grid import RadialGrid, RadialProfile, integrate, segment_integrals
from plane_navier_stokes.spectral import FourierVector


@dataclass(frozen=True)
class ComplexIndex:
    """Operator index z with Re z > 0."""

    z: complex

    def __post_init__(self):
        object.__setattr__(self, 'z', complex(self.z))
        if not self.z.real > 0.0:
            raise OperatorError('Operator index must have positive real part, got {}'.format(self.z))


Index = Union[ComplexIndex, complex, int, float]


def _index(z: Index) -> complex:
    if isinstance(z, ComplexIndex):
        return z.z
    return ComplexIndex(z).z


def radial_power(r, p) -> np.ndarray:
    """r**p on r > 0 through exp(p ln r); r = 0 gives 0 (Re p > 0), 1 (p = 0) or inf."""
    r = np.asarray(r, dtype=float)
    out = np.empty(r.shape, dtype=complex)
    positive = r > 0.0
    out[positive] = np.exp(p * np.log(r[positive]))
    if p == 0:
        out[~positive] = 1.0
    elif np.real(p) > 0.0:
        out[~positive] = 0.0
    else:
        out[~positive] = np.inf
    return out


def node_index(grid: RadialGrid, r: float) -> int:
    index = int(np.searchsorted(grid.nodes, r))
    if index >= grid.size or grid.nodes[index] != r:
        raise OperatorError('Cumulative integrals need a node as limit, got r={}'.format(r))
    return index


def upper_integral(f: RadialProfile, power: complex, upper: float = np.inf) -> np.ndarray:
    """integral_r^upper s**power f(s) ds at every node r <= upper, NaN above upper."""

    grid = f.grid
    top = grid.size - 1 if np.isinf(upper) else node_index(grid, upper)
    closure = 0j
    if np.isinf(upper):
        if f.tail is None:
            raise ProfileError('Integral to infinity needs a tail model')
        closure = f.tail.integral(grid.r_max, np.inf, power)
    out = np.full(grid.size, np.nan, dtype=complex)
    segments = segment_integrals(f, power)[:top]
    out[:top] = np.cumsum(segments[::-1])[::-1] + closure
    out[top] = closure
    return out


def lower_integral(f: RadialProfile, power: complex, lower: float = 0.0) -> np.ndarray:
    """integral_lower^r s**power f(s) ds at every node r >= lower, NaN below lower."""

    grid = f.grid
    bottom = node_index(grid, lower)
    out = np.full(grid.size, np.nan, dtype=complex)
    out[bottom] = 0.0
    out[bottom + 1:] = np.cumsum(segment_integrals(f, power)[bottom:])
    return out


def extrapolate_origin(nodes: np.ndarray, values: np.ndarray) -> complex:
    """Quadratic extrapolation to r = 0 from the first three positive nodes."""
    r1, r2, r3 = nodes[1:4]
    f1, f2, f3 = values[1:4]
    return (f1 * r2 * r3 / ((r1 - r2) * (r1 - r3))
            + f2 * r1 * r3 / ((r2 - r1) * (r2 - r3))
            + f3 * r1 * r2 / ((r3 - r1) * (r3 - r2)))


@dataclass(frozen=True, eq=False)
class GreenTerms:
    """
    I^upper_z[f] and J^lower_z[f] at the nodes together with the scaled pieces
    z I / r, z(z-1) I / r^2, z(z-1)(z-2) I / r^3 (and their J counterparts) that
    make up radial derivatives.

    Third-derivative pieces are NaN at r = 0.
    """

    f: RadialProfile
    z: complex
    upper: float = np.inf
    lower: float = 0.0

    @cached_property
    def C(self) -> np.ndarray:
        return upper_integral(self.f, 1.0 - self.z, self.upper)

    @cached_property
    def A(self) -> np.ndarray:
        return lower_integral(self.f, 1.0 + self.z, self.lower)

    @property
    def r(self) -> np.ndarray:
        return self.f.grid.nodes

    def _upper_piece(self, shift: int, coefficient: complex, origin: complex) -> np.ndarray:
        # coefficient * r^(z-shift) * C / 2
        r, z = self.r, self.z
        out = np.full(len(r), np.nan, dtype=complex)
        inside = ~np.isnan(self.C)
        positive = inside & (r > 0.0)
        out[positive] = coefficient * np.exp((z - shift) * np.log(r[positive])) * self.C[positive] / 2.0
        if inside[0]:
            out[0] = origin
        return out

    def _lower_piece(self, shift: int, coefficient: complex) -> np.ndarray:
        # coefficient * r^(-z-shift) * A / 2
        r, z = self.r, self.z
        out = np.full(len(r), np.nan, dtype=complex)
        inside = ~np.isnan(self.A)
        positive = inside & (r > 0.0)
        out[positive] = coefficient * np.exp((-z - shift) * np.log(r[positive])) * self.A[positive] / 2.0
        if inside[0]:
            out[0] = 0.0
        return out

    @cached_property
    def I(self) -> np.ndarray:
        return self._upper_piece(0, 1.0 / self.z, 0.0)

    @cached_property
    def J(self) -> np.ndarray:
        return self._lower_piece(0, 1.0 / self.z)

    @cached_property
    def dI(self) -> np.ndarray:
        """(z/r) I."""
        return self._upper_piece(1, 1.0, self.C[0] / 2.0 if self.z == 1 else 0.0)

    @cached_property
    def dJ(self) -> np.ndarray:
        """(z/r) J."""
        return self._lower_piece(1, 1.0)

    @cached_property
    def d2I(self) -> np.ndarray:
        """z(z-1) I / r^2."""
        return self._upper_piece(2, self.z - 1.0, self.C[0] / 2.0 if self.z == 2 else 0.0)

    @cached_property
    def d2J(self) -> np.ndarray:
        """z(z+1) J / r^2."""
        return self._lower_piece(2, self.z + 1.0)

    @cached_property
    def d3I(self) -> np.ndarray:
        """z(z-1)(z-2) I / r^3."""
        out = self._upper_piece(3, (self.z - 1.0) * (self.z - 2.0), np.nan)
        out[0] = np.nan
        return out

    @cached_property
    def d3J(self) -> np.ndarray:
        """z(z+1)(z+2) J / r^3."""
        out = self._lower_piece(3, (self.z + 1.0) * (self.z + 2.0))
        out[0] = np.nan
        return out


def green_terms(f: RadialProfile, z: Index, upper: float = np.inf, lower: float = 0.0) -> GreenTerms:
    return GreenTerms(f, _index(z), upper, lower)


def op_I(T: float, z: Index, f: RadialProfile, r: float) -> complex:
    """(r^z / 2z) * integral_r^T s^(1-z) f(s) ds."""
    z = _index(z)
    if r < 0.0 or r > T:
        raise OperatorError('op_I needs 0 <= r <= T, got r={}, T={}'.format(r, T))
    if r == 0.0:
        return 0j
    return complex(np.exp(z * np.log(r)) / (2.0 * z) * integrate(f, r, T, power=1.0 - z))


def op_J(t: float, z: Index, f: RadialProfile, r: float) -> complex:
    """(1 / (2z r^z)) * integral_t^r s^(1+z) f(s) ds."""
    z = _index(z)
    if t < 0.0 or t > r:
        raise OperatorError('op_J needs 0 <= t <= r, got t={}, r={}'.format(t, r))
    if r == 0.0:
        return 0j
    return complex(np.exp(-z * np.log(r)) / (2.0 * z) * integrate(f, t, r, power=1.0 + z))


def laplacian_mode(f: RadialProfile, z: Union[Index, int]) -> RadialProfile:
    """f'' + f'/r - z^2 f/r^2 at the nodes; r = 0 by extrapolation."""

    if isinstance(z, ComplexIndex):
        z = z.z
    if f.order < 2:
        raise ProfileError('The mode Laplacian needs first and second derivatives')
    r = f.grid.nodes
    out = np.empty(f.grid.size, dtype=complex)
    positive = slice(1, None)
    out[positive] = (f.derivatives[1][positive] + f.derivatives[0][positive] / r[positive]
                     - z * z * f.values[positive] / r[positive] ** 2)
    out[0] = extrapolate_origin(r, out)
    return RadialProfile(f.grid, out)


def _first_derivative(f: RadialProfile) -> np.ndarray:
    if f.order >= 1:
        return f.derivatives[0]
    return np.gradient(f.values, f.grid.nodes, edge_order=2)


def _over_r(values: np.ndarray, derivative: np.ndarray, r: np.ndarray) -> np.ndarray:
    """values / r with the limit derivative(0) at r = 0 (values(0) = 0)."""
    out = np.empty(len(r), dtype=complex)
    out[1:] = values[1:] / r[1:]
    out[0] = derivative[0]
    return out


def _stream_mode(n: int, w: RadialProfile) -> RadialProfile:
    grid = w.grid
    r = grid.nodes
    dw = _first_derivative(w)
    if n == 0:
        M = lower_integral(w, 1.0)
        L = np.empty(grid.size, dtype=complex)
        L[0] = 0.0
        L[1:] = np.cumsum(segment_integrals(w, 1.0, weight=np.log))
        values = np.zeros(grid.size, dtype=complex)
        d1 = np.zeros(grid.size, dtype=complex)
        d2 = np.empty(grid.size, dtype=complex)
        d3 = np.empty(grid.size, dtype=complex)
        p = slice(1, None)
        values[p] = L[p] - np.log(r[p]) * M[p]
        d1[p] = -M[p] / r[p]
        d2[p] = M[p] / r[p] ** 2 - w.values[p]
        d3[p] = -2.0 * M[p] / r[p] ** 3 + w.values[p] / r[p] - dw[p]
        d2[0] = -w.values[0] / 2.0
        d3[0] = -2.0 * dw[0] / 3.0
        return RadialProfile(grid, values, (d1, d2, d3))

    terms = green_terms(w, n)
    values = terms.I + terms.J
    d1 = terms.dI - terms.dJ
    d2 = terms.d2I + terms.d2J - w.values
    d3 = terms.d3I - terms.d3J + _over_r(w.values, dw, r) - dw
    d3[0] = extrapolate_origin(r, d3)
    return RadialProfile(grid, values, (d1, d2, d3))


def map_L(w_hat: FourierVector) -> FourierVector:
    """
    Streamfunction modes gamma_n solving gamma_n'' + gamma_n'/r - n^2 gamma_n/r^2 = -w_n,
    returned with their first three radial derivatives.

    gamma_n = (I^inf_|n| + J^0_|n|)[w_n] for n != 0, and the zero mode is the
    double integral -integral_0^r (1/s) integral_0^s t w_0(t) dt ds, tracked through
    its derivatives.
    """

    gamma = w_hat.map(_stream_mode, derivative_only=True)
    logging.debug('Mapped %d vorticity modes to streamfunction modes', w_hat.N + 1)
    return gamma
