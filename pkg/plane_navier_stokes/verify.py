"""
Weighted norms, residuals of the vorticity-streamfunction system, decay and
matching diagnostics, and the battery of analytic oracles.

Every sup is taken over the grid nodes only. With the band truncated at N the
norms are lower bounds of the untruncated ones ("band-limited norm").
"""

from dataclasses import dataclass, field
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import integrate as scipy_integrate

from plane_navier_stokes.errors import NormSpecError, ProfileError
from plane_navier_stokes.nonlinear import build_sources, bilinear_D, source_divergence_form
from plane_navier_stokes.operators import green_terms, map_L, op_I, op_J
from plane_navier_stokes.profiles import PolynomialBump, PowerLaw, gaussian_bump, mode_vector
from plane_navier_stokes.radial_grid import (
    DEFAULT_ALPHA, RadialProfile, TailModel, build_grid, differentiate)
from plane_navier_stokes.spectral import FourierVector, angular_grid


DEFAULT_KAPPA = 2.0

# Consistency of the two source representations is measured from this radius on.
CONSISTENCY_RADIUS = 0.1


@dataclass(frozen=True)
class WeightedNormSpec:
    """
    Norm of the family 'U' (all derivative orders 0..m on every mode) or 'V' (the
    zero mode through its derivatives 1..m only, unweighted in n).
    """

    family: str
    alpha: float
    kappa: float
    m: int = 0

    def __post_init__(self):
        if self.family not in ('U', 'V'):
            raise NormSpecError('Unknown norm family {!r}'.format(self.family))
        if not self.alpha > 0.0:
            raise NormSpecError('alpha must be positive, got {}'.format(self.alpha))
        if not self.kappa > 1.0:
            raise NormSpecError('kappa must exceed 1, got {}'.format(self.kappa))
        if self.m not in (0, 1, 2) or not self.m < self.kappa:
            raise NormSpecError('Derivative order m={} must be 0, 1 or 2 and below kappa={}'.format(
                self.m, self.kappa))

    def orders(self, n: int) -> range:
        if self.family == 'V' and n == 0:
            return range(1, self.m + 1)
        return range(self.m + 1)

    def weight(self, r: np.ndarray, n: int, l: int) -> np.ndarray:
        if self.family == 'V' and n == 0:
            return (1.0 + r) ** l
        return (1.0 + r) ** (self.alpha + l) * (1.0 + abs(n)) ** (self.kappa - l)


def _weighted_sup(fv: FourierVector, spec: WeightedNormSpec, data) -> float:
    r = fv.grid.nodes
    total = 0.0
    for l in range(spec.m + 1):
        sup = 0.0
        for n in range(fv.N + 1):
            if l not in spec.orders(n):
                continue
            sup = max(sup, float(np.max(spec.weight(r, n, l) * np.abs(data(n, l)))))
        total += sup
    return total


def _require_orders(fv: FourierVector, m: int):
    if any(mode.order < m for mode in fv.modes):
        raise ProfileError('Norm needs radial derivatives up to order {}'.format(m))


def norm_weighted(f_hat: FourierVector, spec: WeightedNormSpec) -> float:
    """sum_l sup_n sup_r (1+r)^(alpha+l) (1+|n|)^(kappa-l) |d^l f_n / dr^l|."""
    _require_orders(f_hat, spec.m)
    return _weighted_sup(f_hat, spec, lambda n, l: f_hat.modes[n].derivative(l))


def distance_weighted(f_hat: FourierVector, g_hat: FourierVector, spec: WeightedNormSpec) -> float:
    """norm_weighted(f - g) without building the difference vector."""
    if f_hat.N != g_hat.N:
        raise ProfileError('Cannot compare bands {} and {}'.format(f_hat.N, g_hat.N))
    _require_orders(f_hat, spec.m)
    _require_orders(g_hat, spec.m)
    return _weighted_sup(f_hat, spec,
                         lambda n, l: f_hat.modes[n].derivative(l) - g_hat.modes[n].derivative(l))


def _laplacian(values, first, second, r, index):
    """f'' + f'/r - index^2 f/r^2 at r > 0."""
    return second + first / r - index * index * values / r ** 2


def _second_order(profile: RadialProfile) -> RadialProfile:
    if profile.order >= 2:
        return profile
    first = differentiate(profile, 1)
    return RadialProfile(profile.grid, profile.values, (first.values, first.derivatives[0]))


@dataclass
class ResidualReport:
    """Weighted sup of the two residual families per mode n >= 0."""

    stream: Dict[int, float]
    vorticity: Dict[int, float]
    scale: float

    def _relative(self, values) -> float:
        worst = max(values) if values else 0.0
        return worst / self.scale if self.scale > 0.0 else worst

    @property
    def stream_max(self) -> float:
        return self._relative(list(self.stream.values()))

    @property
    def vorticity_max(self) -> float:
        return self._relative(list(self.vorticity.values()))


def residual_system(gamma_hat: FourierVector, w_hat: FourierVector, phi_hat: FourierVector, bg,
                    alpha: float = DEFAULT_ALPHA, kappa: float = DEFAULT_KAPPA) -> ResidualReport:
    """
    Residuals Delta_n gamma_n + w_n and Delta_n w_n - G*_n - Delta_n phi_n over r > 0,
    weighted by (1+r)^(alpha+2) (1+|n|)^(kappa+2). For |n| = 2 beyond R* the second
    family uses the transport-modified Laplacian and the background-free source.
    """

    grid = w_hat.grid
    r = grid.nodes[1:]
    k = grid.r_star_index
    sources = build_sources(gamma_hat, w_hat, bg.psi_star_prime, bg.omega_star_prime, alpha)
    stream = {}
    vorticity = {}
    for n in range(w_hat.N + 1):
        weight = (1.0 + r) ** (alpha + 2.0) * (1.0 + n) ** (kappa + 2.0)
        g = gamma_hat.modes[n]
        w = _second_order(w_hat.modes[n])
        phi = _second_order(phi_hat.modes[n])
        wv, w1, w2 = (w.derivative(j)[1:] for j in range(3))
        first = _laplacian(g.values[1:], g.derivatives[0][1:], g.derivatives[1][1:], r, n) + wv
        stream[n] = float(np.max(weight * np.abs(first)))

        forcing = _laplacian(*(phi.derivative(j)[1:] for j in range(3)), r, n)
        second = _laplacian(wv, w1, w2, r, n) - sources.Gstar.modes[n].values[1:] - forcing
        if n == 2:
            zeta = np.sqrt(complex(n * n, n * bg.mu_star))
            outer = slice(k, None)
            second[outer] = (_laplacian(wv[outer], w1[outer], w2[outer], r[outer], zeta)
                             - sources.G0.modes[n].values[1:][outer] - forcing[outer])
        vorticity[n] = float(np.max(weight * np.abs(second)))
        logging.debug('Residuals of mode %d: %.3e, %.3e', n, stream[n], vorticity[n])

    spec = WeightedNormSpec('U', alpha + 2.0, kappa + 2.0, 1)
    scale = max(norm_weighted(w_hat, spec), norm_weighted(phi_hat, spec))
    return ResidualReport(stream, vorticity, scale)


def consistency_Gstar_H(gamma_hat: FourierVector, w_hat: FourierVector, bg=None,
                        normalize: bool = True, r_min: float = CONSISTENCY_RADIUS,
                        alpha: float = DEFAULT_ALPHA) -> float:
    """
    Largest gap between the divergence form of G*_n and the advective form H_n over
    nodes r >= r_min, divided by 1 + |H_n| unless normalize is off.
    bg=None compares the background-free forms.
    """

    psi1 = None if bg is None else bg.psi_star_prime
    omega1 = None if bg is None else bg.omega_star_prime
    sources = build_sources(gamma_hat, w_hat, psi1, omega1, alpha)
    N = w_hat.N
    divergence = source_divergence_form(sources.D, sources.E)
    advective = sources.H.stack(0)[N:]
    mask = gamma_hat.grid.nodes >= r_min
    gap = np.abs(divergence[:, mask] - advective[:, mask])
    if normalize:
        gap = gap / (1.0 + np.abs(advective[:, mask]))
    return float(np.max(gap))


@dataclass(frozen=True)
class DecayMetric:
    """sup (1+r)^(1+alpha) |u - u_ref| and the log-log slope of max_theta |u - u_ref|."""

    alpha_used: float
    sup_value: float
    fitted_slope: Optional[float]
    window: Tuple[float, float]


def decay_metric(solution, alpha: float, theta_count: int = None) -> DecayMetric:
    """
    Deviation of the velocity from the azimuthal reference ((1/r) integral_0^r s (phi* + phi_0)) e_theta.
    The slope is fitted over [2R*, R_max/2].
    """

    bg = solution.background
    limit = min(0.5, bg.rho_star)
    if not 0.0 < alpha < limit:
        raise NormSpecError('alpha={} is outside the decay range (0, min(1/2, rho*)={})'.format(alpha, limit))
    grid = solution.grid
    count = theta_count if theta_count is not None else max(4 * solution.w.N + 1, 16)
    u_r, u_theta = solution.velocity(angular_grid(count))
    deviation = np.hypot(u_r, u_theta - solution.reference_azimuthal[:, None]).max(axis=1)
    r = grid.nodes
    sup = float(np.max((1.0 + r) ** (1.0 + alpha) * deviation))

    window = (2.0 * grid.r_star, grid.r_max / 2.0)
    inside = (r >= window[0]) & (r <= window[1]) & (deviation > 0.0)
    slope = None
    if np.count_nonzero(inside) >= 2:
        slope = float(np.polyfit(np.log(r[inside]), np.log(deviation[inside]), 1)[0])
    logging.info('Decay metric: sup=%.6e slope=%s', sup, slope)
    return DecayMetric(alpha, sup, slope, window)


def _lagrange(x: float, xs: np.ndarray, ys: np.ndarray) -> complex:
    total = 0j
    for i in range(len(xs)):
        others = np.delete(xs, i)
        total += ys[i] * np.prod((x - others) / (xs[i] - others))
    return total


def _relative_gap(left, right) -> float:
    if left is None or right is None:
        return None
    scale = max(abs(left), abs(right))
    return 0.0 if scale == 0.0 else float(abs(left - right) / scale)


@dataclass(frozen=True)
class MatchingGap:
    value: float
    derivative: float
    second: Optional[float] = None


def _junction_of(profile: RadialProfile):
    """(left, right) pairs of value, first and second derivative at R*."""
    if profile.junction is not None:
        j = profile.junction
        return ((j.left_value, j.right_value), (j.left_derivative, j.right_derivative),
                (j.left_second, j.right_second))
    # one-sided extrapolation from the three nodes beyond R*
    grid = profile.grid
    k = grid.r_star_index
    nodes = grid.nodes
    right = slice(k + 1, k + 4)
    first = profile.derivatives[0] if profile.order >= 1 else differentiate(profile, 1).values
    pairs = [(profile.values[k], _lagrange(nodes[k], nodes[right], profile.values[right])),
             (first[k], _lagrange(nodes[k], nodes[right], first[right]))]
    if profile.order >= 2:
        pairs.append((profile.derivatives[1][k], _lagrange(nodes[k], nodes[right], profile.derivatives[1][right])))
    else:
        pairs.append((None, None))
    return tuple(pairs)


def matching_gap(f_hat: FourierVector, n: int = 2) -> MatchingGap:
    """Relative jumps of the value, first and second derivative of f_n across R*."""
    value, first, second = _junction_of(f_hat[abs(n)])
    return MatchingGap(_relative_gap(*value), _relative_gap(*first), _relative_gap(*second))


def _one_sided_cubic(nodes: np.ndarray, values: np.ndarray, at: float) -> Tuple[complex, complex]:
    """Value and slope at `at` of the cubic through four samples."""
    coefficients = np.linalg.solve(np.vander(nodes - at, 4, increasing=True), values)
    return coefficients[0], coefficients[1]


def sampled_matching_gap(profile: RadialProfile) -> MatchingGap:
    """
    Jumps of the value and first derivative across R* of a profile known only by its
    samples: cubics through the four nodes on either side of R*, extrapolated to R*.
    """
    grid = profile.grid
    k = grid.r_star_index
    nodes = grid.nodes
    left = _one_sided_cubic(nodes[k - 4:k], profile.values[k - 4:k], grid.r_star)
    right = _one_sided_cubic(nodes[k + 1:k + 5], profile.values[k + 1:k + 5], grid.r_star)
    return MatchingGap(_relative_gap(left[0], right[0]), _relative_gap(left[1], right[1]))


def sampled_stream_residual(gamma_hat: FourierVector, w_hat: FourierVector) -> Dict[int, float]:
    """
    sup over r > 0 of |Delta_n gamma_n + w_n| per mode, with the derivatives of
    gamma_n taken by finite differences, relative to max_n sup |w_n|.
    """
    r = gamma_hat.grid.nodes[1:]
    scale = max(float(np.max(np.abs(mode.values))) for mode in w_hat.modes)
    out = {}
    for n in range(gamma_hat.N + 1):
        g = gamma_hat.modes[n]
        first = differentiate(g, 1)
        residual = _laplacian(g.values[1:], first.values[1:], first.derivatives[0][1:], r, n)
        worst = float(np.max(np.abs(residual + w_hat.modes[n].values[1:])))
        out[n] = worst / scale if scale > 0.0 else worst
    return out


def divergence_modes(solution) -> float:
    """max_n sup_{r>0} |u_r,n' + u_r,n / r + (i n / r) u_theta,n|, relative to sup |u|."""
    r = solution.grid.nodes[1:]
    n = np.arange(solution.velocity_r.shape[0])[:, None]
    u_r = solution.velocity_r[:, 1:]
    u_theta = solution.velocity_theta[:, 1:]
    divergence = solution.velocity_r_prime[:, 1:] + u_r / r + 1j * n * u_theta / r
    scale = max(float(np.max(np.abs(u_r))), float(np.max(np.abs(u_theta))))
    worst = float(np.max(np.abs(divergence)))
    return worst / scale if scale > 0.0 else worst


@dataclass(frozen=True)
class OracleRow:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)


@dataclass
class OracleSettings:
    nodes: int = 256
    modes: int = 4
    r_star: float = 1.0
    r_max: float = 32.0
    seed: int = 0
    mus: Tuple[float, ...] = field(default_factory=lambda: tuple(np.linspace(-2.0, 2.0, 41)))


def _bump_laplacian(n: int, p: int):
    """h = r^n (1 - r^2)^p on [0, 1] and its mode Laplacian in closed form."""
    def h(s):
        s = np.asarray(s, dtype=float)
        return np.where(s < 1.0, s ** n * np.clip(1.0 - s * s, 0.0, None) ** p, 0.0).astype(complex)

    def laplacian(s):
        s = np.asarray(s, dtype=float)
        u = np.clip(1.0 - s * s, 0.0, None)
        out = s ** n * (-4.0 * p * (n + 1) * u ** (p - 1) + 4.0 * p * (p - 1) * s * s * u ** (p - 2))
        return np.where(s < 1.0, out, 0.0).astype(complex)
    return h, laplacian


def _oracle_operators(grid) -> List[OracleRow]:
    rows = []
    monomial = RadialProfile.from_function(grid, lambda s: np.asarray(s, dtype=float) ** 2 + 0j)
    r, T, z = 0.5, 2.0, 1.0
    expected = r ** z / (2 * z) * (T ** (4 - z) - r ** (4 - z)) / (4 - z)
    rows.append(OracleRow('op_I monomial', abs(op_I(T, z, monomial, r) - expected) / abs(expected), 1e-8))
    t = 0.25
    expected = (r ** (4 + z) - t ** (4 + z)) / ((4 + z) * 2 * z * r ** z)
    rows.append(OracleRow('op_J monomial', abs(op_J(t, z, monomial, r) - expected) / abs(expected), 1e-8))

    family = PowerLaw(1.0, 1, 4.0)
    profile = family.profile(grid)
    z, T = 2.0, grid.r_max
    reference, _ = scipy_integrate.quad(
        lambda s: s ** (1 - z) * float(np.real(family.value(s))), 1.0, T, limit=200)
    expected = reference / (2 * z)
    rows.append(OracleRow('op_I power law', abs(op_I(T, z, profile, 1.0) - expected) / abs(expected), 1e-8))

    # s^-5 beyond R* = 1 with an exact tail: I^inf_2[f](1) = 1/20
    tail = TailModel(1.0, 5.0)
    exterior = RadialProfile.from_function(
        grid, lambda s: np.where(np.asarray(s) >= 1.0, np.asarray(s, dtype=float), np.inf) ** -5.0 + 0j,
        tail=tail)
    rows.append(OracleRow('op_I power law to infinity', abs(op_I(np.inf, 2, exterior, 1.0) - 0.05) / 0.05, 1e-10))
    return rows


def _exterior_bump_laplacian(a: float, z: complex, p: int = 8):
    """h = ((r - a)(a + 2 - r))^p on [a, a + 2] and its index-z mode Laplacian in closed form."""
    def h(s):
        s = np.asarray(s, dtype=float)
        return np.clip((s - a) * (a + 2.0 - s), 0.0, None) ** p + 0j

    def laplacian(s):
        s = np.asarray(s, dtype=float)
        q = np.clip((s - a) * (a + 2.0 - s), 0.0, None)
        dq = 2.0 * a + 2.0 - 2.0 * s
        first = p * q ** (p - 1) * dq
        second = p * (p - 1) * q ** (p - 2) * dq * dq - 2.0 * p * q ** (p - 1)
        safe = np.where(s > 0.0, s, 1.0)
        return second + first / safe - z * z * q ** p / safe ** 2 + 0j
    return h, laplacian


def _oracle_green_inversion(grid) -> List[OracleRow]:
    from plane_navier_stokes.solver import zeta_index

    rows = []
    for n in (1, 2, 3):
        h, laplacian = _bump_laplacian(n, 4)
        target = RadialProfile.from_function(grid, laplacian)
        terms = green_terms(target.with_fitted_tail(3.0), n)
        recovered = -(terms.I + terms.J)
        exact = h(grid.nodes)
        gap = float(np.max(np.abs(recovered - exact)) / np.max(np.abs(exact)))
        rows.append(OracleRow('green inversion n={}'.format(n), gap, 1e-6))

    # exterior problem on (R*, inf) with the index of the |n| = 2 transport operator
    z = zeta_index(2, 0.1)
    h, laplacian = _exterior_bump_laplacian(grid.r_star, z)
    target = RadialProfile.from_function(grid, laplacian).with_fitted_tail(3.0)
    terms = green_terms(target, z, lower=grid.r_star)
    outer = grid.outer
    gap = float(np.max(np.abs(-(terms.I + terms.J)[outer] - h(grid.nodes[outer]))))
    rows.append(OracleRow('green inversion zeta_2', gap, 1e-7))
    return rows


def _oracle_constants(settings: OracleSettings) -> List[OracleRow]:
    from plane_navier_stokes.solver import rho_from_mu, zeta_index
    rho_gap = 0.0
    zeta_gap = 0.0
    for mu in settings.mus:
        if mu == 0.0:
            continue
        rho_gap = max(rho_gap, abs(rho_from_mu(mu) - (np.sqrt(complex(4.0, 2.0 * mu)).real - 2.0)))
        zeta_gap = max(zeta_gap, abs(abs(zeta_index(2, mu)) - 2.0 * (1.0 + (mu / 2.0) ** 2) ** 0.25))
    return [OracleRow('rho* radical form', rho_gap, 1e-12),
            OracleRow('|zeta_2| closed form', zeta_gap, 1e-12),
            OracleRow('rho* at mu*=0', abs(rho_from_mu(0.0)), 1e-12)]


def random_band(grid, N: int, rng: np.random.Generator, scale: float = 1e-2) -> FourierVector:
    """Sum of Gaussian bumps r^n exp(-(r/b)^2) with random complex amplitudes."""
    components = []
    for n in range(N + 1):
        amplitude = scale * complex(rng.standard_normal(), 0.0 if n == 0 else rng.standard_normal())
        components.append((n, gaussian_bump(n, amplitude, float(rng.uniform(0.5, 2.0)))))
    return mode_vector(grid, N, components)


def _oracle_structure(grid, settings: OracleSettings) -> List[OracleRow]:
    from plane_navier_stokes.solver import background_from_phi, map_Phi

    rng = np.random.default_rng(settings.seed)
    f = random_band(grid, settings.modes, rng)
    g = random_band(grid, settings.modes, rng)
    bump = PolynomialBump(0.6, 2, settings.r_star).profile(grid)
    bg = background_from_phi(bump, settings.r_star, grid)

    linear = map_L(f.scaled(2.0) + g.scaled(-0.5))
    split = map_L(f).scaled(2.0) + map_L(g).scaled(-0.5)
    spec = WeightedNormSpec('U', 1.0, 2.0, 1)
    scale = norm_weighted(split, spec)
    rows = [OracleRow('map_L linearity', distance_weighted(linear, split, spec) / scale, 1e-10)]

    phi_linear = map_Phi(f.scaled(3.0), bg)
    phi_split = map_Phi(f, bg).scaled(3.0)
    rows.append(OracleRow('map_Phi linearity',
                          distance_weighted(phi_linear, phi_split, spec) / norm_weighted(phi_split, spec), 1e-10))

    gamma = map_L(f)
    D = bilinear_D(None, gamma)
    D3 = bilinear_D(None, gamma.scaled(3.0))
    gap = float(max(np.max(np.abs(a.values - 9.0 * b.values)) for a, b in zip(D3.modes, D.modes)))
    peak = float(max(np.max(np.abs(b.values)) for b in D.modes))
    rows.append(OracleRow('bilinear_D quadratic scaling', gap / (9.0 * peak), 1e-12))

    rows.append(OracleRow('G* against H', consistency_Gstar_H(gamma, f, bg), 1e-6))
    return rows


def run_oracles(settings: OracleSettings = None) -> List[OracleRow]:
    """Runs every analytic oracle at a modest resolution."""
    settings = settings if settings is not None else OracleSettings()
    grid = build_grid(settings.r_star, settings.r_max, settings.nodes)
    rows = []
    rows.extend(_oracle_operators(grid))
    rows.extend(_oracle_green_inversion(grid))
    rows.extend(_oracle_constants(settings))
    rows.extend(_oracle_structure(grid, settings))
    for row in rows:
        logging.info('Oracle %-32s %.3e (tol %.1e) %s', row.name, row.value, row.tolerance,
                     'pass' if row.passed else 'FAIL')
    return rows
