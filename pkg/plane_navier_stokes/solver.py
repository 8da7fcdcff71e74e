"""
Background flow, the solution maps Phi and S, the Picard iteration and the
reconstruction of the velocity field.

Modes with |n| = 2 are represented by two pieces glued at R*: an inner piece built
with the index |n| and an outer piece built with the complex index
zeta_n = (n^2 + i n mu*)^(1/2) of the transport-modified operator.
"""

from dataclasses import dataclass, field
import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from plane_navier_stokes.errors import BackgroundError, DivergenceError, ProfileError
from plane_navier_stokes.nonlinear import SourceBundle, build_sources
from plane_navier_stokes.operators import (
    extrapolate_origin, green_terms, lower_integral, map_L, upper_integral)
from plane_navier_stokes.radial_grid import (
    DEFAULT_ALPHA, Junction, RadialGrid, RadialProfile, differentiate, fit_tail, tail_exponent)
from plane_navier_stokes.spectral import FourierVector, synthesize_rows
from plane_navier_stokes.verify import WeightedNormSpec, distance_weighted, norm_weighted


DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 30
DEFAULT_DELTA = 0.1
DEFAULT_EPSILON = 1.0
DEFAULT_KAPPA = 2.0

# Consecutive non-contracting steps tolerated before giving up.
DIVERGENCE_PATIENCE = 3

# The blended representation applies to this mode (and its conjugate).
BLENDED_MODE = 2


def rho_from_mu(mu: float) -> float:
    """sqrt(2) [(1 + (mu/2)^2)^(1/2) + 1]^(1/2) - 2."""
    return float(np.sqrt(2.0) * np.sqrt(np.sqrt(1.0 + (mu / 2.0) ** 2) + 1.0) - 2.0)


def zeta_index(n: int, mu: float) -> complex:
    """(n^2 + i n mu)^(1/2) on the principal branch."""
    return complex(np.sqrt(complex(n * n, n * mu)))


@dataclass(frozen=True, eq=False)
class BackgroundFlow:
    """
    Radial forcing phi* supported in [0, R*] and the exact radial flow it drives:
    psi*' = -(1/r) integral_0^r s phi* ds, omega* = phi*.

    psi_star_prime carries psi*'' and psi*''' as derivative data, omega_star_prime
    carries omega*'' when phi* has a second derivative.
    """

    grid: RadialGrid
    phi_star: RadialProfile
    r_star: float
    mu_star: float
    rho_star: float
    nu_star: float
    mass: np.ndarray
    psi_star_prime: RadialProfile
    omega_star_prime: RadialProfile
    delta: float = DEFAULT_DELTA

    @property
    def omega_star(self) -> RadialProfile:
        return self.phi_star

    @property
    def smallness(self) -> float:
        """R*^rho* nu*, to be compared with delta."""
        return self.r_star ** self.rho_star * self.nu_star

    @property
    def condition_satisfied(self) -> bool:
        return self.smallness < self.delta

    def zeta(self, n: int) -> complex:
        return zeta_index(n, self.mu_star)

    def zeta_table(self, N: int) -> Dict[int, complex]:
        return {n: self.zeta(n) for n in range(-N, N + 1)}


def background_from_phi(phi_star: RadialProfile, r_star: float, grid: RadialGrid,
                        delta: float = DEFAULT_DELTA) -> BackgroundFlow:
    """Derives mu*, rho*, nu* and the background profiles from a radial forcing."""

    if phi_star.grid is not grid:
        raise BackgroundError('Forcing is not sampled on the solver grid')
    if grid.r_star != r_star:
        raise BackgroundError('Grid holds R*={} but the forcing is supported in [0, {}]'.format(grid.r_star, r_star))
    values = phi_star.values
    scale = float(np.max(np.abs(values)))
    if np.any(np.abs(values.imag) > 1e-14 * scale):
        raise BackgroundError('Radial forcing must be real')
    if np.any(np.abs(values[grid.nodes > r_star]) > 1e-14 * scale):
        raise BackgroundError('Radial forcing must vanish beyond R*={}'.format(r_star))

    r = grid.nodes
    phi = values.real
    if phi_star.order >= 1:
        dphi = phi_star.derivatives[0].real
    else:
        dphi = differentiate(phi_star, 1).values.real
    d2phi = phi_star.derivatives[1].real if phi_star.order >= 2 else None

    mass = lower_integral(phi_star, 1.0).real.copy()
    mu_star = float(mass[grid.r_star_index])
    mass[grid.r_star_index:] = mu_star
    if abs(mu_star) <= 1e-12 * r_star ** 2 * scale:
        raise BackgroundError('The forcing has zero mass: mu* = {:.3e}'.format(mu_star))
    rho_star = rho_from_mu(mu_star)
    if rho_star >= 1.0:
        raise BackgroundError('rho*={} must be below 1 (|mu*|={} is too large)'.format(rho_star, abs(mu_star)))
    nu_star = float(np.max(np.abs(mass)) + np.max((1.0 + r) ** 2 * np.abs(phi))
                    + np.max((1.0 + r) ** 2 * np.abs(dphi)))

    p = slice(1, None)
    psi1 = np.zeros(grid.size)
    psi2 = np.empty(grid.size)
    psi3 = np.empty(grid.size)
    psi1[p] = -mass[p] / r[p]
    psi2[p] = mass[p] / r[p] ** 2 - phi[p]
    psi3[p] = -2.0 * mass[p] / r[p] ** 3 + phi[p] / r[p] - dphi[p]
    psi2[0] = -phi[0] / 2.0
    psi3[0] = -2.0 * dphi[0] / 3.0
    psi_star_prime = RadialProfile(grid, psi1, (psi2, psi3))
    omega_star_prime = RadialProfile(grid, dphi, () if d2phi is None else (d2phi,))

    background = BackgroundFlow(grid, phi_star, r_star, mu_star, rho_star, nu_star, mass,
                                psi_star_prime, omega_star_prime, delta)
    logging.info('Background: mu*=%.6g rho*=%.6g nu*=%.6g', mu_star, rho_star, nu_star)
    if not background.condition_satisfied:
        logging.warning('Smallness condition fails: R*^rho* nu* = %.6g >= delta = %.6g',
                        background.smallness, delta)
    return background


Triplet = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _with_derivatives(sigma: RadialProfile) -> RadialProfile:
    if sigma.order >= 2:
        return sigma
    first = differentiate(sigma, 1)
    return RadialProfile(sigma.grid, sigma.values, (first.values, first.derivatives[0]),
                         sigma.tail, sigma.function, sigma.junction)


def _glue(grid: RadialGrid, inner: Triplet, outer: Triplet, alpha: float) -> RadialProfile:
    """Inner arrays on [0, R*], outer arrays on (R*, R_max], with the one-sided data at R*."""
    k = grid.r_star_index
    arrays = [np.concatenate([i[:k + 1], o[k + 1:]]) for i, o in zip(inner, outer)]
    junction = Junction(inner[0][k], inner[1][k], outer[0][k], outer[1][k], inner[2][k], outer[2][k])
    profile = RadialProfile(grid, arrays[0], tuple(arrays[1:]), None, None, junction)
    return profile.with_tail(fit_tail(profile, tail_exponent('vorticity', alpha)))


def _sigma_pieces(sigma: RadialProfile, bg: BackgroundFlow) -> Tuple[Triplet, Triplet]:
    """Inner and outer pieces carrying sigma through the blended representation."""
    grid = sigma.grid
    r = grid.nodes
    R = grid.r_star
    k = grid.r_star_index
    zeta = bg.zeta(BLENDED_MODE)
    n2 = BLENDED_MODE ** 2
    s0, s1, s2 = sigma.values, sigma.derivatives[0], sigma.derivatives[1]

    # K_I = r^zeta integral_r^inf s^(-zeta-1) sigma, K_J = r^(-zeta) integral_R*^r s^(zeta-1) sigma
    outside = slice(k, None)
    ro = r[outside]
    K_I = np.exp(zeta * np.log(ro)) * upper_integral(sigma, -zeta - 1.0)[outside]
    K_J = np.exp(-zeta * np.log(ro)) * lower_integral(sigma, zeta - 1.0, R)[outside]
    c = (zeta * zeta - n2) / (2.0 * zeta)

    # integral_R*^inf applied to the mode Laplacian of sigma, integrated by parts
    I_laplacian = -R * s1[k] / (2.0 * zeta) - s0[k] / 2.0 + c * K_I[0]
    q1 = (-2.0 * zeta * I_laplacian - zeta * s0[k] - R * s1[k]) / (2.0 + zeta)
    q2 = (-(zeta - 2.0) * I_laplacian + 2.0 * s0[k] - R * s1[k]) / (2.0 + zeta)

    inner = (s0 + (r / R) ** 2 * q1,
             s1 + 2.0 * r * q1 / R ** 2,
             s2 + 2.0 * q1 / R ** 2)

    decay = np.exp(zeta * np.log(R / ro))
    B = decay * (R * s1[k] / zeta - s0[k]) / 2.0
    harmonic = decay * q2
    outer = [np.full(grid.size, np.nan, dtype=complex) for _ in range(3)]
    outer[0][outside] = s0[outside] - c * (K_I + K_J) + B + harmonic
    outer[1][outside] = (s1[outside] - c * zeta * (K_I - K_J) / ro
                         - zeta * (B + harmonic) / ro)
    outer[2][outside] = (s2[outside]
                         - c * zeta * (zeta * (K_I + K_J) - (K_I - K_J) - 2.0 * s0[outside]) / ro ** 2
                         + zeta * (zeta + 1.0) * (B + harmonic) / ro ** 2)
    return inner, tuple(outer)


def _phi_mode(n: int, sigma: RadialProfile, bg: BackgroundFlow, alpha: float) -> RadialProfile:
    sigma = _with_derivatives(sigma)
    if sigma.tail is None:
        sigma = sigma.with_fitted_tail(tail_exponent('vorticity', alpha))
    if n != BLENDED_MODE:
        return sigma
    inner, outer = _sigma_pieces(sigma, bg)
    return _glue(sigma.grid, inner, outer, alpha)


def map_Phi(phi_hat: FourierVector, bg: BackgroundFlow, alpha: float = DEFAULT_ALPHA) -> FourierVector:
    """Phi_n = phi_n, except for |n| = 2 where phi_n passes through the blended representation."""
    return phi_hat.map(lambda n, sigma: _phi_mode(n, sigma, bg, alpha), derivative_only=False)


def _green_part(n: int, sources: SourceBundle, bg: BackgroundFlow) -> Tuple[Triplet, Optional[Triplet]]:
    """The part of y_n generated by the source terms: (inner, outer) for |n| = 2, (all, None) otherwise."""
    grid = bg.grid
    r = grid.nodes
    p = slice(1, None)
    if n == 0:
        D = sources.D[0]
        d0, d1, d2 = D.values, D.derivatives[0], D.derivatives[1]
        tail = upper_integral(D, -2.0)
        y0 = np.empty(grid.size, dtype=complex)
        y1 = np.empty(grid.size, dtype=complex)
        y2 = np.empty(grid.size, dtype=complex)
        y0[p] = -d0[p] / r[p] + 2.0 * tail[p]
        y1[p] = -d1[p] / r[p] - d0[p] / r[p] ** 2
        y2[p] = -d2[p] / r[p] + 2.0 * d0[p] / r[p] ** 3
        y0[0] = 2.0 * tail[0]
        y1[0] = -1.5 * d2[0]
        y2[0] = extrapolate_origin(r, y2)
        return (y0, y1, y2), None

    G = sources.Gstar[n]
    if n != BLENDED_MODE:
        t = green_terms(G, n)
        return (-(t.I + t.J), -(t.dI - t.dJ), -(t.d2I + t.d2J - G.values)), None

    R = grid.r_star
    k = grid.r_star_index
    zeta = bg.zeta(n)
    G0 = sources.G0[n]
    inside = green_terms(G, n, upper=R, lower=0.0)
    outside = green_terms(G0, zeta, upper=np.inf, lower=R)
    J_star = inside.J[k]
    I_zeta = outside.I[k]
    c1 = ((zeta - n) * J_star - 2.0 * zeta * I_zeta) / (n + zeta)
    c2 = (-(zeta - n) * I_zeta - 2.0 * n * J_star) / (n + zeta)

    inner = (-(inside.I + inside.J) + (r / R) ** n * c1,
             -(inside.dI - inside.dJ) + n * r ** (n - 1) * c1 / R ** n,
             -(inside.d2I + inside.d2J - G.values) + n * (n - 1) * r ** (n - 2) * c1 / R ** n)
    outer = [np.full(grid.size, np.nan, dtype=complex) for _ in range(3)]
    o = slice(k, None)
    ro = r[o]
    harmonic = np.exp(zeta * np.log(R / ro)) * c2
    outer[0][o] = -(outside.I[o] + outside.J[o]) + harmonic
    outer[1][o] = -(outside.dI[o] - outside.dJ[o]) - zeta * harmonic / ro
    outer[2][o] = -(outside.d2I[o] + outside.d2J[o] - G0.values[o]) + zeta * (zeta + 1.0) * harmonic / ro ** 2
    return inner, tuple(outer)


def map_S(w_hat: FourierVector, sigma_hat: FourierVector, bg: BackgroundFlow,
          alpha: float = DEFAULT_ALPHA, sources: SourceBundle = None) -> FourierVector:
    """
    y = S(w, sigma): the vorticity modes generated by the sources of w, plus sigma
    carried through Phi. Every output mode has analytic first and second derivatives.
    """

    if w_hat.N != sigma_hat.N:
        raise ProfileError('Vorticity and forcing bands differ: {} vs {}'.format(w_hat.N, sigma_hat.N))
    if sources is None:
        gamma = map_L(w_hat)
        sources = build_sources(gamma, w_hat, bg.psi_star_prime, bg.omega_star_prime, alpha)
    grid = bg.grid

    def mode(n: int, sigma: RadialProfile) -> RadialProfile:
        sigma = _with_derivatives(sigma)
        part, outer = _green_part(n, sources, bg)
        if outer is None:
            values = part[0] + sigma.values
            derivatives = (part[1] + sigma.derivatives[0], part[2] + sigma.derivatives[1])
            profile = RadialProfile(grid, values, derivatives)
            return profile.with_tail(fit_tail(profile, tail_exponent('vorticity', alpha)))
        inner_sigma, outer_sigma = _sigma_pieces(sigma, bg)
        inner = tuple(a + b for a, b in zip(part, inner_sigma))
        outer = tuple(a + b for a, b in zip(outer, outer_sigma))
        return _glue(grid, inner, outer, alpha)

    return sigma_hat.map(mode, derivative_only=False)


@dataclass
class IterationStep:
    iteration: int
    norm: float
    increment: float
    ratio: Optional[float]


@dataclass
class ContractionBudget:
    """
    Empirical stand-ins for the constants of the contraction argument, estimated
    from the iteration history.
    """

    delta_config: float = DEFAULT_DELTA
    epsilon_config: float = DEFAULT_EPSILON
    K1: Optional[float] = None
    K2_nu: Optional[float] = None
    K3: Optional[float] = None
    epsilon_estimate: Optional[float] = None
    M_observed: Optional[float] = None
    M_estimate: Optional[float] = None

    def estimate(self, data_norm: float, norms: List[float]):
        """Fits ||w_(j+1)|| - K3 ||phi|| = K1 ||w_j||^2 + K2 nu ||w_j||."""
        if norms:
            self.M_observed = float(max(norms))
        if data_norm <= 0.0 or not norms:
            return
        self.K3 = norms[0] / data_norm
        if len(norms) < 3:
            return
        x = np.asarray(norms[:-1])
        y = np.asarray(norms[1:]) - self.K3 * data_norm
        (K1, K2_nu), *_ = np.linalg.lstsq(np.column_stack([x * x, x]), y, rcond=None)
        self.K1, self.K2_nu = float(K1), float(K2_nu)
        slack = 1.0 - self.K2_nu
        if self.K1 > 0.0 and self.K3 > 0.0 and slack > 0.0:
            self.epsilon_estimate = slack ** 2 / (4.0 * self.K1 * self.K3)
            discriminant = slack ** 2 - 4.0 * self.K1 * self.K3 * data_norm
            if discriminant >= 0.0:
                self.M_estimate = (slack - np.sqrt(discriminant)) / (2.0 * self.K1)


@dataclass
class IterationReport:
    """Per-step norms and the final state of one Picard run."""

    data_norm: float
    steps: List[IterationStep] = field(default_factory=list)
    converged: bool = False
    diverged: bool = False
    divergence_step: Optional[int] = None
    budget: ContractionBudget = field(default_factory=ContractionBudget)
    diagnostics: Dict[str, object] = field(default_factory=dict)

    @property
    def iterations(self) -> int:
        return len(self.steps)

    @property
    def ratios(self) -> List[float]:
        return [s.ratio for s in self.steps if s.ratio is not None]


def iterate_norm_spec(alpha: float, kappa: float) -> WeightedNormSpec:
    """The U^1 norm with weights (alpha+2, kappa+2) used for iterates and data."""
    return WeightedNormSpec('U', alpha + 2.0, kappa + 2.0, 1)


def picard_solve(phi_hat: FourierVector, bg: BackgroundFlow, tol: float = DEFAULT_TOL,
                 max_iter: int = DEFAULT_MAX_ITER, alpha: float = DEFAULT_ALPHA,
                 kappa: float = DEFAULT_KAPPA,
                 budget: ContractionBudget = None) -> Tuple[FourierVector, IterationReport]:
    """
    Successive substitution w_1 = Phi(phi), w_j = S(w_(j-1), phi) until the relative
    U^1 increment drops to tol.

    Raises DivergenceError, carrying the report, when the increment fails to shrink
    for DIVERGENCE_PATIENCE consecutive steps or a norm stops being finite.
    """

    spec = iterate_norm_spec(alpha, kappa)
    budget = budget if budget is not None else ContractionBudget()
    data_norm = norm_weighted(phi_hat, spec)
    report = IterationReport(data_norm, budget=budget)
    if data_norm > budget.epsilon_config:
        logging.warning('Data norm %.6g exceeds epsilon=%.6g; iterating anyway', data_norm, budget.epsilon_config)

    previous = None
    w_hat = map_Phi(phi_hat, bg, alpha)
    rising = 0
    for j in range(1, max_iter + 1):
        if previous is not None:
            w_hat = map_S(previous, phi_hat, bg, alpha)
        norm = norm_weighted(w_hat, spec)
        increment = norm if previous is None else distance_weighted(w_hat, previous, spec)
        last = report.steps[-1].increment if report.steps else None
        ratio = increment / last if last else None
        report.steps.append(IterationStep(j, norm, increment, ratio))
        logging.info('Iteration %d: |w|=%.6e |dw|=%.6e ratio=%s', j, norm, increment,
                     'n/a' if ratio is None else '{:.4f}'.format(ratio))

        if not (np.isfinite(norm) and np.isfinite(increment)):
            report.diverged = True
            report.divergence_step = j
            budget.estimate(data_norm, [s.norm for s in report.steps])
            raise DivergenceError('Iterate {} is not finite'.format(j), report)
        if increment <= tol * norm:
            report.converged = True
            break
        rising = rising + 1 if ratio is not None and ratio >= 1.0 else 0
        if rising >= DIVERGENCE_PATIENCE:
            report.diverged = True
            report.divergence_step = j
            budget.estimate(data_norm, [s.norm for s in report.steps])
            raise DivergenceError(
                'Increments grew for {} consecutive steps (last ratio {:.4f})'.format(rising, ratio), report)
        previous = w_hat

    budget.estimate(data_norm, [s.norm for s in report.steps])
    if not report.converged:
        logging.warning('No convergence after %d iterations', max_iter)
    return w_hat, report


def scaling_ladder(phi_hat: FourierVector, bg: BackgroundFlow,
                   factors=(1.0, 0.5, 0.25), **kwargs) -> List[Dict[str, object]]:
    """
    Solves for c * phi over the ladder of factors c, recording the first-iterate
    scaling gap and the converged norm of each rung.
    """

    alpha = kwargs.get('alpha', DEFAULT_ALPHA)
    spec = iterate_norm_spec(alpha, kwargs.get('kappa', DEFAULT_KAPPA))
    first = map_Phi(phi_hat, bg, alpha)
    rungs = []
    for c in factors:
        scaled = phi_hat.scaled(c)
        gap = distance_weighted(map_Phi(scaled, bg, alpha), first.scaled(c), spec)
        rung = {'factor': float(c), 'data_norm': norm_weighted(scaled, spec), 'first_iterate_gap': gap}
        try:
            w_hat, report = picard_solve(scaled, bg, **kwargs)
            rung.update(converged=report.converged, norm=report.steps[-1].norm, iterations=report.iterations)
        except DivergenceError as e:
            logging.warning('Ladder rung c=%s diverged: %s', c, e)
            rung.update(converged=False, norm=None, iterations=e.report.iterations)
        rungs.append(rung)
    return rungs


@dataclass(frozen=True, eq=False)
class Solution:
    """
    Perturbation modes and the reconstructed flow psi = psi* + gamma, omega = omega* + w.

    velocity_r and velocity_theta hold the modes n = 0..N of u_r = (1/r) d psi/d theta and
    u_theta = -d psi/dr, with their radial derivatives.
    """

    background: BackgroundFlow
    w: FourierVector
    phi: FourierVector
    gamma: FourierVector
    sources: SourceBundle
    velocity_r: np.ndarray
    velocity_theta: np.ndarray
    velocity_r_prime: np.ndarray
    reference_azimuthal: np.ndarray

    @property
    def grid(self) -> RadialGrid:
        return self.background.grid

    def velocity(self, theta) -> Tuple[np.ndarray, np.ndarray]:
        """(u_r, u_theta) on nodes x theta."""
        return synthesize_rows(self.velocity_r, theta), synthesize_rows(self.velocity_theta, theta)

    def vorticity(self, theta) -> np.ndarray:
        rows = np.array([m.values for m in self.w.modes])
        rows[0] = rows[0] + self.background.phi_star.values
        return synthesize_rows(rows, theta)

    def cartesian(self, theta) -> Tuple[np.ndarray, ...]:
        """x1, x2, u1, u2, omega on nodes x theta."""
        theta = np.asarray(theta, dtype=float)
        r = self.grid.nodes[:, None]
        u_r, u_theta = self.velocity(theta)
        cos, sin = np.cos(theta)[None, :], np.sin(theta)[None, :]
        return (r * cos + 0.0 * u_r, r * sin + 0.0 * u_r,
                u_r * cos - u_theta * sin, u_r * sin + u_theta * cos,
                self.vorticity(theta))


def reconstruct_solution(w_hat: FourierVector, phi_hat: FourierVector, bg: BackgroundFlow,
                         alpha: float = DEFAULT_ALPHA) -> Solution:
    """Streamfunction, vorticity and velocity modes of the flow around the background."""

    grid = bg.grid
    r = grid.nodes
    p = slice(1, None)
    gamma = map_L(w_hat)
    sources = build_sources(gamma, w_hat, bg.psi_star_prime, bg.omega_star_prime, alpha)

    # d gamma_0/dr = -r integral_r^inf D_0/s^2 ds - (1/r) integral_0^r s phi_0 ds
    D0 = sources.D[0]
    forcing_mass = lower_integral(phi_hat[0], 1.0).real
    dgamma0 = np.zeros(grid.size)
    dgamma0[p] = (-r[p] * upper_integral(D0, -2.0)[p].real - forcing_mass[p] / r[p])

    N = w_hat.N
    n = np.arange(N + 1)[:, None]
    psi = gamma.stack(0)[N:]
    dpsi = gamma.stack(1)[N:]
    d2psi = gamma.stack(2)[N:]
    u_r = np.zeros((N + 1, grid.size), dtype=complex)
    du_r = np.zeros((N + 1, grid.size), dtype=complex)
    u_r[:, p] = 1j * n * psi[:, p] / r[p]
    u_r[:, 0] = 1j * n[:, 0] * dpsi[:, 0]
    du_r[:, p] = 1j * n * (dpsi[:, p] / r[p] - psi[:, p] / r[p] ** 2)
    du_r[:, 0] = 1j * n[:, 0] * d2psi[:, 0] / 2.0
    u_theta = -dpsi.copy()
    u_theta[0] = -bg.psi_star_prime.values.real - dgamma0

    reference = np.zeros(grid.size)
    reference[p] = (bg.mass[p] + forcing_mass[p]) / r[p]

    logging.info('Reconstructed velocity field from %d modes', N + 1)
    return Solution(bg, w_hat, phi_hat, gamma, sources, u_r, u_theta, du_r, reference)
