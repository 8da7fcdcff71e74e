"""
Bilinear source terms of the vorticity equation in Fourier modes.

All convolutions run over k + l = n with both indices in [-N, N], k ascending.
Radial derivatives are assembled by the product rule from the derivative data of
the streamfunction modes, never by differencing.
"""

from dataclasses import dataclass, field
import logging
from typing import Callable, Dict, Optional

import numpy as np

from plane_navier_stokes.errors import ProfileError
from plane_navier_stokes.radial_grid import DEFAULT_ALPHA, RadialProfile, fit_tail, tail_exponent
from plane_navier_stokes.spectral import FourierVector


def switch_radius(r_star: float) -> float:
    """Below this radius the advective form replaces the divergence form of G*."""
    return min(1.0, r_star / 2.0)


def _convolve(weight: Callable, A: np.ndarray, B: np.ndarray, N: int) -> np.ndarray:
    """Rows n = 0..N of sum_{k+l=n} weight(k, l) A_k B_l; rows of A, B are indexed by k + N."""
    out = np.empty((N + 1, A.shape[1]), dtype=complex)
    for n in range(N + 1):
        k = np.arange(n - N, N + 1)
        l = n - k
        out[n] = np.sum(weight(k, l)[:, None] * A[k + N] * B[l + N], axis=0)
    return out


def _k(k, l):
    return k.astype(float)


def _l(k, l):
    return l.astype(float)


def _kl(k, l):
    return (k * l).astype(float)


def _one(k, l):
    return np.ones(len(k))


def _k_minus_l(k, l):
    return (k - l).astype(float)


def _background(profile: Optional[RadialProfile], size: int, orders: int):
    """Values and derivatives of a background profile, or zeros."""
    if profile is None:
        return [np.zeros(size, dtype=complex) for _ in range(orders + 1)]
    if profile.order < orders:
        raise ProfileError('Background profile needs {} derivatives'.format(orders))
    return [profile.derivative(j) for j in range(orders + 1)]


def _stacks(fv: FourierVector, orders: int, name: str):
    if any(m.order < orders for m in fv.modes):
        raise ProfileError('{} needs radial derivatives up to order {}'.format(name, orders))
    return [fv.stack(j) for j in range(orders + 1)]


def _vector(rows, derivative_rows, grid, role, alpha, derivative_only=False) -> FourierVector:
    exponent = tail_exponent(role, alpha)
    modes = []
    for n in range(rows.shape[0]):
        profile = RadialProfile(grid, rows[n], tuple(d[n] for d in derivative_rows))
        modes.append(profile.with_tail(fit_tail(profile, exponent)))
    return FourierVector(tuple(modes), derivative_only)


def _bilinear_D_rows(psi1, g, N):
    """D_n, D_n', D_n'' for n = 0..N."""
    P1, P2, P3 = psi1
    n = np.arange(N + 1)[:, None]
    g0, g1, g2, g3 = (a[N:] for a in g)
    D = 1j * _convolve(_k, g[0], g[1], N) + 1j * n * g0 * P1
    dD = (1j * (_convolve(_k, g[1], g[1], N) + _convolve(_k, g[0], g[2], N))
          + 1j * n * (g1 * P1 + g0 * P2))
    d2D = (1j * (_convolve(_k, g[2], g[1], N) + 2.0 * _convolve(_k, g[1], g[2], N)
                 + _convolve(_k, g[0], g[3], N))
           + 1j * n * (g2 * P1 + 2.0 * g1 * P2 + g0 * P3))
    return D, dD, d2D


def _bilinear_E_rows(psi1, g, r, N):
    """E_n, E_n' for n = 0..N; the zero row is left at 0."""
    P1, P2, _ = psi1
    _, g1, g2 = (a[N:] for a in g[:3])
    klgg = _convolve(_kl, g[0], g[0], N)
    kl_dg_g = _convolve(_kl, g[1], g[0], N)
    dg_dg = _convolve(_one, g[1], g[1], N)
    d2g_dg = _convolve(_one, g[2], g[1], N)

    E = np.zeros_like(klgg)
    dE = np.zeros_like(klgg)
    p = slice(1, None)
    rp = r[p]
    E[:, p] = -klgg[:, p] / rp - rp * dg_dg[:, p] - 2.0 * rp * g1[:, p] * P1[p]
    dE[:, p] = (klgg[:, p] / rp ** 2 - 2.0 * kl_dg_g[:, p] / rp - dg_dg[:, p]
                - 2.0 * rp * d2g_dg[:, p] - 2.0 * g1[:, p] * P1[p]
                - 2.0 * rp * (g2[:, p] * P1[p] + g1[:, p] * P2[p]))
    # gamma_k ~ gamma_k'(0) r near the origin
    dE[:, 0] = -(_convolve(_kl, g[1][:, :1], g[1][:, :1], N)[:, 0] + dg_dg[:, 0]) - 2.0 * g1[:, 0] * P1[0]
    E[0] = 0.0
    dE[0] = 0.0
    return E, dE


def _advection_H_rows(psi1, omega1, g, w, r, N):
    P1 = psi1[0]
    W1 = omega1[0]
    n = np.arange(N + 1)[:, None]
    g0, g1 = (a[N:] for a in g[:2])
    w0, w1 = (a[N:] for a in w[:2])
    H = np.empty((N + 1, len(r)), dtype=complex)
    p = slice(1, None)
    rp = r[p]
    transport = (_convolve(_k, g[0][:, p], w[1][:, p], N)
                 - _convolve(_l, g[1][:, p], w[0][:, p], N))
    H[:, p] = (1j * transport / rp + 1j * n * W1[p] * g0[:, p] / rp
               - 1j * n * P1[p] * w0[:, p] / rp)
    H[:, 0] = (1j * _convolve(_k_minus_l, g[1][:, :1], w[1][:, :1], N)[:, 0]
               + 1j * n[:, 0] * (W1[0] * g1[:, 0] - P1[0] * w1[:, 0]))
    return H


def _divergence_form_rows(D, dD, d2D, dE, r, N):
    """G*_n = -(1/r^2)(D_n' + r D_n'' + i n E_n') + (1 - n^2) D_n / r^3 for r > 0."""
    n = np.arange(N + 1)[:, None]
    G = np.full(D.shape, np.nan, dtype=complex)
    p = slice(1, None)
    rp = r[p]
    G[:, p] = (-(dD[:, p] + rp * d2D[:, p] + 1j * n * dE[:, p]) / rp ** 2
               + (1.0 - n * n) * D[:, p] / rp ** 3)
    return G


def bilinear_D(psi_star_prime: Optional[RadialProfile], gamma: FourierVector,
               alpha: float = DEFAULT_ALPHA) -> FourierVector:
    """
    D_n = i sum_{k+l=n} k gamma_k gamma_l' + i n gamma_n psi*',
    with D_n' and D_n'' as derivative data.

    psi_star_prime carries psi*'' and psi*''' as its derivatives; None means no background.
    """
    N = gamma.N
    g = _stacks(gamma, 3, 'bilinear_D')
    psi1 = _background(psi_star_prime, gamma.grid.size, 2)
    D, dD, d2D = _bilinear_D_rows(psi1, g, N)
    return _vector(D, (dD, d2D), gamma.grid, 'bilinear', alpha)


def bilinear_E(psi_star_prime: Optional[RadialProfile], gamma: FourierVector,
               alpha: float = DEFAULT_ALPHA) -> FourierVector:
    """
    E_n = -(1/r) sum kl gamma_k gamma_l - r sum gamma_k' gamma_l' - 2 r gamma_n' psi*'
    for n != 0, with E_n' as derivative data. The zero mode is identically 0.
    """
    N = gamma.N
    g = _stacks(gamma, 2, 'bilinear_E')
    psi1 = _background(psi_star_prime, gamma.grid.size, 1) + [None]
    E, dE = _bilinear_E_rows(psi1, g, gamma.grid.nodes, N)
    return _vector(E, (dE,), gamma.grid, 'bilinear', alpha)


def advection_H(psi_star_prime: Optional[RadialProfile], omega_star_prime: Optional[RadialProfile],
                gamma: FourierVector, w: FourierVector, alpha: float = DEFAULT_ALPHA) -> FourierVector:
    """
    H_n = (i/r) sum (k gamma_k w_l' - l w_l gamma_k') + i n omega*' gamma_n / r - i n psi*' w_n / r,
    finite at r = 0 through gamma_n, w_n = O(r).
    """
    N = gamma.N
    g = _stacks(gamma, 1, 'advection_H')
    wd = _stacks(w, 1, 'advection_H')
    size = gamma.grid.size
    psi1 = _background(psi_star_prime, size, 0)
    omega1 = _background(omega_star_prime, size, 0)
    H = _advection_H_rows(psi1, omega1, g, wd, gamma.grid.nodes, N)
    return _vector(H, (), gamma.grid, 'source', alpha)


def blend_sources(divergence_form: np.ndarray, advective_form: np.ndarray,
                  r: np.ndarray, r_switch: float) -> np.ndarray:
    """Advective rows below r_switch, divergence-form rows from r_switch on."""
    inner = r < r_switch
    out = divergence_form.copy()
    out[:, inner] = advective_form[:, inner]
    return out


def source_Gstar(D: FourierVector, E: FourierVector, H: FourierVector,
                 alpha: float = DEFAULT_ALPHA) -> FourierVector:
    """G*_n in divergence form from D and E, taking H below the switch radius."""
    grid = D.grid
    if any(m.order < 2 for m in D.modes) or any(m.order < 1 for m in E.modes):
        raise ProfileError('source_Gstar needs D with two and E with one derivative')
    N = D.N
    G = _divergence_form_rows(D.stack(0)[N:], D.stack(1)[N:], D.stack(2)[N:], E.stack(1)[N:], grid.nodes, N)
    G = blend_sources(G, H.stack(0)[N:], grid.nodes, switch_radius(grid.r_star))
    return _vector(G, (), grid, 'source', alpha)


def source_divergence_form(D: FourierVector, E: FourierVector) -> np.ndarray:
    """Rows n = 0..N of the divergence form alone, NaN at r = 0."""
    N = D.N
    return _divergence_form_rows(D.stack(0)[N:], D.stack(1)[N:], D.stack(2)[N:], E.stack(1)[N:],
                                 D.grid.nodes, N)


def source_G0(gamma: FourierVector, w: FourierVector, alpha: float = DEFAULT_ALPHA) -> FourierVector:
    """G*_n with the background set to zero."""
    D = bilinear_D(None, gamma, alpha)
    E = bilinear_E(None, gamma, alpha)
    H = advection_H(None, None, gamma, w, alpha)
    return source_Gstar(D, E, H, alpha)


@dataclass(frozen=True, eq=False)
class SourceBundle:
    """Every source term built from one (gamma, w) pair."""

    D: FourierVector
    E: FourierVector
    H: FourierVector
    Gstar: FourierVector
    G0: FourierVector
    provenance: Dict[str, str] = field(default_factory=dict)


def build_sources(gamma: FourierVector, w: FourierVector,
                  psi_star_prime: Optional[RadialProfile] = None,
                  omega_star_prime: Optional[RadialProfile] = None,
                  alpha: float = DEFAULT_ALPHA) -> SourceBundle:
    """Sources with the given background for D, E, H, G* and without it for G0."""
    D = bilinear_D(psi_star_prime, gamma, alpha)
    E = bilinear_E(psi_star_prime, gamma, alpha)
    H = advection_H(psi_star_prime, omega_star_prime, gamma, w, alpha)
    Gstar = source_Gstar(D, E, H, alpha)
    G0 = source_G0(gamma, w, alpha)
    background = 'zero' if psi_star_prime is None else 'background'
    provenance = {
        'D': background,
        'E': background,
        'H': background if omega_star_prime is not None or psi_star_prime is not None else 'zero',
        'Gstar': background,
        'G0': 'zero',
    }
    logging.debug('Built source terms for %d modes (%s background)', gamma.N + 1, background)
    return SourceBundle(D, E, H, Gstar, G0, provenance)
