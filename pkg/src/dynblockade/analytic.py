"""Weak-excitation analytics for the driven Kerr mode.

When the mode is barely occupied the state stays inside the two-photon
manifold and the no-jump amplitudes of |1> and |2> obey linear ODEs

    dc1/dt = (-i*delta - gamma/2) c1 - i eps(t)
    dc2/dt = (-2i(delta + u) - gamma) c2 - i sqrt(2) eps(t) c1

with populations P1 = |c1|^2 and P2 = |c2|^2.  For a periodic drive the
long-time solution is a Fourier series: every harmonic of the drive
contributes a one-photon response weight, and every ordered pair of
harmonics an excitation path into |2>.  The near-cancellation of all
two-photon paths is what produces the blockade.

This module provides both the Fourier (periodic) solution and a direct
time-domain integration of the same ODEs, so each can serve as an oracle
for the other and for the full master equation.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy.integrate import solve_ivp

from .fock import SystemParams
from .pulses import FourierSeries, PulseSpec, default_k_max, envelope, fourier_coeffs

# coefficients this far below the largest are dropped before building the
# quadratic (two-photon) response; no accuracy cost at double precision
PRUNE_REL = 1e-12

WEAK_EXCITATION_P1_MAX = 0.1


def one_photon_weight(k: int, p: SystemParams, series: FourierSeries) -> complex:
    """Response weight of drive harmonic k in the one-photon amplitude:

    -i eps_k / (i (delta + k omega_p) + gamma/2)
    """
    eps_k = series.coeff(k)
    return -1j * eps_k / (1j * (p.delta + k * series.omega_p) + 0.5 * p.gamma)


def two_photon_weight(k_prime: int, k: int, p: SystemParams, series: FourierSeries) -> complex:
    """Weight of the excitation path (k into |1>, then k' into |2>):

    -i sqrt(2) eps_{k'} / (i (k + k') omega_p + 2i (delta + u) + gamma)
    """
    eps_kp = series.coeff(k_prime)
    denom = 1j * (k + k_prime) * series.omega_p + 2j * (p.delta + p.u) + p.gamma
    return -1j * math.sqrt(2.0) * eps_kp / denom


def _one_photon_weights(p: SystemParams, series: FourierSeries) -> np.ndarray:
    ks = series.ks
    return -1j * series.coeffs / (1j * (p.delta + ks * series.omega_p) + 0.5 * p.gamma)


def _pruned_coeffs(series: FourierSeries) -> np.ndarray:
    coeffs = series.coeffs
    top = np.max(np.abs(coeffs))
    if top == 0.0:
        return coeffs
    return np.where(np.abs(coeffs) < PRUNE_REL * top, 0.0, coeffs)


def _two_photon_harmonics(p: SystemParams, series: FourierSeries) -> np.ndarray:
    """Collapse the double path sum onto total harmonics s = k + k'.

    Every path weight factorizes into a function of s times eps_{k'}, so
    summing paths at fixed s is a discrete convolution of the drive
    coefficients with the one-photon weights.
    """
    eps = _pruned_coeffs(series)
    chi = -1j * eps / (1j * (p.delta + series.ks * series.omega_p) + 0.5 * p.gamma)
    conv = np.convolve(eps, chi)  # index j <-> s = j - 2*k_max
    ss = np.arange(-2 * series.k_max, 2 * series.k_max + 1)
    denom = 1j * ss * series.omega_p + 2j * (p.delta + p.u) + p.gamma
    return (-1j * math.sqrt(2.0) / denom) * conv


def _synthesize(t_arr: np.ndarray, omega_p: float, ks: np.ndarray, weights: np.ndarray):
    """sum_k weights[k] * exp(i k omega_p t), blocked to bound memory."""
    out = np.empty(len(t_arr), dtype=complex)
    block = max(1, 8_000_000 // max(1, len(ks)))
    for i in range(0, len(t_arr), block):
        out[i : i + block] = np.exp(
            1j * omega_p * np.outer(t_arr[i : i + block], ks)
        ) @ weights
    return out


def one_photon_amplitude(t, p: SystemParams, series: FourierSeries):
    """Periodic (long-time) one-photon amplitude at time(s) t."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    weights = _one_photon_weights(p, series)
    out = _synthesize(t_arr, series.omega_p, series.ks, weights)
    if np.isscalar(t) or np.ndim(t) == 0:
        return complex(out[0])
    return out


def two_photon_amplitude(t, p: SystemParams, series: FourierSeries):
    """Periodic two-photon amplitude: all excitation paths summed."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    harm = _two_photon_harmonics(p, series)
    ss = np.arange(-2 * series.k_max, 2 * series.k_max + 1)
    out = _synthesize(t_arr, series.omega_p, ss, harm)
    if np.isscalar(t) or np.ndim(t) == 0:
        return complex(out[0])
    return out


def weak_excitation_populations(
    t_grid,
    p: SystemParams,
    pulse: PulseSpec,
    k_max: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic P1(t), P2(t) on a grid, from the Fourier-series solution.

    Warns when max P1 exceeds 0.1: the two-photon truncation assumes the
    vacuum amplitude stays close to one.
    """
    if k_max is None:
        k_max = default_k_max(pulse)
    series = fourier_coeffs(pulse, k_max=k_max, gamma=p.gamma)
    t_arr = np.asarray(t_grid, dtype=float)
    p1 = np.abs(one_photon_amplitude(t_arr, p, series)) ** 2
    p2 = np.abs(two_photon_amplitude(t_arr, p, series)) ** 2
    if p1.size and p1.max() > WEAK_EXCITATION_P1_MAX:
        warnings.warn(
            f"max P1 = {p1.max():.3g} exceeds {WEAK_EXCITATION_P1_MAX}; "
            "the two-photon truncation is unreliable here",
            stacklevel=2,
        )
    return p1, p2


def integrate_manifold(
    p: SystemParams,
    pulse: PulseSpec,
    t_end: float,
    dt_out: float = 0.002,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Directly integrate the manifold ODEs from c1(0) = c2(0) = 0.

    Returns (times, c1, c2).  After the transient (set by gamma/2) the
    result must converge to the Fourier-series solution; the two therefore
    cross-check each other.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    gam = p.gamma
    coef1 = -1j * p.delta - 0.5 * gam
    coef2 = -2j * (p.delta + p.u) - gam
    root2 = math.sqrt(2.0)

    def rhs(t, y):
        eps = envelope(pulse, t, gam)
        return np.array(
            [coef1 * y[0] - 1j * eps, coef2 * y[1] - 1j * root2 * eps * y[0]]
        )

    n_out = int(math.floor(t_end / dt_out + 1e-9))
    times = np.arange(n_out + 1) * dt_out
    sol = solve_ivp(
        rhs,
        (0.0, times[-1]),
        np.zeros(2, dtype=complex),
        method="DOP853",
        t_eval=times,
        rtol=rtol,
        atol=atol,
        max_step=0.25 * pulse.period,
    )
    if not sol.success:
        raise RuntimeError(f"manifold integration failed: {sol.message}")
    return times, sol.y[0], sol.y[1]
