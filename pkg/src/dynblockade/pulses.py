"""Periodic pulse-train envelopes and their Fourier series.

Two drive families are supported: a train of Gaussian pulses and a train
of trapezoidal ("rectangular") pulses.  Both are strictly periodic and
non-negative.  All times are in units of 1/gamma and all amplitudes in
units of gamma (gamma = 1 by default).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Gaussian tails beyond this many 1/(A*gamma) half-widths are below
# exp(-64) ~ 1.6e-28 and are dropped from the pulse sum.
GAUSS_WINDOW = 8.0

# Default series lengths: Gaussian spectra decay super-exponentially,
# rectangular ones only like 1/k^2.
DEFAULT_KMAX_GAUSS = 50
DEFAULT_KMAX_RECT = 400


class QuadratureError(RuntimeError):
    """Adaptive panel quadrature failed to reach the requested accuracy."""


class SymmetryError(RuntimeError):
    """A reconstructed real envelope retained a non-negligible imaginary part."""


@dataclass(frozen=True)
class GaussianTrain:
    """Train of Gaussian pulses, peaks at integer multiples of the period.

    envelope(t) = (eps_p * a_param / sqrt(pi)) * sum_m exp(-(a_param*gamma*(t - m*period))^2)

    The prefactor normalizes each pulse to area eps_p/gamma independent of
    a_param; larger a_param means narrower pulses.
    """

    eps_p: float    # drive strength (units of gamma); 0 means no drive
    a_param: float  # dimensionless duration parameter
    period: float   # pulse period (units of 1/gamma)

    def __post_init__(self):
        if self.eps_p < 0:
            raise ValueError("eps_p must be non-negative")
        if self.a_param <= 0 or self.period <= 0:
            raise ValueError("a_param and period must be strictly positive")


@dataclass(frozen=True)
class RectTrain:
    """Trapezoidal pulse train: linear rise, flat top, linear fall, quiet gap.

    Within one period (t' = t mod period):

        0        <= t' < t_r      : eps_m * t'/t_r
        t_r      <= t' < t_r+t_w  : eps_m
        t_r+t_w  <= t' < t3       : eps_m * (t3 - t')/t_f
        t3       <= t' < period   : 0

    with t3 = t_r + t_w + t_f.  The envelope is continuous everywhere.
    """

    eps_m: float   # maximal amplitude (units of gamma); 0 means no drive
    t_r: float     # rise time
    t_w: float     # flat-top width
    t_f: float     # fall time
    period: float  # pulse period

    def __post_init__(self):
        if self.eps_m < 0:
            raise ValueError("eps_m must be non-negative")
        if self.t_r <= 0 or self.t_f <= 0 or self.period <= 0:
            raise ValueError("t_r, t_f and period must be strictly positive")
        if self.t_w < 0:
            raise ValueError("t_w must be non-negative")
        if self.t_r + self.t_w + self.t_f > self.period:
            raise ValueError("pulse (t_r + t_w + t_f) does not fit within one period")

    @property
    def t2(self) -> float:
        return self.t_r + self.t_w

    @property
    def t3(self) -> float:
        return self.t_r + self.t_w + self.t_f


PulseSpec = GaussianTrain | RectTrain


def gaussian_envelope(p: GaussianTrain, t, gamma: float = 1.0):
    """Evaluate the Gaussian-train envelope at time(s) t (periodic extension)."""
    aw = p.a_param * gamma
    half = GAUSS_WINDOW / aw
    pref = p.eps_p * p.a_param / math.sqrt(math.pi)
    if np.isscalar(t) or np.ndim(t) == 0:
        t = float(t)
        m_lo = math.floor((t - half) / p.period)
        m_hi = math.ceil((t + half) / p.period)
        acc = 0.0
        for m in range(m_lo, m_hi + 1):
            acc += math.exp(-((aw * (t - m * p.period)) ** 2))
        return pref * acc
    t = np.asarray(t, dtype=float)
    m_lo = math.floor((t.min() - half) / p.period)
    m_hi = math.ceil((t.max() + half) / p.period)
    m = np.arange(m_lo, m_hi + 1)
    if t.size * m.size <= 4_000_000:
        out = np.exp(-((aw * (t[..., None] - m * p.period)) ** 2)).sum(axis=-1)
    else:
        # broad pulses (small a_param) need thousands of overlapping terms
        out = np.zeros_like(t)
        for mi in m:
            out += np.exp(-((aw * (t - mi * p.period)) ** 2))
    return pref * out


def rect_envelope(p: RectTrain, t, gamma: float = 1.0):
    """Evaluate the trapezoidal-train envelope at time(s) t (periodic extension)."""
    if np.isscalar(t) or np.ndim(t) == 0:
        tp = float(t) % p.period
        if tp < p.t_r:
            return p.eps_m * tp / p.t_r
        if tp < p.t2:
            return p.eps_m
        if tp < p.t3:
            return p.eps_m * (p.t3 - tp) / p.t_f
        return 0.0
    tp = np.asarray(t, dtype=float) % p.period
    return np.select(
        [tp < p.t_r, tp < p.t2, tp < p.t3],
        [p.eps_m * tp / p.t_r, p.eps_m, p.eps_m * (p.t3 - tp) / p.t_f],
        default=0.0,
    )


def envelope(pulse: PulseSpec, t, gamma: float = 1.0):
    """Drive amplitude at time(s) t for either pulse family."""
    if isinstance(pulse, GaussianTrain):
        return gaussian_envelope(pulse, t, gamma)
    if isinstance(pulse, RectTrain):
        return rect_envelope(pulse, t, gamma)
    raise TypeError(f"unknown pulse spec type: {type(pulse).__name__}")


def default_k_max(pulse: PulseSpec) -> int:
    return DEFAULT_KMAX_GAUSS if isinstance(pulse, GaussianTrain) else DEFAULT_KMAX_RECT


@dataclass(frozen=True)
class FourierSeries:
    """Complex Fourier coefficients of a real periodic envelope.

    coeffs[j] is the coefficient of exp(i*k*omega_p*t) with k = j - k_max,
    so the array covers k = -k_max ... +k_max.
    """

    omega_p: float
    coeffs: np.ndarray
    k_max: int

    def __post_init__(self):
        if self.omega_p <= 0:
            raise ValueError("omega_p must be positive")
        if self.coeffs.shape != (2 * self.k_max + 1,):
            raise ValueError("coeffs must have length 2*k_max + 1")
        # reality of the underlying envelope
        if np.max(np.abs(self.coeffs - np.conj(self.coeffs[::-1]))) > 1e-10:
            raise ValueError("coefficients violate eps_{-k} = conj(eps_k)")

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.k_max, self.k_max + 1)

    def coeff(self, k: int) -> complex:
        if abs(k) > self.k_max:
            raise IndexError(f"harmonic index {k} outside +/-{self.k_max}")
        return complex(self.coeffs[k + self.k_max])


def _panel_edges(pulse: PulseSpec) -> np.ndarray:
    T = pulse.period
    if isinstance(pulse, RectTrain):
        # slope discontinuities become panel boundaries
        return np.unique([0.0, pulse.t_r, pulse.t2, pulse.t3, T])
    return np.array([0.0, 0.5 * T, T])


def fourier_coeffs(
    pulse: PulseSpec,
    k_max: int | None = None,
    gamma: float = 1.0,
    abs_tol: float = 1e-10,
    max_doublings: int = 14,
) -> FourierSeries:
    """Fourier coefficients eps_k = (1/T) int_0^T envelope(t) exp(-i k omega_p t) dt.

    All 2*k_max+1 coefficients are integrated together on shared
    Gauss-Legendre panels; panels are uniformly subdivided (doubling) until
    every coefficient changes by less than abs_tol between refinements.
    """
    if k_max is None:
        k_max = default_k_max(pulse)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    T = pulse.period
    omega_p = 2.0 * math.pi / T
    ks = np.arange(-k_max, k_max + 1)
    edges = _panel_edges(pulse)
    nodes16, weights16 = np.polynomial.legendre.leggauss(16)

    prev = None
    for level in range(max_doublings + 1):
        nsub = 2**level
        ts = []
        ws = []
        for a, b in zip(edges[:-1], edges[1:]):
            sub = np.linspace(a, b, nsub + 1)
            ha = sub[:-1]
            hw = 0.5 * (sub[1:] - sub[:-1])
            # map the 16-point rule onto every subpanel at once
            ts.append((ha[:, None] + hw[:, None] * (nodes16 + 1.0)).ravel())
            ws.append((hw[:, None] * weights16).ravel())
        t = np.concatenate(ts)
        w = np.concatenate(ws)
        f = envelope(pulse, t, gamma) * w
        # node blocks keep the (2k_max+1, nodes) phase matrix bounded
        est = np.zeros(len(ks), dtype=complex)
        block = max(1, 8_000_000 // (2 * k_max + 1))
        for i in range(0, len(t), block):
            est += np.exp(-1j * omega_p * np.outer(ks, t[i : i + block])) @ f[i : i + block]
        est /= T
        if prev is not None and np.max(np.abs(est - prev)) < abs_tol:
            return FourierSeries(omega_p=omega_p, coeffs=est, k_max=k_max)
        prev = est
    raise QuadratureError(
        f"Fourier quadrature did not converge to {abs_tol:g} "
        f"after {max_doublings} panel doublings"
    )


def reconstruct(series: FourierSeries, t):
    """Evaluate the truncated Fourier series sum_k eps_k exp(i k omega_p t).

    The result of a real envelope must be real; a residual imaginary part
    above 1e-6 raises SymmetryError, smaller residuals are discarded.
    """
    t_arr = np.asarray(t, dtype=float)
    flat = t_arr.ravel()
    val = np.empty(flat.shape, dtype=complex)
    block = max(1, 8_000_000 // len(series.coeffs))
    for i in range(0, len(flat), block):
        val[i : i + block] = (
            np.exp(1j * series.omega_p * np.outer(flat[i : i + block], series.ks))
            @ series.coeffs
        )
    val = val.reshape(t_arr.shape)
    imag_max = np.max(np.abs(val.imag)) if val.size else 0.0
    if imag_max > 1e-6:
        raise SymmetryError(f"imaginary residual {imag_max:.3e} exceeds 1e-6")
    out = val.real
    if np.isscalar(t) or np.ndim(t) == 0:
        return float(out)
    return out
