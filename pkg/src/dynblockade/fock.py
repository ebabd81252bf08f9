"""Truncated Fock-space algebra and Lindblad time evolution.

A single bosonic mode with Kerr nonlinearity, driven by a pulsed coherent
field, decaying at rate gamma:

    H(t) = delta * n + u * adag*adag*a*a + eps(t) * (adag + a)
    drho/dt = -i [H, rho] + gamma/2 * (2 a rho adag - n rho - rho n)

Everything works on dense complex matrices in the number basis
|0> ... |fock_dim-1>; the density matrix is propagated as a flattened
vector through one static and one drive-proportional superoperator.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp

from .pulses import GaussianTrain, PulseSpec, envelope, gaussian_envelope, rect_envelope

HERMITICITY_TOL = 1e-8
TRACE_TOL = 1e-6
POSITIVITY_TOL = 1e-8
DEFAULT_N_FLOOR = 1e-6


class IntegrationError(RuntimeError):
    """Master-equation integration failed or produced an invalid state."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message if t is None else f"{message} (at t = {t:.6g})")
        self.t = t


@dataclass(frozen=True)
class SystemParams:
    """Physical constants of the mode, in units of the decay rate.

    delta and u are quoted in units of gamma; gamma itself defaults to 1
    and sets the time unit.  fock_dim >= 3 so that two-photon statistics
    are representable.
    """

    delta: float
    u: float
    gamma: float = 1.0
    fock_dim: int = 10

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be strictly positive")
        if self.fock_dim < 3:
            raise ValueError("fock_dim must be at least 3")


@lru_cache(maxsize=None)
def build_operators(fock_dim: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Annihilation, creation and number operators in a truncated Fock basis.

    annihilation[n-1, n] = sqrt(n); creation is its conjugate transpose;
    number = creation @ annihilation = diag(0, 1, ..., fock_dim-1).
    """
    if fock_dim < 2:
        raise ValueError("fock_dim must be at least 2")
    a = np.zeros((fock_dim, fock_dim), dtype=complex)
    ns = np.arange(1, fock_dim)
    a[ns - 1, ns] = np.sqrt(ns)
    adag = a.conj().T
    number = adag @ a
    for op in (a, adag, number):
        op.setflags(write=False)
    return a, adag, number


def hamiltonian(p: SystemParams, eps: float) -> np.ndarray:
    """Rotating-frame Hamiltonian delta*n + u*n(n-1) + eps*(adag + a)."""
    if not math.isfinite(eps):
        raise ValueError("drive amplitude must be finite")
    a, adag, number = build_operators(p.fock_dim)
    ns = np.arange(p.fock_dim)
    h = np.diag(p.delta * ns + p.u * ns * (ns - 1.0)).astype(complex)
    h += eps * (adag + a)
    return h


def lindblad_rhs(rho: np.ndarray, h: np.ndarray, gamma: float) -> np.ndarray:
    """Right-hand side -i[H, rho] + gamma/2 (2 a rho adag - n rho - rho n)."""
    rho = np.asarray(rho, dtype=complex)
    h = np.asarray(h, dtype=complex)
    if rho.shape != h.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"shape mismatch: rho {rho.shape} vs h {h.shape}")
    a, adag, number = build_operators(rho.shape[0])
    out = -1j * (h @ rho - rho @ h)
    out += 0.5 * gamma * (2.0 * (a @ rho @ adag) - number @ rho - rho @ number)
    return out


def mean_photon(rho: np.ndarray) -> float:
    """Tr(rho n); tiny negative round-off (> -1e-12) is clamped to zero."""
    val = float(np.real(np.trace(rho @ build_operators(rho.shape[0])[2])))
    if -1e-12 < val < 0.0:
        return 0.0
    return val


def g2(rho: np.ndarray, n_floor: float = DEFAULT_N_FLOOR) -> float:
    """Equal-time second-order correlation Tr(rho adag adag a a) / Tr(rho n)^2.

    Returns NaN (the undefined marker) when the mean photon number is
    below n_floor, instead of dividing by ~0.
    """
    if n_floor <= 0:
        raise ValueError("n_floor must be positive")
    n = mean_photon(rho)
    if n < n_floor:
        return math.nan
    ks = np.arange(rho.shape[0])
    num = float(np.real(np.diag(rho)) @ (ks * (ks - 1.0)))
    return num / n**2


def fock_population(rho: np.ndarray, k: int) -> float:
    """Occupation probability of Fock state |k> (real part of rho[k, k])."""
    if not 0 <= k < rho.shape[0]:
        raise IndexError(f"Fock index {k} outside 0..{rho.shape[0] - 1}")
    return float(np.real(rho[k, k]))


def vacuum_state(fock_dim: int) -> np.ndarray:
    rho = np.zeros((fock_dim, fock_dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def default_horizon(pulse: PulseSpec, gamma: float = 1.0) -> float:
    """Default total simulated time: max(10 periods, 30/gamma)."""
    return max(10.0 * pulse.period, 30.0 / gamma)


@dataclass
class Trajectory:
    """Time-sampled observables of one master-equation run.

    g2 carries NaN where the mean photon number was below the floor used
    during the run; states is the (nt, dim, dim) stack of density matrices
    when they were requested.
    """

    times: np.ndarray
    drive: np.ndarray
    n: np.ndarray
    g2: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    states: np.ndarray | None = None

    def write_csv(self, path) -> None:
        """Write columns t,eps,n,g2,P0,P1,P2; undefined g2 as empty field."""
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["t", "eps", "n", "g2", "P0", "P1", "P2"])
            for i in range(len(self.times)):
                g2v = "" if math.isnan(self.g2[i]) else repr(float(self.g2[i]))
                w.writerow(
                    [
                        repr(float(self.times[i])),
                        repr(float(self.drive[i])),
                        repr(float(self.n[i])),
                        g2v,
                        repr(float(self.p0[i])),
                        repr(float(self.p1[i])),
                        repr(float(self.p2[i])),
                    ]
                )


def default_max_step(
    pulse: PulseSpec,
    gamma: float = 1.0,
    *,
    feature_frac: float = 0.5,
    quiet_cap: float = 0.05,
) -> float:
    """Step bound for integrating under a given pulse train.

    Two concerns: steps must stay below the envelope features (so nothing
    is hopped over), and they must stay small in absolute terms even in
    quiet stretches, where the error norm is atol-dominated and tiny
    populations would otherwise lose all relative accuracy.  quiet_cap
    (units 1/gamma) sets that absolute bound; fitness searches relax it.
    """
    if isinstance(pulse, GaussianTrain):
        width = feature_frac / (pulse.a_param * gamma)
    else:
        features = [pulse.t_r, pulse.t_f]
        if pulse.t_w > 0:
            features.append(pulse.t_w)
        width = feature_frac * min(features)
    return float(np.clip(width, 5e-4, min(0.25 * pulse.period, quiet_cap / gamma)))


def _liouvillians(p: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Static and drive-proportional superoperators on row-major vec(rho)."""
    a, adag, number = build_operators(p.fock_dim)
    dim = p.fock_dim
    eye = np.eye(dim)
    ns = np.arange(dim)
    h0 = np.diag(p.delta * ns + p.u * ns * (ns - 1.0)).astype(complex)
    hd = (adag + a).astype(complex)
    # vec(A rho B) = kron(A, B.T) vec(rho) for row-major flattening
    l0 = -1j * (np.kron(h0, eye) - np.kron(eye, h0.T))
    l0 += 0.5 * p.gamma * (
        2.0 * np.kron(a, np.conj(a)) - np.kron(number, eye) - np.kron(eye, number.T)
    )
    l1 = -1j * (np.kron(hd, eye) - np.kron(eye, hd.T))
    return l0, l1


def _batch_cholesky_psd(mats: np.ndarray) -> np.ndarray:
    """Boolean mask of stack members that are positive definite.

    A hand-rolled Cholesky vectorized over the stack axis: tiny matrices in
    very long stacks are far cheaper this way than through the LAPACK
    gufunc.  Entries of failed members turn NaN and are simply carried
    along; only the success mask is returned.
    """
    nt, dim, _ = mats.shape
    low = np.zeros_like(mats)
    ok = np.ones(nt, dtype=bool)
    with np.errstate(invalid="ignore", divide="ignore"):
        for j in range(dim):
            d = mats[:, j, j].real - np.einsum(
                "tk,tk->t", low[:, j, :j], np.conj(low[:, j, :j])
            ).real
            ok &= d > 0.0
            root = np.sqrt(np.where(d > 0.0, d, np.nan))
            low[:, j, j] = root
            if j + 1 < dim:
                num = mats[:, j + 1 :, j] - np.einsum(
                    "tmk,tk->tm", low[:, j + 1 :, :j], np.conj(low[:, j, :j])
                )
                low[:, j + 1 :, j] = num / root[:, None]
    return ok


def _validate_states(rhos: np.ndarray, times: np.ndarray) -> None:
    finite = np.isfinite(rhos).all(axis=(1, 2))
    bad = np.nonzero(~finite)[0]
    if bad.size:
        raise IntegrationError("non-finite state", t=float(times[bad[0]]))
    dag = np.conj(np.swapaxes(rhos, 1, 2))
    herm = np.max(np.abs(rhos - dag), axis=(1, 2))
    bad = np.nonzero(herm >= HERMITICITY_TOL)[0]
    if bad.size:
        raise IntegrationError(
            f"Hermiticity violated: max |rho - rho^dag| = {herm[bad[0]]:.3e}",
            t=float(times[bad[0]]),
        )
    tr = np.abs(np.einsum("tii->t", rhos).real - 1.0)
    bad = np.nonzero(tr >= TRACE_TOL)[0]
    if bad.size:
        raise IntegrationError(
            f"trace violated: |Tr rho - 1| = {tr[bad[0]]:.3e}", t=float(times[bad[0]])
        )
    # positivity screen: rho + tol*I positive definite iff all eigenvalues
    # exceed -tol; eigvalsh only runs on flagged samples
    sym = 0.5 * (rhos + dag)
    sym[:, np.arange(rhos.shape[1]), np.arange(rhos.shape[1])] += POSITIVITY_TOL
    ok = _batch_cholesky_psd(sym)
    if not ok.all():
        sym[:, np.arange(rhos.shape[1]), np.arange(rhos.shape[1])] -= POSITIVITY_TOL
        flagged = np.nonzero(~ok)[0]
        mins = np.linalg.eigvalsh(sym[flagged])[:, 0]
        i = int(np.argmin(mins))
        if mins[i] <= -POSITIVITY_TOL:
            raise IntegrationError(
                f"positivity violated: min eigenvalue = {mins[i]:.3e}",
                t=float(times[flagged[i]]),
            )


def evolve(
    p: SystemParams,
    pulse: PulseSpec,
    t_end: float | None = None,
    dt_out: float = 0.002,
    *,
    t_sample_start: float = 0.0,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    method: str = "DOP853",
    max_step: float | None = None,
    n_floor: float = DEFAULT_N_FLOOR,
    store_states: bool = False,
    validate: bool = True,
) -> Trajectory:
    """Integrate the master equation from vacuum under a pulsed drive.

    The time-dependent Hamiltonian is evaluated exactly at integrator stage
    times (no zero-order hold); observables are sampled on the uniform grid
    dt_out up to t_end (default max(10*period, 30/gamma)).  Integration
    always starts from vacuum at t = 0, but sampling can be restricted to
    t >= t_sample_start, which skips the dense-output work for the
    transient.  State invariants (Hermiticity, unit trace, positivity) are
    asserted at every output sample unless validate=False.
    """
    if t_end is None:
        t_end = default_horizon(pulse, p.gamma)
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if dt_out <= 0:
        raise ValueError("dt_out must be positive")
    if not 0.0 <= t_sample_start < t_end:
        raise ValueError("t_sample_start must lie in [0, t_end)")
    if max_step is None:
        max_step = default_max_step(pulse, p.gamma)

    i_first = int(math.ceil(t_sample_start / dt_out - 1e-9))
    n_out = int(math.floor(t_end / dt_out + 1e-9))
    if i_first > n_out:
        raise ValueError("no output samples between t_sample_start and t_end")
    times = np.arange(i_first, n_out + 1) * dt_out

    l0, l1 = _liouvillians(p)
    gamma = p.gamma
    if isinstance(pulse, GaussianTrain):
        def eps_of(t: float) -> float:
            return gaussian_envelope(pulse, t, gamma)
    else:
        def eps_of(t: float) -> float:
            return rect_envelope(pulse, t, gamma)

    def rhs(t, y):
        return l0 @ y + eps_of(t) * (l1 @ y)

    y0 = vacuum_state(p.fock_dim).ravel()
    sol = solve_ivp(
        rhs,
        (0.0, times[-1]),
        y0,
        method=method,
        t_eval=times,
        rtol=rtol,
        atol=atol,
        max_step=max_step,
    )
    if not sol.success:
        reached = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(f"integrator failed: {sol.message}", t=reached)

    rhos = sol.y.T.reshape(len(times), p.fock_dim, p.fock_dim)
    if validate:
        _validate_states(rhos, times)

    diag = np.einsum("tii->ti", rhos).real
    ks = np.arange(p.fock_dim)
    n = diag @ ks
    n = np.where((n > -1e-12) & (n < 0.0), 0.0, n)
    g2num = diag @ (ks * (ks - 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        g2v = np.where(n >= n_floor, g2num / np.maximum(n, n_floor) ** 2, np.nan)
    drive = np.asarray(envelope(pulse, times, gamma), dtype=float)

    return Trajectory(
        times=times,
        drive=drive,
        n=n,
        g2=g2v,
        p0=diag[:, 0],
        p1=diag[:, 1],
        p2=diag[:, 2],
        states=rhos if store_states else None,
    )
