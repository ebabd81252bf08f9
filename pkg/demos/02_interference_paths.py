"""Why the blockade appears: destructive interference of two-photon paths.

The drive is periodic, so it decomposes into harmonics k with
coefficients eps_k.  A photon pair can be absorbed through any ordered
pair of harmonics (k then k'); each path carries a complex weight.  With
the right pulse parameters the paths cancel almost perfectly and the
two-photon population collapses -- but only if the Kerr shift U displaces
the two-photon resonance.  Switching U off realigns the paths and the
cancellation disappears.

This script compares the analytic two-photon population with and without
the Kerr term, and checks the analytics against the full master equation.

Run:  python3 demos/02_interference_paths.py
"""

import numpy as np

from dynblockade import (
    GaussianTrain,
    SystemParams,
    evolve,
    fourier_coeffs,
    two_photon_amplitude,
    weak_excitation_populations,
)

pulse = GaussianTrain(eps_p=0.1, a_param=5.27, period=5.0)
with_kerr = SystemParams(delta=0.5, u=0.05, gamma=1.0, fock_dim=10)
no_kerr = SystemParams(delta=0.5, u=0.0, gamma=1.0, fock_dim=10)

series = fourier_coeffs(pulse)
t = np.linspace(0.0, pulse.period, 4001)
p2_kerr = np.abs(two_photon_amplitude(t, with_kerr, series)) ** 2
p2_plain = np.abs(two_photon_amplitude(t, no_kerr, series)) ** 2

print("analytic two-photon population over one period:")
print(f"  min P2 with U/gamma = 0.05 : {p2_kerr.min():.3e}")
print(f"  min P2 with U     = 0     : {p2_plain.min():.3e}")
print(f"  suppression factor        : {p2_plain.min() / p2_kerr.min():.0f}x")

print("\ncross-check against the master equation (periodic window):")
tr = evolve(with_kerr, pulse, t_sample_start=25.0)
p1a, p2a = weak_excitation_populations(tr.times, with_kerr, pulse)
gate = tr.p1 > 1e-6
dev = np.max(np.abs(tr.p1[gate] - p1a[gate]) / tr.p1[gate])
print(f"  max relative deviation of P1: {dev:.2%}")
scale = np.max(np.abs(tr.p2 - p2a)) / tr.p2.max()
print(f"  P2 curve deviation (relative to its peak): {scale:.2%}")
print("the perturbative path picture reproduces the full quantum dynamics.")
