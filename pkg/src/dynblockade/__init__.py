"""Dynamical photon blockade in a pulsed, weakly nonlinear bosonic mode.

A compact toolkit around three pieces:

* a Lindblad master-equation solver for a single Kerr mode in a truncated
  Fock basis, driven by periodic Gaussian or trapezoidal pulse trains;
* the weak-excitation (two-photon manifold) analytics whose interfering
  excitation paths explain the blockade;
* a seedable particle swarm optimizer that searches the pulse parameters
  for the deepest antibunching, g2_min(t).
"""

from .analytic import (
    integrate_manifold,
    one_photon_amplitude,
    one_photon_weight,
    two_photon_amplitude,
    two_photon_weight,
    weak_excitation_populations,
)
from .fitness import (
    DEFAULT_GAUSSIAN_BOUNDS,
    DEFAULT_RECT_BOUNDS,
    FitnessSpec,
    decode,
    evaluate_g2min,
    sweep,
)
from .fock import (
    IntegrationError,
    SystemParams,
    Trajectory,
    build_operators,
    default_horizon,
    evolve,
    fock_population,
    g2,
    hamiltonian,
    lindblad_rhs,
    mean_photon,
    vacuum_state,
)
from .pso import Bounds, OptimizeResult, PsoConfig, Swarm, init_swarm, optimize, step
from .pulses import (
    FourierSeries,
    GaussianTrain,
    PulseSpec,
    QuadratureError,
    RectTrain,
    SymmetryError,
    envelope,
    fourier_coeffs,
    gaussian_envelope,
    reconstruct,
    rect_envelope,
)

__version__ = "0.1.0"

__all__ = [
    "Bounds",
    "DEFAULT_GAUSSIAN_BOUNDS",
    "DEFAULT_RECT_BOUNDS",
    "FitnessSpec",
    "FourierSeries",
    "GaussianTrain",
    "IntegrationError",
    "OptimizeResult",
    "PsoConfig",
    "PulseSpec",
    "QuadratureError",
    "RectTrain",
    "Swarm",
    "SymmetryError",
    "SystemParams",
    "Trajectory",
    "build_operators",
    "decode",
    "default_horizon",
    "envelope",
    "evaluate_g2min",
    "evolve",
    "fock_population",
    "fourier_coeffs",
    "g2",
    "gaussian_envelope",
    "hamiltonian",
    "init_swarm",
    "integrate_manifold",
    "lindblad_rhs",
    "mean_photon",
    "one_photon_amplitude",
    "one_photon_weight",
    "optimize",
    "reconstruct",
    "rect_envelope",
    "step",
    "sweep",
    "two_photon_amplitude",
    "two_photon_weight",
    "vacuum_state",
    "weak_excitation_populations",
    "__version__",
]
