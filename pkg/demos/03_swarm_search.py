"""Particle swarm optimization, from benchmark to blockade search.

First a sanity run on the 3-d sphere function, then a short swarm search
over the Gaussian pulse parameters (Delta, eps_p, T, A) minimizing
g2_min(t).  The full-scale search (20 particles, 50 iterations)
takes a few minutes per seed on one core; this demo runs a reduced budget
by default.

Run:  python3 demos/03_swarm_search.py [--full]
"""

import sys
from functools import partial

import numpy as np

from dynblockade import (
    DEFAULT_GAUSSIAN_BOUNDS,
    Bounds,
    FitnessSpec,
    PsoConfig,
    evaluate_g2min,
    optimize,
)

# benchmark: the swarm must crush the sphere function
box = Bounds(lo=np.full(3, -5.0), hi=np.full(3, 5.0))
res = optimize(box, PsoConfig(seed=1), lambda x: float(np.sum(x * x)))
print(f"sphere benchmark: best {res.best_fit:.2e} after {res.n_evals} evaluations")

# physics: minimize the antibunching depth over the pulse parameters
full = "--full" in sys.argv
cfg = PsoConfig(seed=1) if full else PsoConfig(n_particles=8, n_iters=12, seed=1)
spec = FitnessSpec(pulse_family="gaussian", profile="search")
names = spec.param_names
bounds = Bounds(
    lo=np.array([DEFAULT_GAUSSIAN_BOUNDS[n][0] for n in names]),
    hi=np.array([DEFAULT_GAUSSIAN_BOUNDS[n][1] for n in names]),
)
print(f"\nsearching pulse parameters {names} "
      f"({cfg.n_particles} particles x {cfg.n_iters} iterations)...")
res = optimize(bounds, cfg, partial(evaluate_g2min, spec=spec))
best = dict(zip(names, np.round(res.best_pos, 4)))
print(f"best g2_min = {res.best_fit:.3e} at {best}")
print(f"history (best per iteration): {np.array2string(res.history, precision=3)}")
if not full:
    print("\nrun with --full for the complete 20x50 search budget")
