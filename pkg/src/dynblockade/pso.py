"""Seedable global-best particle swarm optimizer.

Plain synchronous PSO: velocities mix inertia with attraction toward each
particle's best and the swarm's best position,

    V <- w V + f1 r1 (P - X) + f2 r2 (G - X)
    X <- X + V

with r1, r2 fresh uniform draws per particle per dimension.  Velocities
are clamped to a fraction of the box size and positions clamped into the
box (the clamped velocity component is zeroed).  All randomness comes from
one explicitly seeded PCG64 generator consumed in a fixed order (r1 block
then r2 block, particle-major, dimension-minor), so runs are bit-for-bit
reproducible, including when fitness evaluations execute in parallel.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Bounds:
    """Per-dimension search box; lo[j] < hi[j] for every j."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lo and hi must be 1-d arrays of equal length")
        if not np.all(lo < hi):
            raise ValueError("every lower bound must be below its upper bound")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def span(self) -> np.ndarray:
        return self.hi - self.lo


@dataclass(frozen=True)
class PsoConfig:
    """Hyperparameters; the defaults are the settings used throughout."""

    n_particles: int = 20
    n_iters: int = 50
    w: float = 0.5
    f1: float = 1.5
    f2: float = 1.5
    seed: int = 0
    v_max_frac: float = 0.2

    def __post_init__(self):
        if self.n_particles < 1:
            raise ValueError("n_particles must be >= 1")
        if self.n_iters < 0:
            raise ValueError("n_iters must be >= 0")
        if not 0.0 < self.v_max_frac <= 1.0:
            raise ValueError("v_max_frac must be in (0, 1]")


@dataclass
class Swarm:
    positions: np.ndarray
    velocities: np.ndarray
    personal_best_pos: np.ndarray
    personal_best_fit: np.ndarray
    global_best_pos: np.ndarray
    global_best_fit: float
    iter: int
    rng: np.random.Generator
    n_evals: int = 0


@dataclass
class OptimizeResult:
    best_pos: np.ndarray
    best_fit: float
    history: np.ndarray  # best fitness after init and after each iteration
    n_evals: int


def _sanitize(fits) -> np.ndarray:
    """Non-finite fitness values become +inf so they can never win."""
    arr = np.asarray(list(fits), dtype=float)
    return np.where(np.isfinite(arr), arr, np.inf)


def _evaluate(fitness, positions: np.ndarray, pool) -> np.ndarray:
    if pool is None:
        return _sanitize(fitness(x) for x in positions)
    # merged in particle order regardless of completion order
    return _sanitize(pool.map(fitness, positions))


def init_swarm(bounds: Bounds, cfg: PsoConfig, fitness, pool=None) -> Swarm:
    """Uniform random positions, zero velocities, bests from evaluation."""
    rng = np.random.default_rng(cfg.seed)
    positions = rng.uniform(bounds.lo, bounds.hi, size=(cfg.n_particles, bounds.dim))
    velocities = np.zeros_like(positions)
    fits = _evaluate(fitness, positions, pool)
    best = int(np.argmin(fits))
    return Swarm(
        positions=positions,
        velocities=velocities,
        personal_best_pos=positions.copy(),
        personal_best_fit=fits,
        global_best_pos=positions[best].copy(),
        global_best_fit=float(fits[best]),
        iter=0,
        rng=rng,
        n_evals=cfg.n_particles,
    )


def step(swarm: Swarm, bounds: Bounds, cfg: PsoConfig, fitness, pool=None) -> Swarm:
    """Advance the swarm by one synchronous iteration (in place)."""
    shape = swarm.positions.shape
    r1 = swarm.rng.uniform(size=shape)
    r2 = swarm.rng.uniform(size=shape)
    v = (
        cfg.w * swarm.velocities
        + cfg.f1 * r1 * (swarm.personal_best_pos - swarm.positions)
        + cfg.f2 * r2 * (swarm.global_best_pos - swarm.positions)
    )
    v_max = cfg.v_max_frac * bounds.span
    np.clip(v, -v_max, v_max, out=v)
    x = swarm.positions + v
    clamped = (x < bounds.lo) | (x > bounds.hi)
    np.clip(x, bounds.lo, bounds.hi, out=x)
    v[clamped] = 0.0

    fits = _evaluate(fitness, x, pool)
    improved = fits < swarm.personal_best_fit
    swarm.personal_best_pos[improved] = x[improved]
    swarm.personal_best_fit[improved] = fits[improved]
    best = int(np.argmin(swarm.personal_best_fit))
    if swarm.personal_best_fit[best] < swarm.global_best_fit:
        swarm.global_best_fit = float(swarm.personal_best_fit[best])
        swarm.global_best_pos = swarm.personal_best_pos[best].copy()

    swarm.positions = x
    swarm.velocities = v
    swarm.iter += 1
    swarm.n_evals += len(fits)
    return swarm


def optimize(
    bounds: Bounds,
    cfg: PsoConfig,
    fitness,
    workers: int = 1,
) -> OptimizeResult:
    """Run init plus cfg.n_iters steps; lower fitness is better.

    With workers > 1 the per-iteration fitness evaluations run in a process
    pool (fitness must then be picklable); results are merged in particle
    order, so the trajectory is identical to the serial run.
    """
    pool = None
    try:
        if workers > 1:
            pool = ProcessPoolExecutor(max_workers=workers)
        swarm = init_swarm(bounds, cfg, fitness, pool)
        history = [swarm.global_best_fit]
        for _ in range(cfg.n_iters):
            step(swarm, bounds, cfg, fitness, pool)
            history.append(swarm.global_best_fit)
    finally:
        if pool is not None:
            pool.shutdown()
    return OptimizeResult(
        best_pos=swarm.global_best_pos.copy(),
        best_fit=swarm.global_best_fit,
        history=np.asarray(history),
        n_evals=swarm.n_evals,
    )
