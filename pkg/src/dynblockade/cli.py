"""Command line front end: simulate, optimize, sweep, analytic-compare.

Runs are configured by a strict JSON file (unknown keys are rejected), all
quantities in units of gamma = 1.  Every command writes its data artifacts
as CSV plus a run.json carrying the resolved configuration, seed and
package version, so any run can be replayed bit for bit.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import weak_excitation_populations
from .fitness import FitnessSpec, decode, evaluate_g2min, sweep as sweep_fitness
from .fock import IntegrationError, SystemParams, Trajectory, default_horizon, evolve
from .pso import Bounds, PsoConfig, optimize as pso_optimize
from .pulses import GaussianTrain, PulseSpec, RectTrain


class ConfigError(ValueError):
    """Configuration file is malformed; the message names the offender."""


# ---------------------------------------------------------------- config --

_SECTIONS = ("system", "pulse", "sim", "pso", "fitness", "output_dir")
_SYSTEM_KEYS = {"delta": None, "u": None, "gamma": 1.0, "fock_dim": 10}
_SIM_KEYS = {"t_end": None, "dt_out": 0.002, "rtol": 1e-8, "atol": 1e-10}
_PSO_KEYS = {
    "n_particles": 20,
    "n_iters": 50,
    "w": 0.5,
    "f1": 1.5,
    "f2": 1.5,
    "seed": 0,
    "v_max_frac": 0.2,
    "bounds": None,
}
_FITNESS_KEYS = {"window_start_frac": 0.5, "n_floor": 1e-6}
_PULSE_KEYS = {
    "gaussian": ("eps_p", "A", "T"),
    "rect": ("eps_m", "t_r", "t_w", "t_f", "T"),
}


def _reject_unknown(mapping: dict, allowed, where: str) -> None:
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")


def _require(mapping: dict, key: str, where: str):
    if key not in mapping or mapping[key] is None:
        raise ConfigError(f"missing required key {key!r} in {where}")
    return mapping[key]


def _section(cfg: dict, name: str, defaults: dict) -> dict:
    raw = cfg.get(name, {})
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be an object")
    _reject_unknown(raw, defaults, f"section {name!r}")
    out = dict(defaults)
    out.update(raw)
    return out


def load_config(path) -> dict:
    """Parse and validate a run configuration, filling in defaults."""
    try:
        with open(path) as f:
            cfg = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(cfg, _SECTIONS, "config root")

    resolved: dict = {}
    system = _section(cfg, "system", _SYSTEM_KEYS)
    _require(system, "delta", "section 'system'")
    _require(system, "u", "section 'system'")
    resolved["system"] = system

    pulse_raw = cfg.get("pulse")
    if not isinstance(pulse_raw, dict):
        raise ConfigError("section 'pulse' is required and must be an object")
    family = _require(pulse_raw, "type", "section 'pulse'")
    if family not in _PULSE_KEYS:
        raise ConfigError(f"unknown pulse type {family!r}; use 'gaussian' or 'rect'")
    allowed = ("type",) + _PULSE_KEYS[family]
    _reject_unknown(pulse_raw, allowed, "section 'pulse'")
    for key in _PULSE_KEYS[family]:
        _require(pulse_raw, key, "section 'pulse'")
    resolved["pulse"] = dict(pulse_raw)

    resolved["sim"] = _section(cfg, "sim", _SIM_KEYS)
    resolved["pso"] = _section(cfg, "pso", _PSO_KEYS)
    resolved["fitness"] = _section(cfg, "fitness", _FITNESS_KEYS)
    resolved["output_dir"] = cfg.get("output_dir", ".")
    return resolved


def system_from_config(cfg: dict) -> SystemParams:
    s = cfg["system"]
    try:
        return SystemParams(
            delta=float(s["delta"]),
            u=float(s["u"]),
            gamma=float(s["gamma"]),
            fock_dim=int(s["fock_dim"]),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid system parameters: {exc}") from exc


def pulse_from_config(cfg: dict) -> PulseSpec:
    p = cfg["pulse"]
    try:
        if p["type"] == "gaussian":
            return GaussianTrain(
                eps_p=float(p["eps_p"]), a_param=float(p["A"]), period=float(p["T"])
            )
        return RectTrain(
            eps_m=float(p["eps_m"]),
            t_r=float(p["t_r"]),
            t_w=float(p["t_w"]),
            t_f=float(p["t_f"]),
            period=float(p["T"]),
        )
    except ValueError as exc:
        raise ConfigError(f"invalid pulse parameters: {exc}") from exc


def fitness_spec_from_config(cfg: dict, profile: str = "measure") -> FitnessSpec:
    return FitnessSpec(
        pulse_family=cfg["pulse"]["type"],
        u=float(cfg["system"]["u"]),
        gamma=float(cfg["system"]["gamma"]),
        fock_dim=int(cfg["system"]["fock_dim"]),
        window_start_frac=float(cfg["fitness"]["window_start_frac"]),
        n_floor=float(cfg["fitness"]["n_floor"]),
        dt_out=float(cfg["sim"]["dt_out"]),
        rtol=float(cfg["sim"]["rtol"]),
        atol=float(cfg["sim"]["atol"]),
        profile=profile,
    )


def base_vector(cfg: dict) -> np.ndarray:
    """Parameter vector of the configured operating point (for sweeps)."""
    p = cfg["pulse"]
    delta = float(cfg["system"]["delta"])
    if p["type"] == "gaussian":
        return np.array([delta, float(p["eps_p"]), float(p["T"]), float(p["A"])])
    return np.array(
        [
            delta,
            float(p["eps_m"]),
            float(p["t_r"]),
            float(p["t_w"]),
            float(p["t_f"]),
            float(p["T"]),
        ]
    )


# ------------------------------------------------------------- artifacts --

def _fmt(x: float) -> str:
    return "" if (isinstance(x, float) and math.isnan(x)) else repr(float(x))


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in zip(*columns):
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")


def _window_minima(tr: Trajectory, window_start: float) -> dict:
    w = tr.times >= window_start
    n_w, g2_w, t_w = tr.n[w], tr.g2[w], tr.times[w]
    out: dict = {"window_start": window_start}
    i = int(np.argmin(n_w))
    out["n_min"] = float(n_w[i])
    out["t_at_n_min"] = float(t_w[i])
    if np.all(np.isnan(g2_w)):
        out["g2_min"] = None
        out["t_at_g2_min"] = None
    else:
        j = int(np.nanargmin(g2_w))
        out["g2_min"] = float(g2_w[j])
        out["t_at_g2_min"] = float(t_w[j])
    return out


def _maybe_svg(enabled: bool, path: Path, draw) -> list[str]:
    if not enabled:
        return []
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig = draw(plt)
    fig.savefig(path, format="svg")
    plt.close(fig)
    return [path.name]


def _trajectory_svg(tr: Trajectory, path: Path, enabled: bool) -> list[str]:
    def draw(plt):
        fig, axes = plt.subplots(3, 1, sharex=True, figsize=(7, 7))
        axes[0].plot(tr.times, tr.drive)
        axes[0].set_ylabel("drive")
        axes[1].semilogy(tr.times, np.maximum(tr.n, 1e-300))
        axes[1].set_ylabel("n")
        axes[2].semilogy(tr.times, tr.g2)
        axes[2].set_ylabel("g2")
        axes[2].set_xlabel("t [1/gamma]")
        fig.tight_layout()
        return fig

    return _maybe_svg(enabled, path, draw)


# -------------------------------------------------------------- commands --

def _run_record(command: str, cfg: dict, args, started: float, artifacts: list[str]) -> dict:
    return {
        "command": command,
        "version": __version__,
        "config": cfg,
        "seed": int(cfg["pso"]["seed"]),
        "wall_time_s": round(time.perf_counter() - started, 3),
        "artifacts": sorted(artifacts),
        "argv": [str(a) for a in vars(args).get("_argv", [])],
    }


def cmd_simulate(cfg: dict, out: Path, args) -> int:
    started = time.perf_counter()
    p = system_from_config(cfg)
    pulse = pulse_from_config(cfg)
    t_end = cfg["sim"]["t_end"]
    t_end = default_horizon(pulse, p.gamma) if t_end is None else float(t_end)
    tr = evolve(
        p,
        pulse,
        t_end=t_end,
        dt_out=float(cfg["sim"]["dt_out"]),
        rtol=float(cfg["sim"]["rtol"]),
        atol=float(cfg["sim"]["atol"]),
        n_floor=float(cfg["fitness"]["n_floor"]),
    )
    tr.write_csv(out / "trajectory.csv")
    summary = _window_minima(tr, float(cfg["fitness"]["window_start_frac"]) * t_end)
    summary["t_end"] = t_end
    _write_json(out / "summary.json", summary)
    artifacts = ["trajectory.csv", "summary.json"]
    artifacts += _trajectory_svg(tr, out / "trajectory.svg", args.svg)
    _write_json(out / "run.json", _run_record("simulate", cfg, args, started, artifacts))
    print(f"simulate: n_min={summary['n_min']:.4g} g2_min={summary['g2_min']} -> {out}")
    return 0


def cmd_optimize(cfg: dict, out: Path, args) -> int:
    started = time.perf_counter()
    spec = fitness_spec_from_config(cfg, profile="search")
    names = spec.param_names
    bounds_map = spec.default_bounds
    if cfg["pso"]["bounds"] is not None:
        user_bounds = cfg["pso"]["bounds"]
        _reject_unknown(user_bounds, names, "section 'pso.bounds'")
        for key, pair in user_bounds.items():
            if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
                raise ConfigError(f"pso.bounds[{key!r}] must be a [lo, hi] pair")
            bounds_map[key] = (float(pair[0]), float(pair[1]))
    bounds = Bounds(
        lo=np.array([bounds_map[n][0] for n in names]),
        hi=np.array([bounds_map[n][1] for n in names]),
    )
    pso_cfg = PsoConfig(
        n_particles=int(cfg["pso"]["n_particles"]),
        n_iters=int(cfg["pso"]["n_iters"]),
        w=float(cfg["pso"]["w"]),
        f1=float(cfg["pso"]["f1"]),
        f2=float(cfg["pso"]["f2"]),
        seed=int(cfg["pso"]["seed"]),
        v_max_frac=float(cfg["pso"]["v_max_frac"]),
    )
    fitness = partial(evaluate_g2min, spec=spec)
    res = pso_optimize(bounds, pso_cfg, fitness, workers=args.workers)

    _write_csv(
        out / "history.csv",
        ["iter", "best_fit"],
        [np.arange(len(res.history), dtype=float), res.history],
    )
    best = {name: float(val) for name, val in zip(names, res.best_pos)}
    result = {
        "best_params": best,
        "best_fit": float(res.best_fit),
        "n_evals": int(res.n_evals),
        "seed": pso_cfg.seed,
        "version": __version__,
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    _write_json(out / "result.json", result)
    artifacts = ["history.csv", "result.json"]

    # re-simulate the optimum for plot-ready data
    p, pulse = decode(res.best_pos, spec)
    t_end = default_horizon(pulse, p.gamma)
    tr = evolve(
        p,
        pulse,
        t_end=t_end,
        dt_out=spec.dt_out,
        rtol=spec.rtol,
        atol=spec.atol,
        n_floor=spec.n_floor,
    )
    tr.write_csv(out / "trajectory.csv")
    summary = _window_minima(tr, spec.window_start_frac * t_end)
    summary["t_end"] = t_end
    _write_json(out / "summary.json", summary)
    artifacts += ["trajectory.csv", "summary.json"]

    def draw_history(plt):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.semilogy(np.arange(len(res.history)), res.history)
        ax.set_xlabel("iteration")
        ax.set_ylabel("best g2_min")
        fig.tight_layout()
        return fig

    artifacts += _maybe_svg(args.svg, out / "history.svg", draw_history)
    artifacts += _trajectory_svg(tr, out / "trajectory.svg", args.svg)
    _write_json(out / "run.json", _run_record("optimize", cfg, args, started, artifacts))
    print(f"optimize: best_fit={res.best_fit:.4g} best={best} -> {out}")
    return 0


def cmd_sweep(cfg: dict, out: Path, args) -> int:
    started = time.perf_counter()
    spec = fitness_spec_from_config(cfg)
    names = spec.param_names
    if args.param not in names:
        raise ConfigError(
            f"unknown sweep parameter {args.param!r} for family "
            f"{spec.pulse_family!r}; valid names: {', '.join(names)}"
        )
    lo, hi = args.min, args.max
    if lo is None or hi is None:
        user_bounds = cfg["pso"]["bounds"] or {}
        default = dict(spec.default_bounds)
        default.update({k: tuple(v) for k, v in user_bounds.items()})
        lo = default[args.param][0] if lo is None else lo
        hi = default[args.param][1] if hi is None else hi
    if args.points < 1:
        raise ConfigError("--points must be >= 1")
    grid = np.linspace(float(lo), float(hi), args.points)
    rows = sweep_fitness(base_vector(cfg), args.param, grid, spec)
    name = f"sweep_{args.param}.csv"
    _write_csv(out / name, ["param_value", "g2_min"], [rows[:, 0], rows[:, 1]])
    artifacts = [name]

    def draw(plt):
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.semilogy(rows[:, 0], rows[:, 1])
        ax.set_xlabel(args.param)
        ax.set_ylabel("g2_min")
        fig.tight_layout()
        return fig

    artifacts += _maybe_svg(args.svg, out / f"sweep_{args.param}.svg", draw)
    _write_json(out / "run.json", _run_record("sweep", cfg, args, started, artifacts))
    finite = np.isfinite(rows[:, 1])
    print(
        f"sweep {args.param}: {args.points} points, "
        f"min g2_min={rows[finite, 1].min() if finite.any() else float('nan'):.4g} -> {out}"
    )
    return 0


def cmd_analytic_compare(cfg: dict, out: Path, args) -> int:
    started = time.perf_counter()
    p = system_from_config(cfg)
    pulse = pulse_from_config(cfg)
    t_end = cfg["sim"]["t_end"]
    t_end = default_horizon(pulse, p.gamma) if t_end is None else float(t_end)
    window_start = float(cfg["fitness"]["window_start_frac"]) * t_end
    tr = evolve(
        p,
        pulse,
        t_end=t_end,
        dt_out=float(cfg["sim"]["dt_out"]),
        t_sample_start=window_start,
        rtol=float(cfg["sim"]["rtol"]),
        atol=float(cfg["sim"]["atol"]),
        n_floor=float(cfg["fitness"]["n_floor"]),
    )
    weak_ok = True
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        p1a, p2a = weak_excitation_populations(tr.times, p, pulse)
    for warning in caught:
        weak_ok = False
        print(f"warning: {warning.message}", file=sys.stderr)

    _write_csv(
        out / "compare.csv",
        ["t", "P1_num", "P2_num", "P1_ana", "P2_ana"],
        [tr.times, tr.p1, tr.p2, p1a, p2a],
    )
    gate = tr.p1 > 1e-6
    if gate.any():
        dev_p1 = float(np.max(np.abs(tr.p1[gate] - p1a[gate]) / tr.p1[gate]))
        dev_p2 = float(np.max(np.abs(tr.p2[gate] - p2a[gate]) / tr.p2[gate]))
    else:
        dev_p1 = dev_p2 = 0.0
    deviations = {
        "max_rel_dev_P1": dev_p1,
        "max_rel_dev_P2": dev_p2,
        "gate": "P1_num > 1e-6",
        "window": [window_start, t_end],
        "weak_excitation_valid": weak_ok,
    }
    _write_json(out / "deviations.json", deviations)
    artifacts = ["compare.csv", "deviations.json"]

    def draw(plt):
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.semilogy(tr.times, np.maximum(tr.p1, 1e-300), label="P1 numeric")
        ax.semilogy(tr.times, np.maximum(p1a, 1e-300), "--", label="P1 analytic")
        ax.semilogy(tr.times, np.maximum(tr.p2, 1e-300), label="P2 numeric")
        ax.semilogy(tr.times, np.maximum(p2a, 1e-300), "--", label="P2 analytic")
        ax.set_xlabel("t [1/gamma]")
        ax.set_ylabel("population")
        ax.legend()
        fig.tight_layout()
        return fig

    artifacts += _maybe_svg(args.svg, out / "compare.svg", draw)
    _write_json(out / "run.json", _run_record("analytic-compare", cfg, args, started, artifacts))
    print(
        f"analytic-compare: max rel dev P1={dev_p1:.3g} P2={dev_p2:.3g} -> {out}"
    )
    return 0


# ------------------------------------------------------------------ main --

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to the run config JSON")
    common.add_argument("--out", default=None, help="output directory (default: config output_dir)")
    common.add_argument("--seed", type=int, default=None, help="override the PSO seed")
    common.add_argument("--svg", action="store_true", help="also render simple SVG plots")

    parser = argparse.ArgumentParser(
        prog="dynblockade",
        description="Pulsed-drive photon blockade: simulate, optimize, sweep, compare.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common], help="integrate the master equation")

    opt = sub.add_parser("optimize", parents=[common], help="swarm-optimize the pulse parameters")
    opt.add_argument("--workers", type=int, default=1, help="parallel fitness evaluations")

    swp = sub.add_parser("sweep", parents=[common], help="1-d scan of g2_min vs one parameter")
    swp.add_argument("--param", required=True, help="parameter name to sweep")
    swp.add_argument("--min", type=float, default=None, help="low end (default: search bound)")
    swp.add_argument("--max", type=float, default=None, help="high end (default: search bound)")
    swp.add_argument("--points", type=int, default=100, help="number of grid points")

    sub.add_parser(
        "analytic-compare",
        parents=[common],
        help="master equation vs weak-excitation populations",
    )
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "analytic-compare": cmd_analytic_compare,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = _build_parser().parse_args(argv)
    args._argv = argv
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["pso"]["seed"] = int(args.seed)
        out = Path(args.out if args.out is not None else cfg["output_dir"])
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](cfg, out, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"integration error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
