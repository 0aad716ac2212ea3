"""Experiment drivers behind the CLI: each one runs a study, writes delimited
data plus rendered figures into the output directory, and returns the manifest
mapping logical output names to files.

Runs are deterministic for a fixed config and seed. Sweep members may run in
parallel; the GPSIM_THREADS environment variable caps the worker count
(default 1) and has no effect on the emitted bytes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import figures, output
from .config import InitialCondition, RunConfig
from .dynamics import OdeStepperKind, integrate_homogeneous
from .equilibria import (
    beta_dominant_classification,
    condensate_equilibrium,
    zero_condensate_equilibrium,
)
from .errors import ConfigError
from .model import FieldState, Grid, HomState, Params, homogeneous_embed, make_grid
from .solver import (
    SolverConfig,
    StationarySpec,
    adiabatic_evolve,
    epsilon_sweep,
    evolve,
    iterate_states,
    make_stationary,
    perturb,
    reservoir_closure,
)
from .spectral import SpectralWorkspace, l2_norm


def _thread_count() -> int:
    raw = os.environ.get("GPSIM_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parallel_map(fn, items):
    items = list(items)
    workers = min(_thread_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _setup(cfg: RunConfig) -> tuple[Params, Grid, SpectralWorkspace, Path]:
    grid = make_grid(cfg.m, cfg.params.domain_length)
    ws = SpectralWorkspace(grid, dealias=cfg.dealias)
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return cfg.params, grid, ws, out_dir


def build_initial_state(cfg: RunConfig, grid: Grid) -> FieldState:
    ic = cfg.initial
    if ic.kind == "stationary":
        return make_stationary(cfg.params, grid)
    if ic.kind == "perturbed":
        base = make_stationary(cfg.params, grid)
        return perturb(base, ic.mode, ic.amplitude, ic.which, seed=cfg.solver.seed)
    if ic.kind == "homogeneous":
        return homogeneous_embed(HomState(t=0.0, rho=ic.rho0, n=ic.n0, phi=ic.phi0), grid)
    if ic.kind == "file":
        state = output.read_field_snapshot(ic.path)
        if state.psi.shape[0] != grid.m:
            raise ConfigError(
                f"snapshot {ic.path} has {state.psi.shape[0]} nodes, grid expects {grid.m}"
            )
        return state
    raise ConfigError(f"bad initial.kind {ic.kind!r}")


def _write_manifest(out_dir: Path, cfg: RunConfig, outputs: dict) -> dict:
    manifest = {"experiment": cfg.experiment, "config": cfg.to_dict(),
                "outputs": outputs}
    output.write_json(manifest, out_dir / "manifest.json")
    return manifest


def run_simulate(cfg: RunConfig) -> dict:
    p, grid, ws, out_dir = _setup(cfg)
    initial = build_initial_state(cfg, grid)
    output.write_field_snapshot(initial, out_dir / "field_initial.csv", p, grid)
    final, records = evolve(initial, p, cfg.solver, ws)
    output.write_timeseries(records, out_dir / "timeseries.csv")
    output.write_field_snapshot(final, out_dir / "field_final.csv", p, grid)
    track = output.track_from_records(records, "0")
    output.phase_plot_data([track], out_dir / "phase.csv", p)
    figures.save_timeseries_figure(records, out_dir / "timeseries.png")
    figures.save_field_figure(final, grid, out_dir / "field_final.png")
    figures.save_phase_figure([track], output.equilibrium_markers(p), out_dir / "phase.png")
    return _write_manifest(out_dir, cfg, {
        "timeseries": "timeseries.csv",
        "field_initial": "field_initial.csv",
        "field_final": "field_final.csv",
        "phase": "phase.csv",
        "timeseries_figure": "timeseries.png",
        "field_figure": "field_final.png",
        "phase_figure": "phase.png",
    })


def run_adiabatic(cfg: RunConfig) -> dict:
    p, grid, ws, out_dir = _setup(cfg)
    initial = build_initial_state(cfg, grid)
    final, records = adiabatic_evolve(initial, p, cfg.solver, ws)
    output.write_timeseries(records, out_dir / "timeseries.csv")
    output.write_field_snapshot(final, out_dir / "field_final.csv", p, grid)
    figures.save_timeseries_figure(records, out_dir / "timeseries.png")
    figures.save_field_figure(final, grid, out_dir / "field_final.png")
    return _write_manifest(out_dir, cfg, {
        "timeseries": "timeseries.csv",
        "field_final": "field_final.csv",
        "timeseries_figure": "timeseries.png",
        "field_figure": "field_final.png",
    })


def _equilibria_payload(p: Params) -> dict:
    payload = {
        "condensate": condensate_equilibrium(p).as_dict(),
        "no_condensate": zero_condensate_equilibrium(p).as_dict(),
        "delta": p.delta,
    }
    if p.delta > 0.0:
        verdict, disc = beta_dominant_classification(p)
        payload["beta_dominant"] = {
            "classification": verdict.value,
            "discriminant": disc,
        }
    return payload


def run_equilibria(cfg: RunConfig) -> dict:
    p, _, _, out_dir = _setup(cfg)
    output.write_json(_equilibria_payload(p), out_dir / "equilibria.json")
    return _write_manifest(out_dir, cfg, {"equilibria": "equilibria.json"})


def _initial_hom_state(cfg: RunConfig) -> HomState:
    ic = cfg.initial
    if ic.kind == "homogeneous":
        return HomState(t=0.0, rho=ic.rho0, n=ic.n0, phi=ic.phi0)
    if ic.kind == "stationary":
        spec = StationarySpec.from_params(cfg.params)
        return HomState(t=0.0, rho=spec.rho_star, n=spec.n_star, phi=ic.phi0)
    raise ConfigError(f"experiment {cfg.experiment!r} needs initial.kind "
                      f"homogeneous or stationary, got {ic.kind!r}")


def run_ode(cfg: RunConfig) -> dict:
    p, _, _, out_dir = _setup(cfg)
    init = _initial_hom_state(cfg)
    traj = integrate_homogeneous(init, p, cfg.solver.tau, cfg.solver.t_end,
                                 cfg.solver.substepper)
    output.write_hom_trajectory(traj, out_dir / "trajectory.csv")
    track = output.track_from_homogeneous(traj, p.domain_length, "0")
    output.phase_plot_data([track], out_dir / "phase.csv", p)
    output.write_json(_equilibria_payload(p), out_dir / "equilibria.json")
    figures.save_hom_figure(traj, out_dir / "trajectory.png")
    return _write_manifest(out_dir, cfg, {
        "trajectory": "trajectory.csv",
        "phase": "phase.csv",
        "equilibria": "equilibria.json",
        "trajectory_figure": "trajectory.png",
    })


def run_portrait(cfg: RunConfig) -> dict:
    p, _, _, out_dir = _setup(cfg)
    spec = cfg.portrait
    if spec.center_rho is None or spec.center_n is None:
        eq = StationarySpec.from_params(p)
        center = (spec.center_rho if spec.center_rho is not None else eq.rho_star,
                  spec.center_n if spec.center_n is not None else eq.n_star)
    else:
        center = (spec.center_rho, spec.center_n)
    starts = []
    for i in range(spec.count):
        theta = 2.0 * math.pi * i / spec.count
        rho = center[0] + spec.radius * math.cos(theta)
        n = center[1] + spec.radius * math.sin(theta)
        if rho <= 0.0 or n <= 0.0:
            raise ConfigError(
                f"portrait start {i} at (rho={rho:.6g}, n={n:.6g}) leaves the "
                "positive cone; shrink portrait.radius"
            )
        starts.append(HomState(t=0.0, rho=rho, n=n, phi=0.0))

    def one(start: HomState):
        return integrate_homogeneous(start, p, cfg.solver.tau, cfg.solver.t_end,
                                     cfg.solver.substepper)

    trajectories = _parallel_map(one, starts)
    outputs = {"equilibria": "equilibria.json", "phase": "phase.csv",
               "phase_figure": "portrait.png"}
    tracks = []
    for i, traj in enumerate(trajectories):
        name = f"trajectory_{i:03d}.csv"
        output.write_hom_trajectory(traj, out_dir / name)
        outputs[f"trajectory_{i:03d}"] = name
        tracks.append(output.track_from_homogeneous(traj, p.domain_length, str(i)))
    output.phase_plot_data(tracks, out_dir / "phase.csv", p)
    output.write_json(_equilibria_payload(p), out_dir / "equilibria.json")
    figures.save_phase_figure(tracks, output.equilibrium_markers(p), out_dir / "portrait.png")
    return _write_manifest(out_dir, cfg, outputs)


def run_converge_eps(cfg: RunConfig) -> dict:
    p, grid, ws, out_dir = _setup(cfg)
    base = build_initial_state(cfg, grid)
    # The comparison against the reduced model is only clean from
    # closure-consistent reservoir data, so the driver enforces it.
    initial = FieldState(t=base.t, psi=base.psi, n=reservoir_closure(base.psi, p))
    rows = epsilon_sweep(initial, p, cfg.eps_ladder, cfg.solver, ws)
    csv_path = out_dir / "sweep.csv"
    with open(csv_path, "w", newline="\n") as fh:
        fh.write("epsilon,sup_psi_error,closure_mismatch\n")
        for row in rows:
            fh.write(",".join(output.fmt(v) for v in (
                row.epsilon, row.sup_psi_error, row.closure_mismatch_end)) + "\n")
    slope = float(np.polyfit(np.log([r.epsilon for r in rows]),
                             np.log([r.sup_psi_error for r in rows]), 1)[0]) \
        if len(rows) >= 2 and all(r.sup_psi_error > 0 for r in rows) else float("nan")
    output.write_json({
        "epsilon": [r.epsilon for r in rows],
        "sup_psi_error": [r.sup_psi_error for r in rows],
        "closure_mismatch": [r.closure_mismatch_end for r in rows],
        "fitted_slope": slope,
        "initial_reservoir": "closure",
    }, out_dir / "sweep.json")
    figures.save_convergence_figure([r.epsilon for r in rows],
                                    [r.sup_psi_error for r in rows],
                                    slope if math.isfinite(slope) else 1.0,
                                    out_dir / "sweep.png", xlabel="epsilon")
    return _write_manifest(out_dir, cfg, {
        "sweep": "sweep.csv", "sweep_json": "sweep.json", "sweep_figure": "sweep.png",
    })


def _final_state(initial: FieldState, p: Params, solver: SolverConfig,
                 ws: SpectralWorkspace) -> FieldState:
    last = initial
    for last in iterate_states(initial, p, solver, ws):
        pass
    return last


def run_converge_dt(cfg: RunConfig) -> dict:
    p, grid, ws, out_dir = _setup(cfg)
    initial = build_initial_state(cfg, grid)
    T = cfg.dt_t_end
    for tau in cfg.dt_taus:
        steps = T / tau
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise ConfigError(f"convergence.taus entry {tau!r} does not divide t_end={T!r}")
    tau_ref = min(cfg.dt_taus) / cfg.dt_ref_refine

    def final_for(tau: float) -> FieldState:
        solver = replace(cfg.solver, tau=tau, t_end=T, save_every=10**9,
                         assert_bounds=False)
        return _final_state(initial, p, solver, SpectralWorkspace(grid, dealias=cfg.dealias))

    results = _parallel_map(final_for, list(cfg.dt_taus) + [tau_ref])
    ref = results[-1]
    errors = [l2_norm(state.psi - ref.psi, grid) for state in results[:-1]]
    slope = float(np.polyfit(np.log(cfg.dt_taus), np.log(errors), 1)[0])
    output.write_json({
        "taus": list(cfg.dt_taus),
        "errors": errors,
        "fitted_slope": slope,
        "t_end": T,
        "reference_tau": tau_ref,
    }, out_dir / "convergence.json")
    figures.save_convergence_figure(cfg.dt_taus, errors, slope,
                                    out_dir / "convergence.png", xlabel="tau")
    return _write_manifest(out_dir, cfg, {
        "convergence": "convergence.json", "convergence_figure": "convergence.png",
    })


DRIVERS = {
    "simulate": run_simulate,
    "ode": run_ode,
    "portrait": run_portrait,
    "equilibria": run_equilibria,
    "adiabatic": run_adiabatic,
    "converge-eps": run_converge_eps,
    "converge-dt": run_converge_dt,
}
