"""Matplotlib rendering of the standard report figures, written next to the
CSV data. The Agg backend keeps output deterministic and headless."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import DiagnosticRecord
from .dynamics import HomTrajectory
from .model import FieldState, Grid
from .output import PhaseTrack

_SAVE_KW = {"dpi": 150, "metadata": {"Software": "gpsim"}}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def save_timeseries_figure(records: list[DiagnosticRecord], path) -> Path:
    t = np.array([r.t for r in records])
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), constrained_layout=True)
    axes[0].plot(t, [r.l2_psi for r in records])
    axes[0].set_xlabel("t")
    axes[0].set_ylabel(r"$\|\psi\|_{L^2}$")
    axes[1].plot(t, [r.l1_n for r in records], color="tab:orange")
    axes[1].set_xlabel("t")
    axes[1].set_ylabel(r"$\|n\|_{L^1}$")
    for ax in axes:
        ax.grid(alpha=0.3)
    return _save(fig, path)


def save_field_figure(state: FieldState, grid: Grid, path) -> Path:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), constrained_layout=True)
    axes[0].plot(grid.nodes, np.abs(state.psi) ** 2)
    axes[0].set_xlabel("x")
    axes[0].set_ylabel(r"$|\psi|^2$")
    axes[1].plot(grid.nodes, state.n, color="tab:orange")
    axes[1].set_xlabel("x")
    axes[1].set_ylabel("n")
    fig.suptitle(f"t = {state.t:g}")
    for ax in axes:
        ax.grid(alpha=0.3)
    return _save(fig, path)


def save_phase_figure(tracks: list[PhaseTrack], markers: dict, path) -> Path:
    fig, ax = plt.subplots(figsize=(5.5, 4.5), constrained_layout=True)
    for tr in tracks:
        ax.plot(tr.l2_psi, tr.l1_n, lw=0.9)
        ax.plot(tr.l2_psi[0], tr.l1_n[0], "o", ms=4, mfc="none", color="k")
    for name, (x, y) in markers.items():
        marker = "^" if name == "condensate" else "s"
        ax.plot(x, y, marker, ms=8, color="crimson", label=name)
    ax.set_xlabel(r"$\|\psi\|_{L^2}$")
    ax.set_ylabel(r"$\|n\|_{L^1}$")
    ax.grid(alpha=0.3)
    if markers:
        ax.legend(loc="best", fontsize=8)
    return _save(fig, path)


def save_hom_figure(traj: HomTrajectory, path) -> Path:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), constrained_layout=True)
    axes[0].plot(traj.t, traj.rho, label=r"$\rho$")
    axes[0].plot(traj.t, traj.n, label="n")
    axes[0].set_xlabel("t")
    axes[0].legend()
    axes[1].plot(traj.rho, traj.n, lw=0.9)
    axes[1].plot(traj.rho[0], traj.n[0], "o", ms=4, mfc="none", color="k")
    axes[1].set_xlabel(r"$\rho$")
    axes[1].set_ylabel("n")
    for ax in axes:
        ax.grid(alpha=0.3)
    return _save(fig, path)


def save_convergence_figure(xs, errors, slope: float, path, xlabel: str) -> Path:
    xs = np.asarray(xs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4), constrained_layout=True)
    ax.loglog(xs, errors, "o-", label=f"measured (slope {slope:.2f})")
    anchor = errors[-1] * (xs / xs[-1]) ** slope
    ax.loglog(xs, anchor, "--", color="gray", label="fit")
    ax.set_xlabel(xlabel)
    ax.set_ylabel("error")
    ax.grid(alpha=0.3, which="both")
    ax.legend(fontsize=8)
    return _save(fig, path)
