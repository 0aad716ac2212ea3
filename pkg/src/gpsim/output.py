"""Deterministic CSV/JSON emission and parsing.

Floating values are printed with 17 significant digits so that a parse of any
written file reproduces the doubles bit for bit. All files use LF endings and
no locale formatting.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .diagnostics import CSV_COLUMNS, DiagnosticRecord
from .dynamics import HomTrajectory
from .errors import NonMonotoneTime
from .model import FieldState, Grid, Params

_FIELD_HEADER = "x,re_psi,im_psi,abs2_psi,n"
_PHASE_HEADER = "trajectory_id,t,l2_psi,l1_n"
_HOM_HEADER = "t,rho,n,phi"


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def params_hash(p: Params) -> str:
    payload = json.dumps({k: fmt(v) for k, v in p.as_dict().items()}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def write_timeseries(records: list[DiagnosticRecord], path) -> Path:
    """Time-series CSV with one row per record, strictly increasing t."""
    if not records:
        raise ValueError("no records to write")
    for prev, cur in zip(records, records[1:]):
        if cur.t <= prev.t:
            raise NonMonotoneTime(f"records not strictly increasing at t={cur.t!r}")
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in records:
            fh.write(",".join(fmt(v) for v in rec.row()) + "\n")
    return path


def read_timeseries(path) -> list[DiagnosticRecord]:
    records = []
    with open(path, newline="\n") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected header {header!r}")
        for line in fh:
            records.append(DiagnosticRecord.from_row(line.strip().split(",")))
    return records


def write_field_snapshot(state: FieldState, path, p: Params, grid: Grid) -> Path:
    """Nodal field CSV plus a JSON sidecar with time, parameter hash, and grid."""
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(_FIELD_HEADER + "\n")
        abs2 = np.abs(state.psi) ** 2
        for j in range(grid.m):
            fh.write(",".join(fmt(v) for v in (
                grid.nodes[j], state.psi[j].real, state.psi[j].imag, abs2[j], state.n[j],
            )) + "\n")
    sidecar = {
        "t": state.t,
        "params_hash": params_hash(p),
        "params": p.as_dict(),
        "grid": {"m": grid.m, "domain_length": grid.domain_length},
    }
    with open(path.with_suffix(".json"), "w", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_field_snapshot(path) -> FieldState:
    """Rebuild a FieldState from a snapshot CSV (and its sidecar, if present)."""
    path = Path(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    psi = data[:, 1] + 1j * data[:, 2]
    t = 0.0
    sidecar = path.with_suffix(".json")
    if sidecar.exists():
        with open(sidecar) as fh:
            t = float(json.load(fh).get("t", 0.0))
    return FieldState(t=t, psi=psi, n=data[:, 4])


@dataclass(frozen=True)
class PhaseTrack:
    """One curve of the (||psi||_L2, ||n||_L1) plane."""

    trajectory_id: str
    t: np.ndarray
    l2_psi: np.ndarray
    l1_n: np.ndarray


def track_from_records(records: list[DiagnosticRecord], trajectory_id: str) -> PhaseTrack:
    return PhaseTrack(
        trajectory_id=trajectory_id,
        t=np.array([r.t for r in records]),
        l2_psi=np.array([r.l2_psi for r in records]),
        l1_n=np.array([r.l1_n for r in records]),
    )


def track_from_homogeneous(traj: HomTrajectory, domain_length: float,
                           trajectory_id: str) -> PhaseTrack:
    # A homogeneous state maps to (sqrt(rho*|T|), n*|T|).
    return PhaseTrack(
        trajectory_id=trajectory_id,
        t=traj.t.copy(),
        l2_psi=np.sqrt(traj.rho * domain_length),
        l1_n=np.abs(traj.n) * domain_length,
    )


def equilibrium_markers(p: Params) -> dict:
    """Norm-plane images of the equilibria; the condensate branch is listed
    only when it lies in the physical cone (delta >= 0)."""
    markers = {}
    if p.delta >= 0.0:
        rho_star = p.delta / (p.alpha * p.R)
        markers["condensate"] = [math.sqrt(rho_star * p.domain_length),
                                 (p.alpha / p.R) * p.domain_length]
    markers["no_condensate"] = [0.0, (p.P / p.beta) * p.domain_length]
    return markers


def phase_plot_data(tracks: list[PhaseTrack], path, p: Params) -> Path:
    """Long-format norm-plane CSV plus a sidecar with equilibrium markers."""
    if not tracks:
        raise ValueError("need at least one trajectory")
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(_PHASE_HEADER + "\n")
        for tr in tracks:
            for i in range(len(tr.t)):
                fh.write(",".join((tr.trajectory_id, fmt(tr.t[i]),
                                   fmt(tr.l2_psi[i]), fmt(tr.l1_n[i]))) + "\n")
    sidecar = {"markers": equilibrium_markers(p), "params_hash": params_hash(p)}
    with open(path.with_suffix(".json"), "w", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_hom_trajectory(traj: HomTrajectory, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(_HOM_HEADER + "\n")
        for i in range(len(traj)):
            fh.write(",".join(fmt(v) for v in (
                traj.t[i], traj.rho[i], traj.n[i], traj.phi[i])) + "\n")
    return path


def write_json(payload: dict, path) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
