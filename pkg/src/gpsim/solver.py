"""Strang-splitting time steppers for the full system and its adiabatic
reduction, stationary-state construction, perturbation generators, and the
relaxation-parameter sweep.

One step of size tau composes a half-step of the nodewise
nonlinear/dissipative substep, the exact Fourier free-propagation step, and a
second nonlinear half-step. The substep order (nonlinear, kinetic, nonlinear)
keeps the final reservoir consistent with the final condensate update; the
composition is symmetric, so the scheme is second order either way. The
kinetic step leaves n untouched (it carries no reservoir dynamics).

Explicit substeppers make the reservoir relaxation rate (R|psi|^2+beta)/eps
a stiffness constraint; steps are refused unless
tau <= eps * tau_safety / (R*max|psi|^2 + beta).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from . import diagnostics
from .diagnostics import DiagnosticRecord
from .dynamics import (
    OdeStepperKind,
    ode_step,
    rhs_adiabatic_nonlinear,
    rhs_split_nonlinear,
)
from .errors import (
    BoundViolation,
    DeltaNonpositive,
    LengthMismatch,
    PerturbationBreaksPositivity,
    PositivityLost,
    StepSizeTooLarge,
)
from .model import FieldState, Grid, Params
from .spectral import SpectralWorkspace, kinetic_step


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping controls shared by both solvers."""

    tau: float
    t_end: float
    substepper: OdeStepperKind = OdeStepperKind.RK4
    save_every: int = 1
    assert_bounds: bool = False
    seed: int = 0
    tau_safety: float = 0.5

    def __post_init__(self):
        if not (self.tau > 0.0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive and finite, got {self.tau!r}")
        if self.t_end < 0.0:
            raise ValueError(f"t_end must be >= 0, got {self.t_end!r}")
        if self.save_every < 1:
            raise ValueError(f"save_every must be >= 1, got {self.save_every!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.tau))


@dataclass(frozen=True)
class StationarySpec:
    """Constant-modulus stationary state data for delta > 0.

    rho_star = delta/(alpha R) and n_star = alpha/R = P/(R rho_star + beta);
    the wave function rotates as e^{-i mu t} with chemical potential
    mu = g rho_star + lam n_star > 0.
    """

    rho_star: float
    n_star: float
    mu: float

    @classmethod
    def from_params(cls, p: Params) -> "StationarySpec":
        if p.delta <= 0.0:
            raise DeltaNonpositive(
                f"stationary state requires P*R - alpha*beta > 0, got delta={p.delta!r}"
            )
        rho_star = p.delta / (p.alpha * p.R)
        n_star = p.alpha / p.R
        return cls(rho_star=rho_star, n_star=n_star, mu=p.g * rho_star + p.lam * n_star)


def make_stationary(p: Params, grid: Grid) -> FieldState:
    """Constant stationary state psi = sqrt(rho_star), n = n_star at t = 0."""
    spec = StationarySpec.from_params(p)
    psi = np.full(grid.m, math.sqrt(spec.rho_star), dtype=np.complex128)
    n = np.full(grid.m, spec.n_star)
    return FieldState(t=0.0, psi=psi, n=n)


def reservoir_closure(psi: np.ndarray, p: Params) -> np.ndarray:
    """Adiabatic reservoir profile n = P / (beta + R |psi|^2)."""
    return p.P / (p.beta + p.R * np.abs(psi) ** 2)


def perturb(state: FieldState, mode: int, amplitude: float,
            which: str = "psi", seed: int = 0) -> FieldState:
    """Add a cosine (mode >= 0) or seeded band-limited noise (mode < 0) bump.

    ``which`` selects the field: "psi", "n", or "both". The amplitude applies
    to the chosen field(s) directly; a perturbation that would push n to <= 0
    anywhere is refused rather than clamped.
    """
    if which not in ("psi", "n", "both"):
        raise ValueError(f"which must be psi, n, or both, got {which!r}")
    if not math.isfinite(amplitude):
        raise ValueError(f"amplitude must be finite, got {amplitude!r}")
    m = state.psi.shape[0]
    if abs(mode) >= m // 2:
        raise ValueError(f"|mode| must be < m/2 = {m // 2}, got {mode}")
    x = np.arange(m) / m  # x / |T|
    if mode >= 0:
        bump = amplitude * np.cos(2.0 * math.pi * mode * x)
    else:
        rng = np.random.default_rng(seed)
        bump = np.zeros(m)
        for j in range(1, -mode + 1):
            a, b = rng.standard_normal(2)
            bump += a * np.cos(2.0 * math.pi * j * x) + b * np.sin(2.0 * math.pi * j * x)
        peak = np.max(np.abs(bump))
        if peak > 0.0:
            bump *= amplitude / peak
    psi = state.psi.copy()
    n = state.n.copy()
    if which in ("psi", "both"):
        psi = psi + bump
    if which in ("n", "both"):
        n = n + bump
        if np.min(n) <= 0.0:
            raise PerturbationBreaksPositivity(
                f"perturbation drives min(n) to {np.min(n):.6g} <= 0"
            )
    return FieldState(t=state.t, psi=psi, n=n)


def _check_tau_cap(state_density_max: float, p: Params, cfg: SolverConfig) -> None:
    cap = p.epsilon * cfg.tau_safety / (p.R * state_density_max + p.beta)
    if cfg.tau > cap:
        raise StepSizeTooLarge(
            f"tau={cfg.tau:.3g} exceeds the stiffness cap {cap:.3g} "
            f"(= eps*tau_safety/(R*max|psi|^2+beta)); reduce tau or raise tau_safety"
        )


def strang_step(state: FieldState, p: Params, cfg: SolverConfig,
                ws: SpectralWorkspace) -> FieldState:
    """Advance the full system by one step of size cfg.tau."""
    if state.psi.shape[0] != ws.grid.m:
        raise LengthMismatch(
            f"state length {state.psi.shape[0]} != grid.m {ws.grid.m}"
        )
    psi, n = _strang_step_arrays(state.psi, state.n, p, cfg, ws)
    return FieldState(t=state.t + cfg.tau, psi=psi, n=n)


def _strang_step_arrays(psi: np.ndarray, n: np.ndarray, p: Params,
                        cfg: SolverConfig, ws: SpectralWorkspace):
    density_max = float(np.max(np.abs(psi) ** 2))
    _check_tau_cap(density_max, p, cfg)
    half = 0.5 * cfg.tau

    def rhs(y):
        dpsi, dn = rhs_split_nonlinear(y[0], y[1], p)
        return np.stack([dpsi, dn])

    # n rides along as a complex row with exactly zero imaginary part.
    y = np.stack([psi, n.astype(np.complex128)])
    y = ode_step(y, rhs, half, cfg.substepper)
    y[0] = kinetic_step(y[0], cfg.tau, ws)
    y = ode_step(y, rhs, half, cfg.substepper)
    psi_out, n_out = y[0], y[1].real
    if np.min(n_out) <= 0.0:
        raise PositivityLost(
            f"reservoir positivity lost (min n = {np.min(n_out):.6g}); reduce tau"
        )
    return psi_out, n_out


def iterate_states(initial: FieldState, p: Params, cfg: SolverConfig,
                   ws: SpectralWorkspace) -> Iterator[FieldState]:
    """Yield the initial state and then every cfg.save_every-th step (the
    final step always included)."""
    if initial.psi.shape[0] != ws.grid.m:
        raise ValueError(f"state length {initial.psi.shape[0]} != grid.m {ws.grid.m}")
    if np.min(initial.n) <= 0.0:
        raise PositivityLost(f"initial reservoir must be positive, min n = {np.min(initial.n):.6g}")
    yield initial
    psi, n = initial.psi, initial.n
    t0 = initial.t
    for k in range(1, cfg.n_steps + 1):
        psi, n = _strang_step_arrays(psi, n, p, cfg, ws)
        if k % cfg.save_every == 0 or k == cfg.n_steps:
            yield FieldState(t=t0 + k * cfg.tau, psi=psi, n=n)


def _bound_flags_full(rec: DiagnosticRecord, state: FieldState, baseline, p: Params) -> dict:
    t0, mass0, n0_sq, scales = baseline
    dt = rec.t - t0
    envelope = diagnostics.reservoir_envelope_sq(dt, n0_sq, p)
    return {
        diagnostics.MASS_ENVELOPE: rec.mass_total
        <= diagnostics.mass_envelope(dt, mass0, p) + scales["mass"],
        diagnostics.RESERVOIR_ENVELOPE: bool(
            np.all(state.n**2 <= envelope + scales["reservoir"])
        ),
        diagnostics.POSITIVITY: rec.min_n > 0.0,
    }


def evolve(initial: FieldState, p: Params, cfg: SolverConfig,
           ws: SpectralWorkspace) -> tuple[FieldState, list[DiagnosticRecord]]:
    """Run the full solver, sampling diagnostics every cfg.save_every steps.

    With cfg.assert_bounds set, the mass envelope, the pointwise reservoir
    envelope, and reservoir positivity are verified at every saved step; the
    run aborts with BoundViolation naming the failed check.
    """
    grid = ws.grid
    records: list[DiagnosticRecord] = []
    final = initial
    baseline = None
    for state in iterate_states(initial, p, cfg, ws):
        rec = diagnostics.collect(state, p, grid, ws)
        if baseline is None:
            baseline = (state.t, rec.mass_total, state.n**2, {
                "mass": 1e-8 * abs(rec.mass_total),
                "reservoir": 1e-8 * max(rec.linf_n**2, (p.P / p.beta) ** 2),
            })
        flags = _bound_flags_full(rec, state, baseline, p)
        rec.bound_flags.update(flags)
        rec.bound_flags["pointwise_reservoir"] = flags[diagnostics.RESERVOIR_ENVELOPE]
        records.append(rec)
        final = state
        if cfg.assert_bounds:
            for name, ok in flags.items():
                if not ok:
                    raise BoundViolation(name, state.t)
    return final, records


# --- adiabatic (reduced) solver ----------------------------------------------

def adiabatic_step(psi: np.ndarray, p: Params, cfg: SolverConfig,
                   ws: SpectralWorkspace) -> np.ndarray:
    """One Strang step of the reduced model (reservoir closed algebraically)."""
    half = 0.5 * cfg.tau
    rhs = lambda y: rhs_adiabatic_nonlinear(y, p)
    psi = ode_step(np.asarray(psi, dtype=np.complex128), rhs, half, cfg.substepper)
    psi = kinetic_step(psi, cfg.tau, ws)
    return ode_step(psi, rhs, half, cfg.substepper)


def iterate_adiabatic(psi0: np.ndarray, p: Params, cfg: SolverConfig,
                      ws: SpectralWorkspace, t0: float = 0.0) -> Iterator[FieldState]:
    """Yield reduced-model states (with the reservoir reconstructed from the
    closure) at the same cadence as :func:`iterate_states`."""
    psi = np.asarray(psi0, dtype=np.complex128)
    if psi.shape[0] != ws.grid.m:
        raise ValueError(f"psi length {psi.shape[0]} != grid.m {ws.grid.m}")
    yield FieldState(t=t0, psi=psi, n=reservoir_closure(psi, p))
    for k in range(1, cfg.n_steps + 1):
        psi = adiabatic_step(psi, p, cfg, ws)
        if k % cfg.save_every == 0 or k == cfg.n_steps:
            yield FieldState(t=t0 + k * cfg.tau, psi=psi, n=reservoir_closure(psi, p))


def adiabatic_evolve(initial, p: Params, cfg: SolverConfig,
                     ws: SpectralWorkspace) -> tuple[FieldState, list[DiagnosticRecord]]:
    """Run the reduced solver. ``initial`` may be a FieldState (its psi and t
    are used) or a bare complex array at t = 0."""
    if isinstance(initial, FieldState):
        psi0, t0 = initial.psi, initial.t
    else:
        psi0, t0 = initial, 0.0
    grid = ws.grid
    records: list[DiagnosticRecord] = []
    final = None
    baseline = None
    for state in iterate_adiabatic(psi0, p, cfg, ws, t0=t0):
        rec = diagnostics.collect(state, p, grid, ws)
        if baseline is None:
            baseline = (state.t, rec.l2_psi**2,
                        1e-8 * max(rec.l2_psi**2, p.P * p.domain_length / p.alpha))
        t_base, l2_sq_0, tol = baseline
        flags = {
            diagnostics.L2_ENVELOPE: rec.l2_psi**2
            <= diagnostics.l2_envelope_sq(state.t - t_base, l2_sq_0, p) + tol,
            diagnostics.POSITIVITY: rec.min_n > 0.0,
        }
        rec.bound_flags.update(flags)
        records.append(rec)
        final = state
        if cfg.assert_bounds:
            for name, ok in flags.items():
                if not ok:
                    raise BoundViolation(name, state.t)
    return final, records


# --- relaxation-parameter sweep ----------------------------------------------

@dataclass(frozen=True)
class EpsilonSweepRow:
    """One ladder entry: sup-norm gap to the reduced model over the sampled
    times and the reservoir-closure mismatch at the final time."""

    epsilon: float
    sup_psi_error: float
    closure_mismatch_end: float
    closure_consistent: bool


def epsilon_sweep(initial: FieldState, p: Params, eps_ladder, cfg: SolverConfig,
                  ws: SpectralWorkspace) -> list[EpsilonSweepRow]:
    """Compare full runs at each relaxation parameter against the reduced model.

    The comparison is clean only for closure-consistent initial data
    (n_0 = P/(beta + R|psi_0|^2)); other data still runs but every row is
    tagged inconsistent and a warning is emitted, because the reduced model
    forgets the initial reservoir.
    """
    grid = ws.grid
    closure0 = reservoir_closure(initial.psi, p)
    mismatch0 = float(np.max(np.abs(initial.n - closure0)))
    consistent = mismatch0 <= 1e-10 * max(1.0, float(np.max(closure0)))
    if not consistent:
        warnings.warn(
            "initial reservoir does not match the adiabatic closure "
            f"(sup gap {mismatch0:.3g}); sweep rows are tagged inconsistent",
            stacklevel=2,
        )
    reduced = [s.psi for s in iterate_adiabatic(initial.psi, p, cfg, ws, t0=initial.t)]
    rows = []
    for eps in eps_ladder:
        p_eps = replace(p, epsilon=float(eps))
        sup_err = 0.0
        last = initial
        for i, state in enumerate(iterate_states(initial, p_eps, cfg, ws)):
            sup_err = max(sup_err, float(np.max(np.abs(state.psi - reduced[i]))))
            last = state
        gap = last.n - reservoir_closure(last.psi, p_eps)
        mismatch_end = float(np.sqrt(grid.h * np.sum(gap**2)))
        rows.append(EpsilonSweepRow(epsilon=float(eps), sup_psi_error=sup_err,
                                    closure_mismatch_end=mismatch_end,
                                    closure_consistent=consistent))
    return rows
