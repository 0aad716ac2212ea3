"""Pointwise and homogeneous ODE right-hand sides, explicit steppers, and the
homogeneous-trajectory integrator.

For x-independent data the field equations collapse to

    drho/dt = (R*n - alpha) * rho
    dn/dt   = P - (R*rho + beta) * n

(with the reservoir relaxation parameter equal to 1), and the condensate
phase follows a-posteriori from phi(t) = phi_0 - int_0^t (g*rho + lam*n).
The splitting scheme's local substep keeps the full nonlinearity

    dpsi/dt = -i(g|psi|^2 + lam*n) psi + 1/2 (R*n - alpha) psi
    dn/dt   = (P - (R|psi|^2 + beta) n) / eps

applied node by node, and the reduced (adiabatic) model closes the reservoir
as n = P/(beta + R*rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterator

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .errors import NonFiniteState, OrbitSingularity, PositivityLost
from .model import HomState, Params


class OdeStepperKind(Enum):
    """Explicit one-step integrators: classical order-4 Runge-Kutta or the
    order-2 explicit midpoint rule."""

    RK4 = "rk4"
    MIDPOINT = "midpoint"


def rhs_homogeneous(state, p: Params) -> np.ndarray:
    """Right-hand side of the homogeneous (rho, n) system.

    Accepts any array-like whose leading axis is (rho, n); negative inputs are
    allowed for phase-portrait exploration.
    """
    rho, n = np.asarray(state[0], dtype=float), np.asarray(state[1], dtype=float)
    drho = (p.R * n - p.alpha) * rho
    dn = p.P - (p.R * rho + p.beta) * n
    return np.stack([drho, dn])


def rhs_split_nonlinear(psi, n, p: Params):
    """Nodewise nonlinear/dissipative substep right-hand side.

    Returns (dpsi/dt, dn/dt). ``n`` may be passed as a complex array with
    zero imaginary part; the imaginary part then stays exactly zero.
    """
    density = np.abs(psi) ** 2
    dpsi = (-1j * (p.g * density + p.lam * n) + 0.5 * (p.R * n - p.alpha)) * psi
    dn = (p.P - (p.R * density + p.beta) * n) / p.epsilon
    return dpsi, dn


def rhs_adiabatic_nonlinear(psi, p: Params):
    """Nodewise substep of the reduced model with the reservoir closed as
    n = P/(beta + R|psi|^2)."""
    density = np.abs(psi) ** 2
    n_closed = p.P / (p.beta + p.R * density)
    return (-1j * (p.g * density + p.lam * n_closed) + 0.5 * (p.R * n_closed - p.alpha)) * psi


def rhs_adiabatic_hom(rho, p: Params):
    """Scalar density equation of the reduced model:
    drho/dt = 1/2 (P*R/(beta + R*rho) - alpha) * rho."""
    rho = np.asarray(rho, dtype=float)
    return 0.5 * (p.P * p.R / (p.beta + p.R * rho) - p.alpha) * rho


def abel_orbit_rhs(rho: float, n: float, p: Params) -> float:
    """Orbit slope dn/drho of the homogeneous system (an Abel equation of the
    second kind), defined away from (R*n - alpha)*rho = 0."""
    denom = (p.R * n - p.alpha) * rho
    if denom == 0.0:
        raise OrbitSingularity(
            f"orbit slope undefined at rho={rho!r}, n={n!r} (denominator vanishes)"
        )
    return (p.P - (p.R * rho + p.beta) * n) / denom


def ode_step(y: np.ndarray, rhs: Callable[[np.ndarray], np.ndarray], tau: float,
             kind: OdeStepperKind = OdeStepperKind.RK4) -> np.ndarray:
    """One explicit step of the selected scheme; raises NonFiniteState if the
    result leaves the finite range."""
    if kind is OdeStepperKind.RK4:
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * tau * k1)
        k3 = rhs(y + 0.5 * tau * k2)
        k4 = rhs(y + tau * k3)
        out = y + (tau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    elif kind is OdeStepperKind.MIDPOINT:
        out = y + tau * rhs(y + 0.5 * tau * rhs(y))
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown stepper kind {kind!r}")
    if not np.all(np.isfinite(out)):
        raise NonFiniteState(f"state became non-finite after a step of tau={tau}")
    return out


@dataclass(frozen=True, eq=False)
class HomTrajectory:
    """Dense homogeneous trajectory sampled at every step.

    Behaves as a sequence of :class:`HomState`; the raw arrays are exposed for
    vectorized post-processing.
    """

    t: np.ndarray
    rho: np.ndarray
    n: np.ndarray
    phi: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> HomState:
        return HomState(t=float(self.t[i]), rho=float(self.rho[i]),
                        n=float(self.n[i]), phi=float(self.phi[i]))

    def __iter__(self) -> Iterator[HomState]:
        for i in range(len(self.t)):
            yield self[i]


def _accumulated_phase(rho: np.ndarray, n: np.ndarray, tau: float, phi0: float,
                       kind: OdeStepperKind, p: Params) -> np.ndarray:
    # Quadrature order matches the stepper order so the phase does not limit
    # overall accuracy.
    integrand = p.g * rho + p.lam * n
    if len(integrand) == 1:
        return np.array([phi0])
    if kind is OdeStepperKind.RK4 and len(integrand) >= 3:
        integral = cumulative_simpson(integrand, dx=tau, initial=0.0)
    else:
        integral = cumulative_trapezoid(integrand, dx=tau, initial=0.0)
    return phi0 - integral


def integrate_homogeneous(init: HomState, p: Params, tau: float, t_end: float,
                          kind: OdeStepperKind = OdeStepperKind.RK4) -> HomTrajectory:
    """Integrate the homogeneous system from strictly positive data.

    Positivity is asserted at every step (PositivityLost signals a too-large
    step), together with the a-priori growth bound
    rho(t) <= rho_0 * exp(R*P*t^2/2 + t*(R*n_0 - alpha)), checked in log space.
    """
    if init.rho <= 0.0 or init.n <= 0.0:
        raise PositivityLost(
            f"initial data must be strictly positive, got rho={init.rho}, n={init.n}"
        )
    if not (tau > 0.0 and math.isfinite(tau)):
        raise ValueError(f"tau must be positive and finite, got {tau!r}")
    n_steps = int(round(t_end / tau))
    rho = np.empty(n_steps + 1)
    n = np.empty(n_steps + 1)
    rho[0], n[0] = init.rho, init.n
    log_rho0 = math.log(init.rho)
    y = np.array([init.rho, init.n])
    f = lambda s: rhs_homogeneous(s, p)
    for k in range(1, n_steps + 1):
        y = ode_step(y, f, tau, kind)
        if y[0] <= 0.0 or y[1] <= 0.0:
            raise PositivityLost(
                f"positivity lost at t={init.t + k * tau:.6g} "
                f"(rho={y[0]:.6g}, n={y[1]:.6g}); reduce tau"
            )
        elapsed = k * tau
        log_bound = log_rho0 + 0.5 * p.R * p.P * elapsed**2 + elapsed * (p.R * init.n - p.alpha)
        # The bound holds for the exact flow; it can only be checked up to the
        # integrator's own error, which for a smooth rate r and a scheme of
        # order q scales like elapsed * r * (r*tau)^q. Gross blow-ups still
        # exceed the slack by orders of magnitude.
        order = 4 if kind is OdeStepperKind.RK4 else 2
        rate = p.R * (p.P * elapsed + init.n) + p.alpha
        slack = 1e-8 + 10.0 * elapsed * rate * (rate * tau) ** order
        if math.log(y[0]) > log_bound + slack:
            raise NonFiniteState(
                f"condensate density exceeded its a-priori growth bound at t={init.t + elapsed:.6g}"
            )
        rho[k], n[k] = y
    t = init.t + tau * np.arange(n_steps + 1)
    phi = _accumulated_phase(rho, n, tau, init.phi, kind, p)
    return HomTrajectory(t=t, rho=rho, n=n, phi=phi)
