"""Core value types: model parameters, the periodic grid, and state containers.

The model couples a complex condensate field psi to a real reservoir density n
on the torus of length ``domain_length``:

    i dpsi/dt = -1/2 psi_xx + g|psi|^2 psi + lam*n*psi + i/2 (R*n - alpha) psi
    eps dn/dt = P - (R|psi|^2 + beta) n

All seven rate constants are strictly positive; ``epsilon`` lies in (0, 1].
Fields are stored as nodal (collocation) values, transforms happen on demand
in :mod:`gpsim.spectral`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Mapping

import numpy as np

from .errors import EpsilonOutOfRange, LengthMismatch, NonPositiveParameter, OddOrTooSmallM

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Params:
    """The model constants.

    Attributes:
        g: self-interaction strength of the condensate.
        lam: condensate-reservoir coupling.
        R: stimulated-scattering rate from the reservoir into the condensate.
        P: exciton creation (pump) rate, spatially constant.
        alpha: condensate (polariton) loss rate.
        beta: reservoir (exciton) loss rate.
        epsilon: reservoir relaxation parameter in (0, 1]. The limit
            ``epsilon -> 0`` is a separate reduced equation, not a parameter
            value, so 0 is rejected.
        domain_length: torus length.
    """

    g: float
    lam: float
    R: float
    P: float
    alpha: float
    beta: float
    epsilon: float = 1.0
    domain_length: float = _TWO_PI

    def __post_init__(self):
        for name in ("g", "lam", "R", "P", "alpha", "beta", "domain_length"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0.0):
                raise NonPositiveParameter(name, getattr(self, name))
            object.__setattr__(self, name, value)
        eps = float(self.epsilon)
        if not (math.isfinite(eps) and 0.0 < eps <= 1.0):
            raise EpsilonOutOfRange(self.epsilon)
        object.__setattr__(self, "epsilon", eps)

    @property
    def delta(self) -> float:
        """Condensation discriminant P*R - alpha*beta; positive means a nontrivial condensate can persist."""
        return self.P * self.R - self.alpha * self.beta

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_PARAM_ALIASES = {"lambda": "lam"}
_REQUIRED_PARAMS = ("g", "lam", "R", "P", "alpha", "beta")


def validate_params(raw: Mapping[str, object]) -> Params:
    """Build a validated :class:`Params` from a mapping.

    Accepts ``lambda`` as an alias for ``lam``. Unknown keys raise KeyError,
    bad values raise :class:`NonPositiveParameter` or
    :class:`EpsilonOutOfRange`.
    """
    kwargs: dict[str, float] = {}
    known = {f.name for f in fields(Params)}
    for key, value in raw.items():
        name = _PARAM_ALIASES.get(key, key)
        if name not in known:
            raise KeyError(f"unknown parameter {key!r}")
        kwargs[name] = float(value)  # type: ignore[arg-type]
    missing = [name for name in _REQUIRED_PARAMS if name not in kwargs]
    if missing:
        raise KeyError(f"missing parameter(s): {', '.join(missing)}")
    return Params(**kwargs)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform periodic mesh with signed FFT wavenumbers.

    ``nodes[j] = j*h`` for j = 0..m-1 and ``wavenumbers`` holds
    2*pi*j'/domain_length in standard FFT order (Nyquist mode stored with
    negative sign).
    """

    m: int
    domain_length: float
    h: float
    nodes: np.ndarray
    wavenumbers: np.ndarray


def make_grid(m: int, domain_length: float) -> Grid:
    if isinstance(m, bool) or int(m) != m or m < 4 or m % 2 != 0:
        raise OddOrTooSmallM(m)
    m = int(m)
    domain_length = float(domain_length)
    if not (math.isfinite(domain_length) and domain_length > 0.0):
        raise NonPositiveParameter("domain_length", domain_length)
    h = domain_length / m
    nodes = np.arange(m) * h
    wavenumbers = _TWO_PI * np.fft.fftfreq(m, d=h)
    nodes.flags.writeable = False
    wavenumbers.flags.writeable = False
    return Grid(m=m, domain_length=domain_length, h=h, nodes=nodes, wavenumbers=wavenumbers)


@dataclass(frozen=True, eq=False)
class FieldState:
    """Condensate and reservoir samples at one instant.

    ``psi`` is complex, ``n`` real, both of the grid length. Entries must be
    finite; positivity of ``n`` is a dynamical property checked by the
    solvers, not here.
    """

    t: float
    psi: np.ndarray
    n: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=np.complex128)
        n = np.asarray(self.n, dtype=np.float64)
        if psi.ndim != 1 or n.ndim != 1 or psi.shape != n.shape:
            raise LengthMismatch(
                f"psi and n must be 1-d arrays of equal length, got {psi.shape} and {n.shape}"
            )
        if not (np.all(np.isfinite(psi)) and np.all(np.isfinite(n))):
            raise ValueError("FieldState entries must be finite")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "t", float(self.t))

    @property
    def density(self) -> np.ndarray:
        """Condensate density |psi|^2."""
        return np.abs(self.psi) ** 2


@dataclass(frozen=True)
class HomState:
    """Spatially homogeneous state (rho, n) with accumulated phase phi."""

    t: float
    rho: float
    n: float
    phi: float = 0.0

    def __post_init__(self):
        for name in ("t", "rho", "n", "phi"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"HomState.{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.rho < 0.0 or self.n < 0.0:
            raise ValueError(f"HomState densities must be >= 0, got rho={self.rho}, n={self.n}")


def homogeneous_embed(state: HomState, grid: Grid) -> FieldState:
    """Lift a homogeneous state onto the grid: psi = sqrt(rho)*e^{i*phi}, constant in x."""
    psi_value = math.sqrt(state.rho) * complex(math.cos(state.phi), math.sin(state.phi))
    psi = np.full(grid.m, psi_value, dtype=np.complex128)
    n = np.full(grid.m, state.n, dtype=np.float64)
    return FieldState(t=state.t, psi=psi, n=n)
