"""Simulation toolkit for an open, driven-dissipative condensate coupled to an
exciton reservoir on the 1D torus: a Strang-splitting Fourier solver for the
full system, its homogeneous ODE reduction with equilibrium classification,
the adiabatic (fast-reservoir) limit, and machine-checked a-priori bounds."""

__version__ = "0.1.0"

from .dynamics import (
    HomTrajectory,
    OdeStepperKind,
    abel_orbit_rhs,
    integrate_homogeneous,
    ode_step,
    rhs_adiabatic_hom,
    rhs_adiabatic_nonlinear,
    rhs_homogeneous,
    rhs_split_nonlinear,
)
from .equilibria import (
    Classification,
    EquilibriumReport,
    beta_dominant_classification,
    condensate_equilibrium,
    ell_decays_exponentially,
    lyapunov_ell,
    measured_ell_decay_rate,
    zero_condensate_equilibrium,
)
from .model import (
    FieldState,
    Grid,
    HomState,
    Params,
    homogeneous_embed,
    make_grid,
    validate_params,
)
from .solver import (
    EpsilonSweepRow,
    SolverConfig,
    StationarySpec,
    adiabatic_evolve,
    adiabatic_step,
    epsilon_sweep,
    evolve,
    make_stationary,
    perturb,
    reservoir_closure,
    strang_step,
)
from .spectral import SpectralWorkspace, kinetic_step, l2_norm, spectral_derivative

__all__ = [name for name in dir() if not name.startswith("_")]
