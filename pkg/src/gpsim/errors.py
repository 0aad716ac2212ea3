"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class so
that CLI error messages (and tests) can name the condition precisely.
"""

from __future__ import annotations


class GpsimError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveParameter(GpsimError, ValueError):
    """A model parameter that must be strictly positive (and finite) is not."""

    def __init__(self, name: str, value: float):
        self.name = name
        self.value = value
        super().__init__(f"parameter {name!r} must be positive and finite, got {value!r}")


class EpsilonOutOfRange(GpsimError, ValueError):
    """The reservoir relaxation parameter must lie in (0, 1]."""

    def __init__(self, value: float):
        self.value = value
        super().__init__(f"epsilon must lie in (0, 1], got {value!r}")


class OddOrTooSmallM(GpsimError, ValueError):
    """Grid size must be an even integer >= 4."""

    def __init__(self, m: object):
        super().__init__(f"grid size m must be an even integer >= 4, got {m!r}")


class LengthMismatch(GpsimError, ValueError):
    """A field array does not match the grid (or partner array) length."""


class UnsupportedOrder(GpsimError, ValueError):
    """Spectral differentiation supports orders 1 and 2 only."""


class NonFiniteState(GpsimError, FloatingPointError):
    """A state component became NaN or infinite during integration."""


class PositivityLost(GpsimError, FloatingPointError):
    """The reservoir (or condensate) density left the positive cone.

    For explicit steppers this signals a too-large time step; the densities
    are provably positive for the exact flow.
    """


class StepSizeTooLarge(GpsimError, ValueError):
    """The requested time step violates the stiffness cap tau <= eps*safety/(R*max|psi|^2+beta)."""


class OrbitSingularity(GpsimError, ZeroDivisionError):
    """The orbit equation dn/drho is singular where (R*n - alpha)*rho = 0."""


class PreconditionDeltaNonpositive(GpsimError, ValueError):
    """An operation requiring P*R - alpha*beta > 0 was called without it."""


class DeltaNonpositive(GpsimError, ValueError):
    """No nontrivial stationary state exists unless P*R - alpha*beta > 0."""


class PerturbationBreaksPositivity(GpsimError, ValueError):
    """A requested perturbation would drive the reservoir density to <= 0."""


class NonpositiveReservoir(GpsimError, ValueError):
    """ln(n) is undefined: the reservoir field has a non-positive entry."""


class BoundViolation(GpsimError):
    """A monitored a-priori bound failed at a saved step.

    ``check`` is the machine name of the violated envelope, one of
    ``mass_envelope``, ``reservoir_envelope``, ``positivity``, ``l2_envelope``.
    """

    def __init__(self, check: str, t: float, detail: str = ""):
        self.check = check
        self.t = t
        msg = f"BoundViolation: {check} failed at t={t:.6g}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class NonMonotoneTime(GpsimError, ValueError):
    """Time-series records must have strictly increasing times."""


class ConfigError(GpsimError, ValueError):
    """A run configuration file is missing or malformed."""
