"""Fixed points of the homogeneous system, their linearization, and Lyapunov
functionals.

The system drho/dt = (R*n - alpha) rho, dn/dt = P - (R*rho + beta) n has two
equilibria:

* a condensate branch ((P*R - alpha*beta)/(alpha*R), alpha/R), physically
  meaningful when delta = P*R - alpha*beta > 0, and
* a zero-condensate branch (0, P/beta).

Classification follows the eigenvalues of the closed-form Jacobians; the
boundary case delta = 0 is non-hyperbolic and carries no stability verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dynamics import HomTrajectory
from .errors import PreconditionDeltaNonpositive
from .model import Params

# |delta| at or below this relative tolerance counts as the non-hyperbolic case.
NONHYPERBOLIC_RTOL = 1e-12


class Classification(Enum):
    STABLE_SPIRAL = "stable_spiral"
    STABLE_NODE = "stable_node"
    SADDLE = "saddle"
    NON_HYPERBOLIC = "non_hyperbolic"


@dataclass(frozen=True, eq=False)
class EquilibriumReport:
    """Closed-form equilibrium data: location, Jacobian, eigenvalues, verdict."""

    point: tuple[float, float]
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    classification: Classification
    delta: float
    spiral_threshold: float

    def as_dict(self) -> dict:
        return {
            "point": list(self.point),
            "jacobian": self.jacobian.tolist(),
            "eigenvalues": [[ev.real, ev.imag] for ev in self.eigenvalues],
            "classification": self.classification.value,
            "delta": self.delta,
            "spiral_threshold": self.spiral_threshold,
        }


def _is_nonhyperbolic(p: Params) -> bool:
    return abs(p.delta) <= NONHYPERBOLIC_RTOL * max(p.P * p.R, p.alpha * p.beta)


def condensate_equilibrium(p: Params) -> EquilibriumReport:
    """Report for the nonzero-condensate fixed point.

    Eigenvalues are (-P*R -+ sqrt(P^2 R^2 - 4 alpha^2 delta)) / (2 alpha):
    a stable spiral for delta above P^2 R^2/(4 alpha^2), a stable node for
    0 < delta at or below that threshold, a saddle for delta < 0.
    """
    delta = p.delta
    threshold = (p.P * p.R) ** 2 / (4.0 * p.alpha**2)
    point = (delta / (p.alpha * p.R), p.alpha / p.R)
    jac = np.array([[0.0, delta / p.alpha],
                    [-p.alpha, -p.P * p.R / p.alpha]])
    disc = (p.P * p.R) ** 2 - 4.0 * p.alpha**2 * delta
    if disc >= 0.0:
        root = math.sqrt(disc)
        eig = (complex((-p.P * p.R - root) / (2.0 * p.alpha)),
               complex((-p.P * p.R + root) / (2.0 * p.alpha)))
    else:
        root = math.sqrt(-disc)
        eig = (complex(-p.P * p.R, -root) / (2.0 * p.alpha),
               complex(-p.P * p.R, root) / (2.0 * p.alpha))
    if _is_nonhyperbolic(p):
        verdict = Classification.NON_HYPERBOLIC
    elif delta < 0.0:
        verdict = Classification.SADDLE
    elif delta > threshold:
        verdict = Classification.STABLE_SPIRAL
    else:
        verdict = Classification.STABLE_NODE
    return EquilibriumReport(point=point, jacobian=jac, eigenvalues=eig,
                             classification=verdict, delta=delta,
                             spiral_threshold=threshold)


def zero_condensate_equilibrium(p: Params) -> EquilibriumReport:
    """Report for the fixed point (0, P/beta) with no condensate.

    Eigenvalues are -beta and delta/beta: a saddle for delta > 0, a stable
    node for delta < 0.
    """
    delta = p.delta
    threshold = (p.P * p.R) ** 2 / (4.0 * p.alpha**2)
    point = (0.0, p.P / p.beta)
    jac = np.array([[p.P * p.R / p.beta - p.alpha, 0.0],
                    [-p.P * p.R / p.beta, -p.beta]])
    eig = (complex(-p.beta), complex(delta / p.beta))
    if _is_nonhyperbolic(p):
        verdict = Classification.NON_HYPERBOLIC
    elif delta > 0.0:
        verdict = Classification.SADDLE
    else:
        verdict = Classification.STABLE_NODE
    return EquilibriumReport(point=point, jacobian=jac, eigenvalues=eig,
                             classification=verdict, delta=delta,
                             spiral_threshold=threshold)


def beta_dominant_classification(p: Params) -> tuple[Classification, float]:
    """Classify the condensate equilibrium in the regime of dominant reservoir
    loss (beta much larger than alpha).

    Requires delta > 0. Returns the classification together with the
    discriminant (P*R)^2 - 4 alpha^2 (P*R) + 4 alpha^3 beta; when beta > alpha
    and the discriminant is positive the point is necessarily a stable node
    (no oscillations near the equilibrium).
    """
    if p.delta <= 0.0:
        raise PreconditionDeltaNonpositive(
            f"requires P*R - alpha*beta > 0, got delta={p.delta!r}"
        )
    pr = p.P * p.R
    discriminant = pr**2 - 4.0 * p.alpha**2 * pr + 4.0 * p.alpha**3 * p.beta
    verdict = condensate_equilibrium(p).classification
    if p.beta > p.alpha and discriminant > 0.0 and verdict is not Classification.NON_HYPERBOLIC:
        assert verdict is Classification.STABLE_NODE
    return verdict, discriminant


def lyapunov_ell(rho: float, n: float, p: Params) -> float:
    """Scalar Lyapunov candidate (P/beta) rho + 1/2 (n - P/beta)^2.

    Nonincreasing along homogeneous trajectories with rho >= 0 whenever
    delta < 0 (see :func:`ell_decays_exponentially`); its minimum 0 sits at
    the zero-condensate equilibrium.
    """
    return (p.P / p.beta) * rho + 0.5 * (n - p.P / p.beta) ** 2


def ell_decays_exponentially(p: Params) -> bool:
    """Whether d(ell)/dt <= -c*ell holds (for some c > 0) on rho >= 0."""
    return p.delta < 0.0


def measured_ell_decay_rate(traj: HomTrajectory, p: Params) -> float:
    """Fit the exponential decay rate c of ell along a computed trajectory.

    Least-squares slope of ln(ell) over the samples with ell above rounding
    scale; the analytic statement guarantees some positive rate but not its
    value, so the measured figure is reported rather than asserted.
    """
    ell = (p.P / p.beta) * traj.rho + 0.5 * (traj.n - p.P / p.beta) ** 2
    keep = ell > 1e3 * np.finfo(float).tiny
    if np.count_nonzero(keep) < 2:
        raise ValueError("trajectory too short (or ell already at floor) to fit a rate")
    slope = np.polyfit(traj.t[keep], np.log(ell[keep]), 1)[0]
    return float(-slope)
