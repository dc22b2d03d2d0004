"""Evaluation of the sharp sphere functionals and the conformal transport of fields.

Two functionals are implemented for band-limited fields u:

* the classical Trudinger-Moser-Onofri energy
  alpha * E(u) + 2 * mean(u) - ln(int e^{2u}),
* its sharpened variant replacing the log-mass by half the log of the
  Lorentzian quantity (int e^{2u})^2 - sum_i (int w_i e^{2u})^2,

where E is the exact spectral Dirichlet energy.  The second functional is
nonnegative exactly for alpha >= 2/3 and vanishes on the conformal family
psi = (3/4) ln J + c, which transform() transports fields along.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .config import scaled
from .extremals import build_extremal, psi_values
from .harmonics import (
    HarmonicField,
    Projection,
    dirichlet_energy,
    evaluate_at,
    project_samples,
    synthesize,
)
from .mobius import ConformalMap
from .sphere import (
    DEFAULT_POLICY,
    ConvergenceError,
    RefinementPolicy,
    SphericalGrid,
    integrate,
)

__all__ = [
    "ExpMoments",
    "FunctionalReport",
    "cg_bound_slack",
    "chang_gui_report",
    "chang_gui_value",
    "dirichlet_invariance_check",
    "exp_moments",
    "onofri_value",
    "transform",
]


class ExpMoments(NamedTuple):
    """Exponential moments: int e^{2u} and the vector int w e^{2u}."""

    mass: float
    moment: np.ndarray
    grid: SphericalGrid
    converged: bool


def exp_moments(
    u: HarmonicField, policy: RefinementPolicy = DEFAULT_POLICY, strict: bool = True
) -> ExpMoments:
    """Adaptively refined quadrature of e^{2u} and its first moments.

    e^{2u} is not band-limited, so grids grow until the values stabilize to
    the policy's relative tolerance.
    """

    def values(grid: SphericalGrid) -> np.ndarray:
        nodes = grid.nodes
        e2u = np.exp(2.0 * synthesize(u, grid).samples)
        return np.array(
            [
                integrate(grid, e2u),
                integrate(grid, nodes[:, 0] * e2u),
                integrate(grid, nodes[:, 1] * e2u),
                integrate(grid, nodes[:, 2] * e2u),
            ]
        )

    v, grid, converged = policy.refine(values, min_band=u.l_max)
    if strict and not converged:
        raise ConvergenceError("exponential moments did not converge within the grid cap")
    return ExpMoments(float(v[0]), v[1:], grid, converged)


@dataclass(frozen=True)
class FunctionalReport:
    """All ingredients of one functional evaluation, assembled exactly as stated."""

    alpha: float
    energy: float
    mean: float
    log_mass: float
    lorentzian: float
    value: float
    grid: dict
    converged: bool

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "energy": self.energy,
            "mean": self.mean,
            "log_mass": self.log_mass,
            "lorentzian": self.lorentzian,
            "value": self.value,
            "grid": self.grid,
            "converged": self.converged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def chang_gui_report(
    alpha: float,
    u: HarmonicField,
    policy: RefinementPolicy = DEFAULT_POLICY,
    strict: bool = True,
) -> FunctionalReport:
    """Evaluate the sharpened functional with full diagnostics.

    The Lorentzian quantity is strictly positive for genuine measures
    (strict Cauchy-Schwarz since |w| = 1 and w is not constant); a
    non-positive value can only come from broken quadrature and raises.
    """
    mom = exp_moments(u, policy, strict=strict)
    lorentzian = mom.mass**2 - float(mom.moment @ mom.moment)
    if lorentzian <= 0.0:
        raise ConvergenceError(
            f"Lorentzian quantity {lorentzian:.3e} is non-positive: quadrature failure"
        )
    energy = dirichlet_energy(u)
    mean = u.mean()
    value = alpha * energy + 2.0 * mean - 0.5 * math.log(lorentzian)
    return FunctionalReport(
        alpha=float(alpha),
        energy=energy,
        mean=mean,
        log_mass=math.log(mom.mass),
        lorentzian=lorentzian,
        value=value,
        grid=mom.grid.descriptor(),
        converged=mom.converged,
    )


def chang_gui_value(
    alpha: float, u: HarmonicField, policy: RefinementPolicy = DEFAULT_POLICY
) -> float:
    return chang_gui_report(alpha, u, policy).value


def onofri_value(
    alpha: float, u: HarmonicField, policy: RefinementPolicy = DEFAULT_POLICY
) -> float:
    """The classical functional alpha*E + 2*mean - ln(int e^{2u})."""
    mom = exp_moments(u, policy)
    return alpha * dirichlet_energy(u) + 2.0 * u.mean() - math.log(mom.mass)


def transform(
    u: HarmonicField,
    tau: ConformalMap,
    l_max: int,
    grid: SphericalGrid,
    tail_threshold: float | None = 1e-6,
    policy: RefinementPolicy = DEFAULT_POLICY,
) -> Projection:
    """Transport u along tau: project u(tau(w)) + psi(w) to band l_max.

    Works for reflect maps as well; the Jacobian (hence psi) is insensitive
    to the reflection.  The projection's tail-energy fraction is returned and
    gated by ``tail_threshold``.
    """
    e = build_extremal(tau, policy)
    mapped = tau.apply(grid.nodes)
    samples = evaluate_at(u, mapped) + psi_values(e, grid.nodes)
    proj = project_samples(samples, grid, l_max)
    if tail_threshold is not None and proj.tail_fraction > scaled(tail_threshold):
        raise ConvergenceError(
            f"transform tail energy fraction {proj.tail_fraction:.3e} exceeds threshold"
        )
    return proj


def cg_bound_slack(
    alpha: float,
    u: HarmonicField,
    policy: RefinementPolicy = DEFAULT_POLICY,
) -> float:
    """Slack of the sharp lower bound: value - (alpha - 2/3) * energy.

    Analytically nonnegative for alpha >= 2/3; anything below about -1e-8
    indicates broken quadrature.
    """
    if alpha < 2.0 / 3.0:
        raise ValueError("the lower bound requires alpha >= 2/3")
    report = chang_gui_report(alpha, u, policy)
    return report.value - (alpha - 2.0 / 3.0) * report.energy


class InvarianceCheck(NamedTuple):
    value: float
    tail_fraction: float


def dirichlet_invariance_check(
    u: HarmonicField,
    tau: ConformalMap,
    grid: SphericalGrid,
    l_max: int | None = None,
) -> InvarianceCheck:
    """|E(project(u o tau)) - E(u)|, with the projection tail reported separately.

    The two-dimensional Dirichlet integral is conformally invariant, so the
    residual measures only truncation and quadrature error.
    """
    if l_max is None:
        l_max = grid.band_limit_exact // 2
    mapped = tau.apply(grid.nodes)
    proj = project_samples(evaluate_at(u, mapped), grid, l_max)
    return InvarianceCheck(
        abs(dirichlet_energy(proj.field) - dirichlet_energy(u)), proj.tail_fraction
    )
