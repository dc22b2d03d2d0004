"""Conformal re-centering: choose tau with the center of mass of e^{2 u_tau} at 0.

In the stereographic chart the map is z -> lambda0 * z + x0.  The offset x0
kills the first two components of the center of mass independently of
lambda0, and the scale lambda0 then kills the third; both parameters have
closed forms in terms of exponential moments of u, all of which pull back to
sphere-side integrals:

    x0       = int (w1 + i w2) e^{2u} / int (1 - w3) e^{2u}
    lambda0^2 = (2 int e^{2u} - (1 + |x0|^2) int (1 - w3) e^{2u})
                / int (1 - w3) e^{2u}

The root-finding path bisects the third moment of e^{2 u_tau} in lambda,
which is strictly decreasing (it equals A/lambda - B*lambda with A, B > 0 up
to a positive factor), and exists as an independent check of the closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .config import scaled
from .functionals import exp_moments
from .harmonics import HarmonicField, evaluate_at
from .mobius import ConformalMap, dilation, translation
from .sphere import (
    DEFAULT_POLICY,
    ConvergenceError,
    RefinementPolicy,
    SphericalGrid,
    _make_grid,
    integrate,
)

__all__ = [
    "NormalizationResult",
    "com_of_exp",
    "normalize",
    "recentering_map",
    "solve_lambda0",
    "solve_x0",
]

_LAMBDA_RANGE = (1e-6, 1e6)


def _tight(policy: RefinementPolicy) -> RefinementPolicy:
    # The 1e-10 residual contract needs moments quite a bit tighter than the
    # 1e-9 functional-evaluation default; solver errors propagate linearly.
    return replace(policy, rtol=min(policy.rtol, 1e-12))


def com_of_exp(
    u: HarmonicField, policy: RefinementPolicy = DEFAULT_POLICY
) -> np.ndarray:
    """Center of mass of e^{2u}: int w e^{2u} / int e^{2u}; norm < 1 strictly."""
    mom = exp_moments(u, policy)
    com = mom.moment / mom.mass
    if float(com @ com) >= 1.0:
        raise ConvergenceError("center of mass escaped the unit ball: quadrature failure")
    return com


def solve_x0(u: HarmonicField, policy: RefinementPolicy = DEFAULT_POLICY) -> complex:
    """Plane offset zeroing the first two components of the transported center of mass."""
    mom = exp_moments(u, _tight(policy))
    return complex(mom.moment[0], mom.moment[1]) / (mom.mass - mom.moment[2])


def recentering_map(x0: complex, lam0: float) -> ConformalMap:
    """The chart map z -> lam0 * z + x0 (translation after dilation)."""
    return translation(x0).compose(dilation(lam0))


def _third_moment_fn(u, x0, grid):
    nodes = grid.nodes
    w3 = nodes[:, 2]

    def g(lam: float) -> float:
        tau = recentering_map(x0, lam)
        j32 = tau.jacobian(nodes) ** 1.5
        weight = np.exp(2.0 * evaluate_at(u, tau.apply(nodes))) * j32
        return float(integrate(grid, w3 * weight) / integrate(grid, j32))

    return g


def _bisection_lambda0(
    u: HarmonicField,
    x0: complex,
    policy: RefinementPolicy,
    bracket_init: float = 1.0,
) -> float:
    # Fix one sufficiently converged grid for all lambda evaluations so the
    # bisected function is smooth in lambda.
    mom = exp_moments(u, _tight(policy))
    n = min(policy.theta_cap, max(math.ceil(2.25 * mom.grid.theta_count), 96))
    grid = _make_grid(n, 2 * n - 1)
    g = _third_moment_fn(u, x0, grid)

    lo = hi = float(bracket_init)
    g_init = g(lo)
    if g_init > 0:          # g is decreasing: move right for the sign change
        while g(hi) > 0:
            hi *= 10.0
            if hi > _LAMBDA_RANGE[1]:
                raise ConvergenceError("no bracket for lambda0 below 1e6")
    else:
        while g(lo) < 0:
            lo /= 10.0
            if lo < _LAMBDA_RANGE[0]:
                raise ConvergenceError("no bracket for lambda0 above 1e-6")
    if not (g(lo) > 0 > g(hi) or lo == hi):
        raise ConvergenceError("inconsistent bracket signs for lambda0")

    tol_g = scaled(1e-12)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = g(mid)
        if abs(val) < tol_g:
            return mid
        if val > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, hi):
            break
    raise ConvergenceError("bisection for lambda0 stalled above the target residual")


def solve_lambda0(
    u: HarmonicField,
    x0: complex,
    policy: RefinementPolicy = DEFAULT_POLICY,
    method: str = "closed_form",
    bracket_init: float = 1.0,
) -> float:
    """The dilation factor zeroing the third transported moment.

    ``closed_form`` evaluates the moment identity above (the numerator is a
    variance, so non-positivity flags quadrature failure); ``root_find``
    bisects; ``hybrid`` runs both and insists they agree to 1e-8.
    """
    if method not in ("closed_form", "root_find", "hybrid"):
        raise ValueError(f"unknown method {method!r}")
    lam_cf = lam_rf = None
    if method in ("closed_form", "hybrid"):
        mom = exp_moments(u, _tight(policy))
        denom = mom.mass - mom.moment[2]
        numer = 2.0 * mom.mass - (1.0 + abs(x0) ** 2) * denom
        if numer <= 0.0:
            raise ConvergenceError(
                "closed-form numerator for lambda0 is non-positive: quadrature failure"
            )
        lam_cf = math.sqrt(numer / denom)
    if method in ("root_find", "hybrid"):
        lam_rf = _bisection_lambda0(u, x0, policy, bracket_init)
    if method == "hybrid":
        if abs(lam_cf - lam_rf) > scaled(1e-8):
            raise ConvergenceError(
                f"lambda0 paths disagree: closed form {lam_cf!r} vs bisection {lam_rf!r}"
            )
        return lam_cf
    return lam_cf if method == "closed_form" else lam_rf


@dataclass(frozen=True)
class NormalizationResult:
    """The re-centering map together with the achieved residual."""

    x0: complex
    lambda0: float
    tau: ConformalMap
    residual_com_norm: float
    method: str

    def to_dict(self) -> dict:
        return {
            "x0": [self.x0.real, self.x0.imag],
            "lambda0": self.lambda0,
            "tau": self.tau.to_dict(),
            "residual_com_norm": self.residual_com_norm,
            "method": self.method,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def transported_com(
    u: HarmonicField,
    tau: ConformalMap,
    policy: RefinementPolicy = DEFAULT_POLICY,
) -> np.ndarray:
    """Center of mass of e^{2(u o tau + psi)} from exact samples (no band limit).

    u is synthesized pointwise at the mapped nodes, which is exact for the
    stored expansion, so the residual is limited by quadrature alone.
    """

    def values(grid: SphericalGrid) -> np.ndarray:
        nodes = grid.nodes
        j32 = tau.jacobian(nodes) ** 1.5
        weight = np.exp(2.0 * evaluate_at(u, tau.apply(nodes))) * j32
        total = integrate(grid, weight)
        return np.array(
            [
                integrate(grid, nodes[:, 0] * weight) / total,
                integrate(grid, nodes[:, 1] * weight) / total,
                integrate(grid, nodes[:, 2] * weight) / total,
            ]
        )

    com, _, converged = _tight(policy).refine(values, min_band=u.l_max)
    if not converged:
        raise ConvergenceError("transported center of mass did not converge")
    return com


def normalize(
    u: HarmonicField,
    policy: RefinementPolicy = DEFAULT_POLICY,
    method: str = "closed_form",
    residual_tol: float = 1e-10,
) -> NormalizationResult:
    """Find tau = (z -> lambda0 z + x0) zeroing the center of mass of e^{2 u_tau}.

    Falls back to the bisection path if the closed form misses the residual
    tolerance, and raises if both paths do.
    """
    x0 = solve_x0(u, policy)
    lam0 = solve_lambda0(u, x0, policy, method=method)
    tau = recentering_map(x0, lam0)
    residual = float(np.linalg.norm(transported_com(u, tau, policy)))
    used = method
    if residual >= scaled(residual_tol) and method in ("closed_form", "root_find"):
        other = "root_find" if method == "closed_form" else "closed_form"
        lam0 = solve_lambda0(u, x0, policy, method=other)
        tau = recentering_map(x0, lam0)
        residual = float(np.linalg.norm(transported_com(u, tau, policy)))
        used = "hybrid"
    if residual >= scaled(residual_tol):
        raise ConvergenceError(
            f"normalization residual {residual:.3e} above tolerance after both paths"
        )
    return NormalizationResult(x0, lam0, tau, residual, used)
