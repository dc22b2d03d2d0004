"""Distance to the extremal family and the quantitative stability certificate.

The extremal family modulo constants is a 3-parameter manifold: left
rotations leave the Jacobian unchanged, and QR (Iwasawa) decomposition puts
exactly one representative of each rotation-coset in the chart
z -> lambda * (z + beta) with lambda > 0, beta complex.  The certificate
checked here is

    deficit >= distance / 6,

with the deficit the sharpened-functional value at alpha = 2/3 and the
distance the infimum of the gradient norm squared of (u - psi) over the
chart, both fields truncated at the same band limit (constants carry no
gradient energy, so the l = 0 mode is ignored).
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .config import scaled
from .harmonics import GridField, HarmonicField, analyze, dirichlet_energy
from .mobius import ConformalMap, MobiusMap
from .normalize import normalize
from .sphere import (
    DEFAULT_POLICY,
    ConvergenceError,
    RefinementPolicy,
    SphericalGrid,
    build_grid,
)
from .functionals import chang_gui_report

__all__ = [
    "BETA_BOUND",
    "LOG_LAMBDA_BOUND",
    "DistanceResult",
    "ManifoldPoint",
    "StabilityReport",
    "chart_params",
    "distance_to_manifold",
    "grad_distance",
    "stability_check",
]

LOG_LAMBDA_BOUND = math.log(16.0)
BETA_BOUND = 8.0


@dataclass(frozen=True)
class ManifoldPoint:
    """Chart coordinates (log lambda, beta) of one extremal modulo rotations."""

    log_lambda: float
    beta1: float
    beta2: float

    def to_map(self) -> ConformalMap:
        r = math.exp(0.5 * self.log_lambda)
        beta = complex(self.beta1, self.beta2)
        return ConformalMap(MobiusMap(r, r * beta, 0.0, 1.0 / r))

    def as_array(self) -> np.ndarray:
        return np.array([self.log_lambda, self.beta1, self.beta2])

    def in_box(self, margin: float = 1e-6) -> bool:
        return (
            abs(self.log_lambda) <= LOG_LAMBDA_BOUND - margin
            and abs(self.beta1) <= BETA_BOUND - margin
            and abs(self.beta2) <= BETA_BOUND - margin
        )

    def to_dict(self) -> dict:
        return {
            "log_lambda": self.log_lambda,
            "beta1": self.beta1,
            "beta2": self.beta2,
        }


def chart_params(tau: ConformalMap) -> ManifoldPoint:
    """Chart coordinates of the rotation-coset of tau.

    QR-decompose the matrix as (rotation) @ (upper triangular, positive
    diagonal); reflections conjugate the matrix first, since the Jacobian of
    a reflected map equals that of the conjugated holomorphic one.
    """
    m = np.conj(tau.mobius.mat) if tau.reflect else tau.mobius.mat
    _, r = np.linalg.qr(m)
    d = np.diag(r)
    r = (np.conj(d / np.abs(d))[:, None]) * r
    lam = float(r[0, 0].real) ** 2
    beta = complex(r[0, 1] / r[0, 0])
    return ManifoldPoint(math.log(lam), beta.real, beta.imag)


def _psi_coefficients(
    tau: ConformalMap, l_max: int, grid: SphericalGrid
) -> np.ndarray:
    # psi modulo its constant: 0.75 * ln J projected; the l = 0 slot is zeroed
    samples = 0.75 * np.log(tau.jacobian(grid.nodes))
    coeffs = analyze(GridField(grid, samples), l_max).coeffs.copy()
    coeffs[0] = 0.0
    return coeffs


def grad_distance(
    u: HarmonicField,
    m: ManifoldPoint,
    l_max: int,
    grid: SphericalGrid,
    tail_threshold: float | None = 1e-3,
) -> float:
    """Gradient-norm distance to one chart point, both fields at band l_max."""
    if tail_threshold is not None:
        from .harmonics import project_samples

        tau = m.to_map()
        proj = project_samples(0.75 * np.log(tau.jacobian(grid.nodes)), grid, l_max)
        if proj.tail_fraction > scaled(tail_threshold):
            raise ConvergenceError(
                f"psi tail fraction {proj.tail_fraction:.3e} too large at this chart point"
            )
    diff = u.to_lmax(l_max).coeffs - _psi_coefficients(m.to_map(), l_max, grid)
    diff[0] = 0.0
    return dirichlet_energy(HarmonicField(l_max, diff))


@dataclass(frozen=True)
class DistanceResult:
    distance: float
    argmin: ManifoldPoint
    converged: bool
    boundary_hit: bool
    all_starts_boundary: bool
    nfev: int
    starts: tuple

    def to_dict(self) -> dict:
        return {
            "distance": self.distance,
            "argmin": self.argmin.to_dict(),
            "converged": self.converged,
            "boundary_hit": self.boundary_hit,
            "all_starts_boundary": self.all_starts_boundary,
            "nfev": self.nfev,
            "starts": list(self.starts),
        }


def _simplex_minimize(objective, x0: np.ndarray, maxfev: int) -> dict:
    lo = np.array([-LOG_LAMBDA_BOUND, -BETA_BOUND, -BETA_BOUND])
    hi = -lo
    x0 = np.clip(x0, lo + 1e-9, hi - 1e-9)
    # step away from the nearer bound so the simplex stays non-degenerate
    steps = np.where(x0 <= 0.0, 0.25, -0.25)
    simplex = np.vstack([x0] + [x0 + steps[i] * e for i, e in enumerate(np.eye(3))])
    simplex = np.clip(simplex, lo, hi)
    res = minimize(
        objective,
        x0,
        method="Nelder-Mead",
        bounds=list(zip(lo, hi)),
        options={
            "xatol": 1e-7,
            "fatol": 1e-10,
            "maxfev": maxfev,
            "initial_simplex": simplex,
        },
    )
    point = ManifoldPoint(*map(float, res.x))
    return {
        "x": res.x,
        "value": float(res.fun),
        "nfev": int(res.nfev),
        "converged": bool(res.success),
        "boundary": not point.in_box(),
    }


def distance_to_manifold(
    u: HarmonicField,
    l_max: int,
    grid: SphericalGrid,
    seed: int = 0,
    policy: RefinementPolicy = DEFAULT_POLICY,
    maxfev: int = 2000,
    jobs: int = 1,
) -> DistanceResult:
    """Infimum of the gradient distance over the chart, by multi-start simplex search.

    Starts: the identity; the inverse of the re-centering map (the candidate
    the stability argument itself produces); and three seeded random points
    in the search box.  Results merge by minimum value with a lexicographic
    tie-break on the parameters, so the outcome is deterministic.
    """
    u_cap = u.to_lmax(l_max)
    target = u_cap.coeffs.copy()
    target[0] = 0.0
    degrees = u_cap.degrees()
    eigs = degrees * (degrees + 1)
    nodes = grid.nodes

    def objective(x: np.ndarray) -> float:
        tau = ManifoldPoint(*map(float, x)).to_map()
        psi = analyze(GridField(grid, 0.75 * np.log(tau.jacobian(nodes))), l_max).coeffs
        diff = target - psi
        diff[0] = 0.0
        return float(np.sum(eigs * diff * diff))

    starts = [np.zeros(3)]
    kinds = ["identity"]
    warm_note = None
    try:
        norm_result = normalize(u, policy)
        starts.append(
            np.array(
                [-math.log(norm_result.lambda0), -norm_result.x0.real, -norm_result.x0.imag]
            )
        )
        kinds.append("recentering")
    except ConvergenceError as exc:  # keep searching from the other starts
        warm_note = str(exc)
    rng = np.random.default_rng(seed)
    for _ in range(3):
        starts.append(
            np.array(
                [
                    rng.uniform(-LOG_LAMBDA_BOUND, LOG_LAMBDA_BOUND),
                    rng.uniform(-BETA_BOUND, BETA_BOUND),
                    rng.uniform(-BETA_BOUND, BETA_BOUND),
                ]
            )
        )
        kinds.append("random")

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda s: _simplex_minimize(objective, s, maxfev), starts))
    else:
        results = [_simplex_minimize(objective, s, maxfev) for s in starts]

    order = sorted(range(len(results)), key=lambda i: (results[i]["value"], *results[i]["x"]))
    best = results[order[0]]
    start_rows = []
    for i, r in enumerate(results):
        start_rows.append(
            {
                "kind": kinds[i],
                "start_value": float(objective(starts[i])),
                "value": r["value"],
                "nfev": r["nfev"],
                "converged": r["converged"],
                "boundary": r["boundary"],
            }
        )
    if warm_note is not None:
        start_rows.insert(1, {"kind": "recentering", "error": warm_note})
    return DistanceResult(
        distance=best["value"],
        argmin=ManifoldPoint(*map(float, best["x"])),
        converged=best["converged"],
        boundary_hit=best["boundary"],
        all_starts_boundary=all(r["boundary"] for r in results),
        nfev=sum(r["nfev"] for r in results),
        starts=tuple(start_rows),
    )


@dataclass(frozen=True)
class StabilityReport:
    """Deficit, distance, and the certificate slack deficit - distance/6."""

    deficit: float
    distance: float
    slack: float
    argmin: ManifoldPoint
    trace: dict

    def to_dict(self) -> dict:
        return {
            "deficit": self.deficit,
            "distance": self.distance,
            "slack": self.slack,
            "argmin": self.argmin.to_dict(),
            "trace": self.trace,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def stability_check(
    u: HarmonicField,
    l_max: int | None = None,
    grid: SphericalGrid | None = None,
    policy: RefinementPolicy = DEFAULT_POLICY,
    seed: int = 0,
    jobs: int = 1,
) -> StabilityReport:
    """Certify deficit >= distance/6 for one field.

    A converged run with slack below -1e-8 would contradict the bound and
    therefore raises as a numerics failure.
    """
    if l_max is None:
        l_max = u.l_max
    if grid is None:
        grid = build_grid(max(4 * l_max, 48))
    report = chang_gui_report(2.0 / 3.0, u, policy)
    dist = distance_to_manifold(u, l_max, grid, seed=seed, policy=policy, jobs=jobs)
    slack = report.value - dist.distance / 6.0
    converged = report.converged and dist.converged
    if converged and slack < -scaled(1e-8):
        raise ConvergenceError(
            f"stability certificate violated on a converged run: slack {slack:.3e}"
        )
    warm = next((s for s in dist.starts if s.get("kind") == "recentering"), None)
    warm_ok = None
    if warm is not None and "start_value" in warm:
        warm_ok = bool(warm["start_value"] <= 6.0 * max(dist.distance, 1e-9))
    trace = {
        "converged": converged,
        "functional_grid": report.grid,
        "distance": dist.to_dict(),
        "warm_start_dominates": warm_ok,
    }
    return StabilityReport(
        deficit=report.value,
        distance=dist.distance,
        slack=slack,
        argmin=dist.argmin,
        trace=trace,
    )
