"""Stereographic geometry, quadrature grids, and integration on the unit 2-sphere.

All integrals are taken against the normalized surface measure (total mass 1);
the un-normalized measure appears only in :func:`cap_area`.  Grids are
Gauss-Legendre in cos(theta) crossed with a uniform azimuthal grid, so the
poles are never nodes and polynomial exactness is predictable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

__all__ = [
    "INFINITY",
    "ConvergenceError",
    "RefinementPolicy",
    "SphericalGrid",
    "build_grid",
    "cap_area",
    "integrate",
    "stereo_inverse",
    "stereo_project",
    "unit_point",
]

_POLE_TOL = 1e-14


class _Infinity:
    """Tag for the point at infinity of the stereographic plane."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"


#: The point at infinity; a distinct value, never encoded as large floats.
INFINITY = _Infinity()


class ConvergenceError(RuntimeError):
    """Raised when quadrature refinement or a solver fails to converge."""


def unit_point(w) -> np.ndarray:
    """Return ``w`` as a float array of shape (..., 3), renormalized to unit length.

    Conformal-map application compounds rounding, so every construction
    renormalizes.  Raises ValueError for zero or non-finite input.
    """
    w = np.asarray(w, dtype=float)
    if w.shape[-1] != 3:
        raise ValueError("expected shape (..., 3)")
    if not np.all(np.isfinite(w)):
        raise ValueError("non-finite point")
    norm = np.sqrt(np.sum(w * w, axis=-1, keepdims=True))
    if np.any(norm < 1e-12):
        raise ValueError("cannot normalize a (near-)zero vector")
    return w / norm


def stereo_project(w):
    """Project a unit vector to the plane: w -> (w1 + i*w2) / (1 - w3).

    The north pole maps to :data:`INFINITY`.
    """
    w = unit_point(w)
    if w.ndim != 1:
        raise ValueError("stereo_project takes a single point")
    if w[2] >= 1.0 - _POLE_TOL:
        return INFINITY
    return complex(w[0], w[1]) / (1.0 - w[2])


def stereo_inverse(z) -> np.ndarray:
    """Inverse stereographic projection; :data:`INFINITY` maps to the north pole."""
    if z is INFINITY:
        return np.array([0.0, 0.0, 1.0])
    z = complex(z)
    r2 = z.real * z.real + z.imag * z.imag
    return np.array([2.0 * z.real, 2.0 * z.imag, r2 - 1.0]) / (1.0 + r2)


def cap_area(r: float) -> float:
    """Un-normalized area of a geodesic cap of radius ``r`` (0 <= r <= pi)."""
    if not 0.0 <= r <= math.pi:
        raise ValueError(f"cap radius out of range: {r}")
    return 2.0 * math.pi * (1.0 - math.cos(r))


_LEGGAUSS_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _LEGGAUSS_CACHE:
        if len(_LEGGAUSS_CACHE) > 64:
            _LEGGAUSS_CACHE.clear()
        _LEGGAUSS_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _LEGGAUSS_CACHE[n]


@dataclass(frozen=True)
class SphericalGrid:
    """Quadrature nodes and weights realizing the normalized measure.

    ``band_limit_exact`` is the largest degree L such that products of two
    band-L fields (hence projections of band-L data) integrate exactly;
    single harmonics integrate exactly through degree 2L+1.

    Nodes are ordered theta-major: node index = i * phi_count + j.
    """

    cos_theta: np.ndarray       # (theta_count,) Gauss-Legendre nodes, ascending
    theta_weights: np.ndarray   # (theta_count,) Gauss-Legendre weights
    phi: np.ndarray             # (phi_count,) uniform azimuths starting at 0
    band_limit_exact: int

    @property
    def theta_count(self) -> int:
        return self.cos_theta.size

    @property
    def phi_count(self) -> int:
        return self.phi.size

    @property
    def node_count(self) -> int:
        return self.cos_theta.size * self.phi.size

    @property
    def nodes(self) -> np.ndarray:
        """All nodes as an (N, 3) array of unit vectors."""
        t = self.cos_theta[:, None]
        s = np.sqrt(np.maximum(1.0 - t * t, 0.0))
        w = np.empty((self.theta_count, self.phi_count, 3))
        w[:, :, 0] = s * np.cos(self.phi)[None, :]
        w[:, :, 1] = s * np.sin(self.phi)[None, :]
        w[:, :, 2] = t
        return w.reshape(-1, 3)

    @property
    def weights(self) -> np.ndarray:
        """Flat quadrature weights; strictly positive, summing to 1."""
        w = np.repeat(self.theta_weights / (2.0 * self.phi_count), self.phi_count)
        return w / w.sum()

    def descriptor(self) -> dict:
        return {
            "theta_count": self.theta_count,
            "phi_count": self.phi_count,
            "band_limit_exact": self.band_limit_exact,
        }

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)

    @classmethod
    def from_descriptor(cls, d: dict) -> "SphericalGrid":
        """Regenerate a grid from its serialized descriptor (nodes are never stored)."""
        g = _make_grid(int(d["theta_count"]), int(d["phi_count"]))
        if g.band_limit_exact != int(d["band_limit_exact"]):
            raise ValueError("descriptor band_limit_exact inconsistent with node counts")
        return g

    @classmethod
    def from_json(cls, s: str) -> "SphericalGrid":
        return cls.from_descriptor(json.loads(s))


def _make_grid(n_theta: int, n_phi: int) -> SphericalGrid:
    t, wt = _leggauss(n_theta)
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    # Products of two degree-L fields need theta-degree 2L <= 2*n_theta - 1
    # and azimuthal frequency 2L <= n_phi - 1.
    band = min(n_theta - 1, (n_phi - 1) // 2)
    g = SphericalGrid(t, wt, phi, band)
    for arr in (g.cos_theta, g.theta_weights, g.phi):
        arr.setflags(write=False)
    return g


def build_grid(target_band: int, oversample: float = 1.0) -> SphericalGrid:
    """Grid integrating all band-``target_band`` products exactly.

    ``ceil(oversample * (target_band + 1))`` Gauss-Legendre nodes in cos(theta)
    crossed with ``2 * n_theta - 1`` uniform azimuths (>= 2*target_band + 1).
    """
    if target_band < 0:
        raise ValueError("target_band must be >= 0")
    if oversample < 1.0:
        raise ValueError("oversample must be >= 1")
    n_theta = math.ceil(oversample * (target_band + 1))
    return _make_grid(n_theta, 2 * n_theta - 1)


def integrate(grid: SphericalGrid, samples) -> float:
    """Weighted sum of node samples against the normalized measure."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] != grid.node_count:
        raise ValueError(
            f"sample count {samples.shape[0]} != node count {grid.node_count}"
        )
    # numpy's pairwise reduction gives a deterministic summation order.
    if samples.ndim == 1:
        return float(np.sum(grid.weights * samples))
    return np.sum(grid.weights[:, None] * samples, axis=0)


@dataclass(frozen=True)
class RefinementPolicy:
    """Adaptive quadrature policy for integrands that are not band-limited.

    Grids grow by ~1.5x in theta-node count per step (azimuths matched) until
    two successive values differ by less than ``rtol * (1 + |value|)`` in every
    component, with a hard cap on theta nodes.
    """

    start_band: int = 24
    growth: float = 1.5
    theta_cap: int = 512
    rtol: float = 1e-9

    def grids(self, min_band: int = 0) -> Iterator[SphericalGrid]:
        n = max(self.start_band, min_band) + 1
        while n <= self.theta_cap:
            yield _make_grid(n, 2 * n - 1)
            n = math.ceil(self.growth * n)

    def refine(
        self, func: Callable[[SphericalGrid], np.ndarray], min_band: int = 0
    ) -> tuple[np.ndarray, SphericalGrid, bool]:
        """Evaluate ``func`` on successively finer grids until stable.

        Returns (value, grid, converged).  Never raises on non-convergence;
        callers decide whether that is an error.
        """
        prev = None
        value = None
        grid = None
        for grid in self.grids(min_band):
            value = np.atleast_1d(np.asarray(func(grid), dtype=float))
            if prev is not None and prev.shape == value.shape:
                delta = np.max(np.abs(value - prev))
                if delta < self.rtol * (1.0 + np.max(np.abs(value))):
                    return value, grid, True
            prev = value
        if value is None:
            raise ConvergenceError(
                f"theta cap {self.theta_cap} is below the minimum admissible grid"
            )
        return value, grid, False


DEFAULT_POLICY = RefinementPolicy()
