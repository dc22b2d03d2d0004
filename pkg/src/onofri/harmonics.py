"""Band-limited fields on the sphere with exact spectral energy and Laplacian.

The basis is real and orthonormal against the *normalized* measure
(integral of Y_lm^2 = 1), so the mean of a field is its (0,0) coefficient,
Parseval is coefficient-exact, and the constant Y_00 is identically 1.
Coefficients are stored flat in (l ascending, m ascending) order:
index(l, m) = l*l + l + m.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .sphere import SphericalGrid, integrate

__all__ = [
    "GridField",
    "HarmonicField",
    "Projection",
    "analyze",
    "coeff_index",
    "dirichlet_energy",
    "evaluate_at",
    "field_from_json",
    "field_to_json",
    "laplacian",
    "synthesize",
]


def coeff_index(l: int, m: int) -> int:
    """Flat index of the (l, m) coefficient."""
    if abs(m) > l:
        raise ValueError(f"|m| > l for (l, m) = ({l}, {m})")
    return l * l + l + m


def _pair_index(l: int, m: int) -> int:
    # packed index for 0 <= m <= l tables
    return l * (l + 1) // 2 + m


def _legendre_table(l_max: int, t: np.ndarray) -> np.ndarray:
    """Normalized associated Legendre values P(l, m >= 0) at abscissas ``t``.

    Normalization: integral of P_lm(t)^2 dt over [-1, 1] equals 2, which makes
    the real harmonics orthonormal against the normalized sphere measure.
    Stable upward recursion in l, diagonal seeded by the sin(theta)^m ladder.
    """
    t = np.asarray(t, dtype=float)
    s = np.sqrt(np.maximum(1.0 - t * t, 0.0))
    n_pairs = (l_max + 1) * (l_max + 2) // 2
    out = np.empty((n_pairs, t.size))
    pmm = np.ones_like(t)
    for m in range(l_max + 1):
        if m > 0:
            pmm = pmm * s * math.sqrt((2 * m + 1) / (2 * m))
        out[_pair_index(m, m)] = pmm
        if m + 1 <= l_max:
            out[_pair_index(m + 1, m)] = math.sqrt(2 * m + 3) * t * pmm
        for l in range(m + 2, l_max + 1):
            a = math.sqrt((2 * l + 1) * (2 * l - 1) / ((l - m) * (l + m)))
            b = math.sqrt(
                (2 * l + 1) * (l - 1 - m) * (l - 1 + m) / ((2 * l - 3) * (l - m) * (l + m))
            )
            out[_pair_index(l, m)] = (
                a * t * out[_pair_index(l - 1, m)] - b * out[_pair_index(l - 2, m)]
            )
    return out


_TABLE_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _grid_table(grid: SphericalGrid, l_max: int) -> np.ndarray:
    # canonical grids share Gauss-Legendre nodes per theta_count; the first
    # abscissa distinguishes any hand-built grid
    key = (grid.theta_count, l_max, float(grid.cos_theta[0]))
    if key not in _TABLE_CACHE:
        if len(_TABLE_CACHE) > 24:
            _TABLE_CACHE.clear()
        _TABLE_CACHE[key] = _legendre_table(l_max, grid.cos_theta)
    return _TABLE_CACHE[key]


def _azimuth_tables(grid: SphericalGrid, l_max: int) -> tuple[np.ndarray, np.ndarray]:
    m = np.arange(l_max + 1)[:, None]
    arg = m * grid.phi[None, :]
    return np.cos(arg), np.sin(arg)


@dataclass(frozen=True)
class HarmonicField:
    """Real function on the sphere given by coefficients up to degree l_max."""

    l_max: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)  # defensive copy; fields are immutable
        if c.shape != ((self.l_max + 1) ** 2,):
            raise ValueError(
                f"coefficient array must have length {(self.l_max + 1) ** 2}"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, l_max: int) -> "HarmonicField":
        return cls(l_max, np.zeros((l_max + 1) ** 2))

    @classmethod
    def from_entries(cls, l_max: int, entries: dict) -> "HarmonicField":
        """Build a field from a {(l, m): value} mapping."""
        c = np.zeros((l_max + 1) ** 2)
        for (l, m), value in entries.items():
            c[coeff_index(l, m)] = value
        return cls(l_max, c)

    @classmethod
    def constant(cls, value: float, l_max: int = 0) -> "HarmonicField":
        c = np.zeros((l_max + 1) ** 2)
        c[0] = value
        return cls(l_max, c)

    def coeff(self, l: int, m: int) -> float:
        return float(self.coeffs[coeff_index(l, m)])

    def mean(self) -> float:
        """Mean against the normalized measure; equals the (0, 0) coefficient."""
        return float(self.coeffs[0])

    def degrees(self) -> np.ndarray:
        """Degree l of each flat coefficient slot."""
        return np.repeat(np.arange(self.l_max + 1), 2 * np.arange(self.l_max + 1) + 1)

    def to_lmax(self, l_max: int) -> "HarmonicField":
        """Pad with zeros or truncate to the requested band limit."""
        n = (l_max + 1) ** 2
        c = np.zeros(n)
        k = min(n, self.coeffs.size)
        c[:k] = self.coeffs[:k]
        return HarmonicField(l_max, c)

    def __add__(self, other: "HarmonicField") -> "HarmonicField":
        L = max(self.l_max, other.l_max)
        return HarmonicField(L, self.to_lmax(L).coeffs + other.to_lmax(L).coeffs)

    def __sub__(self, other: "HarmonicField") -> "HarmonicField":
        L = max(self.l_max, other.l_max)
        return HarmonicField(L, self.to_lmax(L).coeffs - other.to_lmax(L).coeffs)

    def __mul__(self, scalar: float) -> "HarmonicField":
        return HarmonicField(self.l_max, self.coeffs * float(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True)
class GridField:
    """Samples of a function at the nodes of a grid."""

    grid: SphericalGrid
    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.shape != (self.grid.node_count,):
            raise ValueError("sample count must equal node count")
        object.__setattr__(self, "samples", s)


class Projection(NamedTuple):
    """A band-limited projection plus its estimated relative tail energy."""

    field: HarmonicField
    tail_fraction: float


def synthesize(f: HarmonicField, grid: SphericalGrid) -> GridField:
    """Evaluate the truncated expansion at every grid node."""
    if grid.band_limit_exact < f.l_max:
        raise ValueError(
            f"grid resolves band {grid.band_limit_exact} < field l_max {f.l_max}"
        )
    L = f.l_max
    table = _grid_table(grid, L)
    nt = grid.theta_count
    # A[m] = sum_l c(l, m) P(l, m),  B[m] = sum_l c(l, -m) P(l, m)
    A = np.zeros((L + 1, nt))
    B = np.zeros((L + 1, nt))
    for m in range(L + 1):
        ls = np.arange(m, L + 1)
        rows = table[[_pair_index(l, m) for l in ls]]
        A[m] = f.coeffs[[coeff_index(l, m) for l in ls]] @ rows
        if m > 0:
            B[m] = f.coeffs[[coeff_index(l, -m) for l in ls]] @ rows
    cos_t, sin_t = _azimuth_tables(grid, L)
    scale = np.full(L + 1, math.sqrt(2.0))
    scale[0] = 1.0
    samples = (A * scale[:, None]).T @ cos_t + (B * scale[:, None]).T @ sin_t
    return GridField(grid, samples.reshape(-1))


def analyze(g: GridField, l_max: int) -> HarmonicField:
    """Project grid samples onto the basis by quadrature.

    Exact (analyze o synthesize = identity) for band-limited inputs whenever
    the grid's band_limit_exact covers ``l_max``.
    """
    grid = g.grid
    if grid.band_limit_exact < l_max:
        raise ValueError(
            f"grid resolves band {grid.band_limit_exact} < requested l_max {l_max}"
        )
    L = l_max
    f2d = g.samples.reshape(grid.theta_count, grid.phi_count)
    cos_t, sin_t = _azimuth_tables(grid, L)
    fc = f2d @ cos_t.T / grid.phi_count      # (nt, L+1)
    fs = f2d @ sin_t.T / grid.phi_count
    wt = grid.theta_weights / 2.0
    table = _grid_table(grid, L)
    coeffs = np.zeros((L + 1) ** 2)
    for m in range(L + 1):
        ls = np.arange(m, L + 1)
        rows = table[[_pair_index(l, m) for l in ls]]
        scale = 1.0 if m == 0 else math.sqrt(2.0)
        coeffs[[coeff_index(l, m) for l in ls]] = scale * (rows @ (wt * fc[:, m]))
        if m > 0:
            coeffs[[coeff_index(l, -m) for l in ls]] = scale * (rows @ (wt * fs[:, m]))
    return HarmonicField(L, coeffs)


def evaluate_at(f: HarmonicField, points: np.ndarray) -> np.ndarray:
    """Evaluate a field at arbitrary unit vectors (shape (..., 3)).

    Exact (up to rounding) for the stored band-limited expansion; used for
    composing fields with conformal maps where nodes lose tensor structure.
    """
    w = np.asarray(points, dtype=float)
    single = w.ndim == 1
    w = np.atleast_2d(w)
    t = np.clip(w[:, 2], -1.0, 1.0)
    s = np.sqrt(np.maximum(1.0 - t * t, 0.0))
    safe = s > 1e-300
    cos_p = np.where(safe, w[:, 0] / np.where(safe, s, 1.0), 1.0)
    sin_p = np.where(safe, w[:, 1] / np.where(safe, s, 1.0), 0.0)

    L = f.l_max
    total = np.zeros(w.shape[0])
    pmm = np.ones(w.shape[0])
    cos_m = np.ones(w.shape[0])
    sin_m = np.zeros(w.shape[0])
    for m in range(L + 1):
        if m > 0:
            pmm = pmm * s * math.sqrt((2 * m + 1) / (2 * m))
            cos_m, sin_m = cos_m * cos_p - sin_m * sin_p, sin_m * cos_p + cos_m * sin_p
        acc_a = f.coeffs[coeff_index(m, m)] * pmm
        acc_b = f.coeffs[coeff_index(m, -m)] * pmm if m > 0 else None
        p_prev, p_curr = pmm, None
        if m + 1 <= L:
            p_curr = math.sqrt(2 * m + 3) * t * pmm
            acc_a = acc_a + f.coeffs[coeff_index(m + 1, m)] * p_curr
            if m > 0:
                acc_b = acc_b + f.coeffs[coeff_index(m + 1, -m)] * p_curr
        for l in range(m + 2, L + 1):
            a = math.sqrt((2 * l + 1) * (2 * l - 1) / ((l - m) * (l + m)))
            b = math.sqrt(
                (2 * l + 1) * (l - 1 - m) * (l - 1 + m) / ((2 * l - 3) * (l - m) * (l + m))
            )
            p_prev, p_curr = p_curr, a * t * p_curr - b * p_prev
            acc_a = acc_a + f.coeffs[coeff_index(l, m)] * p_curr
            if m > 0:
                acc_b = acc_b + f.coeffs[coeff_index(l, -m)] * p_curr
        if m == 0:
            total += acc_a
        else:
            total += math.sqrt(2.0) * (acc_a * cos_m + acc_b * sin_m)
    return total[0] if single else total


def dirichlet_energy(f: HarmonicField) -> float:
    """Exact gradient energy: sum over (l, m) of l(l+1) c_lm^2."""
    l = f.degrees()
    return float(np.sum(l * (l + 1) * f.coeffs**2))


def laplacian(f: HarmonicField) -> HarmonicField:
    """Spectral Laplace-Beltrami operator: multiply each coefficient by -l(l+1)."""
    l = f.degrees()
    return HarmonicField(f.l_max, -l * (l + 1) * f.coeffs)


def project_samples(
    samples: np.ndarray, grid: SphericalGrid, l_max: int
) -> Projection:
    """Project (possibly non-band-limited) samples and estimate the tail.

    The tail estimate is the spectral energy between l_max and
    min(2*l_max, band_limit_exact), as a fraction of the total observed
    energy; for smooth data the first neglected octave dominates the tail.
    Fields whose entire energy sits at rounding scale (e.g. the zero field,
    or ln J of an isometry) report a zero tail.
    """
    L2 = min(2 * l_max, grid.band_limit_exact)
    wide = analyze(GridField(grid, samples), L2)
    field = wide.to_lmax(l_max)
    l = wide.degrees()
    spectrum = l * (l + 1) * wide.coeffs**2
    total = float(np.sum(spectrum))
    tail = float(np.sum(spectrum[(l_max + 1) ** 2:]))
    frac = tail / total if total > 1e-18 else 0.0
    return Projection(field, frac)


def parseval_mass(f: HarmonicField, grid: SphericalGrid) -> float:
    """Quadrature of u^2; equals sum of squared coefficients when the grid is exact."""
    return integrate(grid, synthesize(f, grid).samples ** 2)


def field_to_json(f: HarmonicField) -> str:
    return json.dumps(
        {"l_max": f.l_max, "coeffs": [float(c) for c in f.coeffs]}, sort_keys=True
    )


def field_from_json(s: str) -> HarmonicField:
    d = json.loads(s)
    return HarmonicField(int(d["l_max"]), np.asarray(d["coeffs"], dtype=float))
