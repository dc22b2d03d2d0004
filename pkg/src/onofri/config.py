"""Tolerance scaling shared by library invariant checks and the CLI."""

from __future__ import annotations

import os

__all__ = ["tol_scale", "scaled"]

ENV_VAR = "ONOFRI_TOL_SCALE"


def tol_scale() -> float:
    """Global tolerance multiplier, read from ONOFRI_TOL_SCALE (default 1)."""
    raw = os.environ.get(ENV_VAR)
    if raw is None:
        return 1.0
    value = float(raw)
    if value <= 0:
        raise ValueError(f"{ENV_VAR} must be positive, got {raw!r}")
    return value


def scaled(tolerance: float) -> float:
    return tolerance * tol_scale()
