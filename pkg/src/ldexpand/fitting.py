"""Least-squares helpers: residual-order fits and guarded polynomial fits."""

from __future__ import annotations

import numpy as np

from .errors import FitIllConditioned

#: residuals at or below this level are treated as numerical noise
RESIDUAL_FLOOR = 1e-12


def fitted_order(eps, residuals, floor: float = RESIDUAL_FLOOR) -> float:
    """Slope of log|residual| against log(eps) by least squares.

    Points whose residual sits at the noise floor are dropped; if everything
    is at the floor the order is reported as +inf (the residual vanished
    faster than the grid can resolve).
    """
    eps = np.asarray(eps, dtype=float)
    res = np.abs(np.asarray(residuals, dtype=float))
    keep = res > floor
    if keep.sum() < 2:
        return float("inf")
    slope, _ = np.polyfit(np.log(eps[keep]), np.log(res[keep]), 1)
    return float(slope)


def powers_fit(x, y, powers, cond_limit: float = 1e12):
    """Least squares on the monomial basis {x**p : p in powers}.

    The solve uses a column-scaled design matrix; its condition number is
    what is checked against `cond_limit`.  Returns the coefficient array
    (aligned with `powers`) and the max absolute residual.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    powers = list(powers)
    V = np.column_stack([x**p for p in powers])
    scale = np.linalg.norm(V, axis=0)
    scale[scale == 0.0] = 1.0
    Vs = V / scale
    cond = np.linalg.cond(Vs)
    if not np.isfinite(cond) or cond > cond_limit:
        raise FitIllConditioned(
            f"Vandermonde condition number {cond:.3e} exceeds {cond_limit:.1e}"
        )
    coeffs_scaled, *_ = np.linalg.lstsq(Vs, y, rcond=None)
    coeffs = coeffs_scaled / scale
    residual = float(np.max(np.abs(V @ coeffs - y))) if len(x) else 0.0
    return coeffs, residual


def polynomial_fit(x, y, degree: int, cond_limit: float = 1e12):
    """Least-squares polynomial fit (constant-first coefficients)."""
    return powers_fit(x, y, range(degree + 1), cond_limit)


def richardson_limit(t, values, levels: int | None = None) -> float:
    """Extrapolate values on a dyadic grid t, t/2, t/4, ... to t -> 0.

    Assumes an error expansion in integer powers of t. `t` must be sorted
    decreasing with ratio 1/2 between neighbours.
    """
    t = np.asarray(t, dtype=float)
    vals = list(np.asarray(values, dtype=float))
    if len(t) != len(vals) or len(t) < 2:
        raise ValueError("need at least two grid points")
    ratios = t[1:] / t[:-1]
    if np.any(np.abs(ratios - 0.5) > 1e-9):
        raise ValueError("grid is not dyadic (ratio 1/2) and decreasing")
    n_levels = len(vals) - 1 if levels is None else min(levels, len(vals) - 1)
    current = vals
    for k in range(1, n_levels + 1):
        factor = 2.0**k
        current = [
            (factor * current[j + 1] - current[j]) / (factor - 1.0)
            for j in range(len(current) - 1)
        ]
    return float(current[-1])
