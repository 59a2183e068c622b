"""Rate-function machinery for a limiting cumulant expansion triple.

Given the triple (L0, L1, L2) with L0 strictly convex on an open interval I
containing 0, this module computes

    u*(z)   : the solution of  dL0(u) = -z,
    rate(z) : -z*u*(z) - L0(u*(z))        (Legendre-Fenchel transform),
    d(z)    : sqrt(2*rate(z)),
    z*(u)   : -dL0(u),

and the z-derivatives of  phi_u(z) = u*z + d(z)^2/2  at its critical point
z*(u), which reduce to the closed forms

    d2 = 1/L0'',   d3 = L0'''/(L0'')^3,   d4 = (3*(L0''')^2 - L0''*L0'''') / (L0'')^5.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import BracketFailure, DegenerateCurvature, DomainError
from .smoothfn import SmoothScalarFn, constant_fn

_CURVATURE_FLOOR = 1e-14


@dataclass(frozen=True)
class CGFExpansion:
    """Limiting CGF triple (L0, L1, L2) on an open domain interval.

    L0 supports derivatives to order 5, L1 to order 3, L2 to order 1
    (finite-difference backed beyond whatever closed forms are supplied).
    """

    lam0: SmoothScalarFn
    lam1: SmoothScalarFn
    lam2: SmoothScalarFn
    domain: tuple[float, float]

    def __post_init__(self):
        lo, hi = self.domain
        if not (lo < 0.0 < hi):
            raise ValueError(f"domain ({lo}, {hi}) must contain u=0")
        if abs(self.lam0(0.0)) > 1e-10:
            raise ValueError(f"L0(0)={self.lam0(0.0):.3e} must vanish")
        if abs(self.lam1(0.0)) > 1e-10:
            raise ValueError(f"L1(0)={self.lam1(0.0):.3e} must vanish")
        if abs(self.lam2(0.0)) > 1e-10:
            warnings.warn(
                f"L2(0)={self.lam2(0.0):.3e} != 0; triple is not a probability family",
                stacklevel=2,
            )

    def contains(self, u) -> bool:
        lo, hi = self.domain
        return bool(np.all((lo < np.asarray(u)) & (np.asarray(u) < hi)))


def _side_nodes(endpoint: float, n: int) -> np.ndarray:
    """Nodes between 0 and an endpoint, accumulating toward the endpoint."""
    if np.isinf(endpoint):
        sign = 1.0 if endpoint > 0 else -1.0
        return sign * np.geomspace(1e-3, 1e8, n)
    span = abs(endpoint)
    # distances from the endpoint, log-spaced down to span*1e-12
    dist = span * np.geomspace(1.0, 1e-12, n)
    return endpoint - np.sign(endpoint) * dist


@dataclass(frozen=True)
class RateData:
    """CGF triple plus a monotone bracket table for dL0 (built eagerly)."""

    source: CGFExpansion
    grid_nodes: int = 512
    _table_u: np.ndarray = field(init=False, repr=False)
    _table_g: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        lo, hi = self.source.domain
        per_side = max(self.grid_nodes // 2, 8)
        nodes = np.concatenate([_side_nodes(lo, per_side), [0.0], _side_nodes(hi, per_side)])
        nodes = np.unique(nodes)
        g = self._dlam0(nodes)
        keep = np.isfinite(g)
        nodes, g = nodes[keep], g[keep]
        if len(nodes) < 8:
            raise BracketFailure("too few finite dL0 samples to build a bracket table")
        if np.any(np.diff(g) <= 0.0):
            raise ValueError("dL0 is not strictly increasing on the sampled grid")
        object.__setattr__(self, "_table_u", nodes)
        object.__setattr__(self, "_table_g", g)

    def _dlam0(self, u):
        lam0 = self.source.lam0
        if 1 in lam0.derivatives:
            return np.asarray(lam0.derivatives[1](u), dtype=float)
        return np.array([lam0.derivative(ui, 1) for ui in np.atleast_1d(u)], dtype=float)

    def _d2lam0(self, u):
        lam0 = self.source.lam0
        if 2 in lam0.derivatives:
            return np.asarray(lam0.derivatives[2](u), dtype=float)
        return np.array([lam0.derivative(ui, 2) for ui in np.atleast_1d(u)], dtype=float)


def ustar(rd: RateData, z):
    """Solve dL0(u) = -z for u, by table bisection plus safeguarded Newton."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    target = -z_arr
    g = rd._table_g
    u_nodes = rd._table_u
    if np.any(target < g[0]) or np.any(target > g[-1]):
        bad = z_arr[(target < g[0]) | (target > g[-1])]
        raise BracketFailure(
            f"dL0 bracket table (range [{g[0]:.4g}, {g[-1]:.4g}]) cannot bracket z={bad[:4]}"
        )
    idx = np.clip(np.searchsorted(g, target) - 1, 0, len(g) - 2)
    lo = u_nodes[idx].copy()
    hi = u_nodes[idx + 1].copy()
    u = 0.5 * (lo + hi)
    tol = 1e-10 * (1.0 + np.abs(z_arr))
    for _ in range(50):
        gu = rd._dlam0(u)
        resid = gu - target
        if np.all(np.abs(resid) <= tol):
            break
        above = resid > 0.0
        hi = np.where(above, u, hi)
        lo = np.where(above, lo, u)
        d2 = rd._d2lam0(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = u - resid / d2
        ok = np.isfinite(newton) & (newton > lo) & (newton < hi) & (d2 > _CURVATURE_FLOOR)
        u = np.where(ok, newton, 0.5 * (lo + hi))
    else:
        # Newton budget exhausted: pure bisection until converged
        for _ in range(200):
            gu = rd._dlam0(u)
            resid = gu - target
            if np.all(np.abs(resid) <= tol):
                break
            above = resid > 0.0
            hi = np.where(above, u, hi)
            lo = np.where(above, lo, u)
            u = 0.5 * (lo + hi)
        else:
            raise BracketFailure("bisection failed to converge for ustar")
    return float(u[0]) if np.isscalar(z) or np.ndim(z) == 0 else u


def rate(rd: RateData, z):
    """Legendre-Fenchel transform of L0 at z (nonnegative)."""
    u = ustar(rd, z)
    value = -np.asarray(z) * u - np.asarray(rd.source.lam0(u))
    return np.maximum(value, 0.0) if np.ndim(value) else float(max(value, 0.0))


def distance(rd: RateData, z):
    """d(z) = sqrt(2 * rate(z))."""
    return np.sqrt(2.0 * rate(rd, z))


def zstar(rd: RateData, u):
    """z*(u) = -dL0(u); inverse of ustar."""
    if not rd.source.contains(u):
        raise DomainError(f"u={u} outside CGF domain {rd.source.domain}")
    value = -np.asarray(rd._dlam0(u), dtype=float)
    return float(value.reshape(-1)[0]) if np.ndim(u) == 0 else value.reshape(np.shape(u))


def phi_u_derivatives(rd: RateData, u) -> tuple[float, float, float]:
    """(d2, d3, d4) of z -> u*z + d(z)^2/2 at its critical point z*(u)."""
    if not rd.source.contains(u):
        raise DomainError(f"u={u} outside CGF domain {rd.source.domain}")
    lam0 = rd.source.lam0
    c2 = lam0.derivative(u, 2)
    if c2 <= _CURVATURE_FLOOR:
        raise DegenerateCurvature(f"L0''({u})={c2:.3e} below curvature floor")
    c3 = lam0.derivative(u, 3)
    c4 = lam0.derivative(u, 4)
    return (
        1.0 / c2,
        c3 / c2**3,
        (3.0 * c3**2 - c2 * c4) / c2**5,
    )


def gaussian_triple() -> CGFExpansion:
    """The exact triple (u^2/2, 0, 0) of the centered Gaussian family N(0, eps)."""
    lam0 = SmoothScalarFn(
        fn=lambda u: 0.5 * u * u,
        derivatives={
            1: lambda u: np.asarray(u, dtype=float) if np.ndim(u) else float(u),
            2: lambda u: np.ones_like(np.asarray(u, dtype=float)) if np.ndim(u) else 1.0,
            3: lambda u: np.zeros_like(np.asarray(u, dtype=float)) if np.ndim(u) else 0.0,
            4: lambda u: np.zeros_like(np.asarray(u, dtype=float)) if np.ndim(u) else 0.0,
            5: lambda u: np.zeros_like(np.asarray(u, dtype=float)) if np.ndim(u) else 0.0,
        },
    )
    return CGFExpansion(lam0, constant_fn(0.0), constant_fn(0.0), (-np.inf, np.inf))


def custom_triple(
    lam0: SmoothScalarFn,
    lam1: SmoothScalarFn | None = None,
    lam2: SmoothScalarFn | None = None,
    domain: tuple[float, float] = (-np.inf, np.inf),
) -> CGFExpansion:
    """Assemble a triple, defaulting the correction functions to zero."""
    return CGFExpansion(
        lam0,
        lam1 if lam1 is not None else constant_fn(0.0),
        lam2 if lam2 is not None else constant_fn(0.0),
        domain,
    )
