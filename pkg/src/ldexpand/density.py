"""Construction of the equivalent family  f_eps(z) = N_eps(z) * (C0(z) + eps*C1(z)).

Here N_eps(z) = (2*pi*eps)^(-1/2) * exp(-d(z)^2 / (2*eps)) is the heat-kernel
factor built on the rate distance d, and

    C0(z) = exp(L1(u*(z))) / sqrt(L0''(u*(z))),
    C1(z) = C0*L2(u*) - C0''*L0''/2 - 5*C0*(L0''')^2/(24*(L0'')^3)
          + C0*(3*(L0''')^2 - L0''*L0'''')/(8*(L0'')^3) + C0'*L0'''/(2*L0''),

with every L-derivative taken at u*(z) and C0', C0'' taken in z by finite
differences.  certify_equivalence checks numerically that the truncated
exponential transform of f_eps matches exp(L0/eps)*exp(L1)*(1+eps*L2) up to
O(eps^2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCurvature, NegativeDensityWarning, WindowError
from .fitting import fitted_order
from .laplace import _shifted_quadrature
from .legendre import RateData, phi_u_derivatives, rate, ustar, zstar
from .smoothfn import finite_difference

_CURVATURE_FLOOR = 1e-14
#: |ratio - 1| at or below this level counts as exact to quadrature tolerance
_EXACTNESS_FLOOR = 1e-10


@dataclass(frozen=True)
class EquivalentFamily:
    """Equivalent-family evaluator attached to a rate-data object."""

    rd: RateData

    @property
    def cgf(self):
        return self.rd.source

    def window(self, n: int) -> tuple[float, float]:
        """J_n = {u : z*(u) in (-n, n)}, realized through the critical point."""
        if n < 1:
            raise ValueError("window index n must be >= 1")
        return (ustar(self.rd, float(n)), ustar(self.rd, -float(n)))

    def in_window(self, u: float, n: int) -> bool:
        lo, hi = self.window(n)
        return lo < u < hi


def c0(family: EquivalentFamily, z: float) -> float:
    """C0(z) = exp(L1(u*(z))) / sqrt(L0''(u*(z))).

    The Laplace factor of the transform at the critical point is
    sqrt(1/phi_u'') = sqrt(L0''), so this normalization is what makes the
    product reproduce exp(L1); it is also the only choice under which the
    scaled Gaussian family (variance s^2*eps) returns its exact density.
    """
    cgf = family.cgf
    u = ustar(family.rd, z)
    curv = cgf.lam0.derivative(u, 2)
    if curv <= _CURVATURE_FLOOR:
        raise DegenerateCurvature(f"L0''(u*({z}))={curv:.3e} below curvature floor")
    return math.exp(cgf.lam1(u)) / math.sqrt(curv)


def c1(family: EquivalentFamily, z: float) -> float:
    """The five-term first-order coefficient; C0-derivatives by z-differences."""
    cgf = family.cgf
    u = ustar(family.rd, z)
    curv = cgf.lam0.derivative(u, 2)
    if curv <= _CURVATURE_FLOOR:
        raise DegenerateCurvature(f"L0''(u*({z}))={curv:.3e} below curvature floor")
    d3 = cgf.lam0.derivative(u, 3)
    d4 = cgf.lam0.derivative(u, 4)
    c0_here = c0(family, z)
    c0_fn = lambda zz: c0(family, zz)
    dc0 = finite_difference(c0_fn, z, 1)
    d2c0 = finite_difference(c0_fn, z, 2)
    return (
        c0_here * cgf.lam2(u)
        - d2c0 * curv / 2.0
        - 5.0 * c0_here * d3**2 / (24.0 * curv**3)
        + c0_here * (3.0 * d3**2 - curv * d4) / (8.0 * curv**3)
        + dc0 * d3 / (2.0 * curv)
    )


def f_eps(family: EquivalentFamily, z: float, eps: float) -> float:
    """Family value at (z, eps); negative values are reported, not clamped."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    bracket = c0(family, z) + eps * c1(family, z)
    if bracket < 0.0:
        warnings.warn(
            f"f_eps({z}, {eps}) is negative (C0 + eps*C1 = {bracket:.3e})",
            NegativeDensityWarning,
            stacklevel=2,
        )
    dsq = 2.0 * rate(family.rd, z)
    return math.exp(-dsq / (2.0 * eps)) / math.sqrt(2.0 * math.pi * eps) * bracket


def c0_at_tilt(family: EquivalentFamily, u: float) -> float:
    """C0(z*(u)) written directly in the tilt variable."""
    curv = family.cgf.lam0.derivative(u, 2)
    if curv <= _CURVATURE_FLOOR:
        raise DegenerateCurvature(f"L0''({u})={curv:.3e} below curvature floor")
    return math.exp(family.cgf.lam1(u)) / math.sqrt(curv)


def c1_at_tilt(family: EquivalentFamily, u: float) -> float:
    """C1(z*(u)) through the critical-point derivatives of phi_u."""
    z = zstar(family.rd, u)
    p2, p3, p4 = phi_u_derivatives(family.rd, u)
    c0_fn = lambda zz: c0(family, zz)
    c0_here = c0_fn(z)
    dc0 = finite_difference(c0_fn, z, 1)
    d2c0 = finite_difference(c0_fn, z, 2)
    return (
        c0_here * family.cgf.lam2(u)
        - d2c0 / (2.0 * p2)
        - 5.0 * p3**2 * c0_here / (24.0 * p2**3)
        + p4 * c0_here / (8.0 * p2**2)
        + p3 * dc0 / (2.0 * p2**2)
    )


@dataclass(frozen=True)
class CertifyReport:
    """Residuals |ratio - 1| of the transform identity over an eps grid."""

    u: float
    n: int
    eps: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    order: float
    exact_to_floor: bool

    @property
    def passed(self) -> bool:
        return self.exact_to_floor or self.order >= 1.8


def certify_equivalence(
    family: EquivalentFamily,
    n: int,
    u: float,
    eps_grid,
) -> CertifyReport:
    """Quadrature check of order-1 equivalence on the window (-n, n).

    For each eps the truncated transform  int_{-n}^{n} exp(-u z/eps) f_eps dz
    is divided by  exp(L0(u)/eps) * exp(L1(u)) * (1 + eps*L2(u));  the report
    carries |ratio - 1| per eps and the fitted order in eps.
    """
    if not family.in_window(u, n):
        raise WindowError(f"u={u} outside J_{n}={family.window(n)}")
    cgf = family.cgf
    lam0_u = cgf.lam0(u)
    target_factor = math.exp(cgf.lam1(u))
    phi_fn = lambda z: u * z + rate(family.rd, z)
    eps_arr = np.asarray(sorted(eps_grid, reverse=True), dtype=float)
    residuals = np.empty_like(eps_arr)
    for i, eps in enumerate(eps_arr):
        bracket_fn = lambda z, _e=eps: c0(family, z) + _e * c1(family, z)
        # exponent minimum on (-n, n) is -L0(u), attained at z*(u) in the window
        integral = _shifted_quadrature(bracket_fn, phi_fn, (-n, n), eps, -lam0_u)
        value = integral / math.sqrt(2.0 * math.pi * eps)
        target = target_factor * (1.0 + eps * cgf.lam2(u))
        residuals[i] = abs(value / target - 1.0)
    exact = bool(np.all(residuals <= _EXACTNESS_FLOOR))
    order = fitted_order(eps_arr, residuals, floor=_EXACTNESS_FLOOR)
    return CertifyReport(
        u=u, n=n, eps=eps_arr, residuals=residuals, order=order, exact_to_floor=exact
    )
