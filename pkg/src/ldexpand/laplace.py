"""Laplace-method expansion of integrals  I(eps) = int_a^b f(z) exp(-phi(z)/eps) dz.

Around an interior nondegenerate minimum z0 of the exponent,

    I(eps) = exp(-phi(z0)/eps) * sqrt(2*pi*eps / phi''(z0)) * [A0 + eps*A1 + O(eps^2)],

with A0 = f(z0) and the first-order coefficient assembled from derivatives of
f (to order 2) and phi (to order 4) at z0:

    A1 = f''/(2*phi'')
       + 5*(phi''')^2 * f / (24*(phi'')^3)
       - phi'''' * f / (8*(phi'')^2)
       - phi''' * f' / (2*(phi'')^2).

An adaptive-quadrature reference for I(eps) serves as the independent oracle.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import NoInteriorMinimum, NonConvexAtMinimum, QuadratureNonConvergent
from .smoothfn import SmoothScalarFn

#: exp(-x) underflows to zero around x ~ 745
_EXP_UNDERFLOW = 745.0

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class LaplaceProblem:
    """An integrand/exponent pair with a validated interior minimizer."""

    f: SmoothScalarFn
    phi: SmoothScalarFn
    interval: tuple[float, float]
    z0: float

    def __post_init__(self):
        a, b = self.interval
        if not (a < self.z0 < b):
            raise ValueError(f"z0={self.z0} not interior to ({a}, {b})")
        slope = self.phi.derivative(self.z0, 1)
        if abs(slope) > 1e-10 * (1.0 + abs(self.phi(self.z0))):
            raise ValueError(f"phi'(z0)={slope:.3e} is not zero at z0={self.z0}")
        if self.phi.derivative(self.z0, 2) <= 0.0:
            raise NonConvexAtMinimum(f"phi''(z0) <= 0 at z0={self.z0}")


@dataclass(frozen=True)
class LaplaceCoefficients:
    """Expansion data: value and curvature of phi at z0 plus bracket terms."""

    exponent_value: float
    gauss_curvature: float
    order0: float
    order1: float | None
    order: int

    def __post_init__(self):
        if self.gauss_curvature <= 0.0:
            raise NonConvexAtMinimum("gauss_curvature must be positive")
        if self.order == 0 and self.order1 is not None:
            raise ValueError("order-0 coefficients carry no order1 term")
        if self.order == 1 and self.order1 is None:
            raise ValueError("order-1 coefficients require an order1 term")


def find_minimizer(phi: SmoothScalarFn, interval: tuple[float, float]) -> float:
    """Locate the interior minimizer of phi by golden section, then Newton.

    Raises NoInteriorMinimum when the search collapses onto an endpoint and
    NonConvexAtMinimum when the curvature at the candidate is not positive.
    """
    a, b = interval
    width = b - a
    lo, hi = a, b
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = phi(x1), phi(x2)
    while (hi - lo) > 1e-10 * max(1.0, abs(lo) + abs(hi)):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = phi(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = phi(x2)
    z = 0.5 * (lo + hi)
    if min(z - a, b - z) < 1e-9 * width:
        raise NoInteriorMinimum(f"minimizer search collapsed onto an endpoint of ({a}, {b})")
    # Newton polish on phi'
    for _ in range(50):
        g = phi.derivative(z, 1)
        h = phi.derivative(z, 2)
        if h <= 0.0:
            break
        step = g / h
        z_new = z - step
        if not (a < z_new < b):
            break
        z = z_new
        if abs(step) < 1e-14 * max(1.0, abs(z)):
            break
    if phi.derivative(z, 2) <= 0.0:
        raise NonConvexAtMinimum(f"phi''({z}) <= 0 at the located critical point")
    return z


def expand(problem: LaplaceProblem, order: int = 1) -> LaplaceCoefficients:
    """Zeroth- or first-order Laplace coefficients at the problem's minimizer."""
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    z0 = problem.z0
    f, phi = problem.f, problem.phi
    p2 = phi.derivative(z0, 2)
    if p2 <= 0.0:
        raise NonConvexAtMinimum(f"phi''(z0)={p2:.3e} <= 0")
    f0 = f(z0)
    if order == 0:
        return LaplaceCoefficients(phi(z0), p2, f0, None, 0)
    f1 = f.derivative(z0, 1)
    f2 = f.derivative(z0, 2)
    p3 = phi.derivative(z0, 3)
    p4 = phi.derivative(z0, 4)
    order1 = (
        f2 / (2.0 * p2)
        + 5.0 * p3**2 * f0 / (24.0 * p2**3)
        - p4 * f0 / (8.0 * p2**2)
        - p3 * f1 / (2.0 * p2**2)
    )
    return LaplaceCoefficients(phi(z0), p2, f0, order1, 1)


def evaluate(coeffs: LaplaceCoefficients, eps: float) -> float:
    """Numerical value of the expansion at a given eps > 0."""
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    bracket = coeffs.order0
    if coeffs.order == 1:
        bracket = bracket + eps * coeffs.order1
    return (
        math.exp(-coeffs.exponent_value / eps)
        * math.sqrt(2.0 * math.pi * eps / coeffs.gauss_curvature)
        * bracket
    )


def _shifted_quadrature(f, phi, interval, eps, phi_ref):
    """int f(z) exp(-(phi(z) - phi_ref)/eps) dz with underflow short-circuit."""
    cutoff = _EXP_UNDERFLOW * eps

    def integrand(z):
        d = phi(z) - phi_ref
        if d > cutoff:
            return 0.0
        return f(z) * math.exp(-d / eps)

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _abserr, info = integrate.quad(
                integrand,
                interval[0],
                interval[1],
                epsabs=1e-12,
                epsrel=1e-10,
                limit=2**15,
                full_output=1,
            )[:3]
        except integrate.IntegrationWarning as exc:
            raise QuadratureNonConvergent(str(exc)) from exc
    if "last" in info and info["last"] >= 2**15:
        raise QuadratureNonConvergent("panel budget of 2^15 subdivisions exhausted")
    return value


def quadrature_reference(
    f: SmoothScalarFn,
    phi: SmoothScalarFn,
    interval: tuple[float, float],
    eps: float,
) -> float:
    """Adaptive-quadrature value of the integral, independent of expand().

    The exponent is shifted by its (coarse-grid) minimum before exponentiating
    so the integrand is O(1) at the peak; panels where phi - phi_min exceeds
    745*eps are short-circuited to zero.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    a, b = interval
    grid = np.linspace(a, b, 2049)
    phi_min = min(float(phi(z)) for z in grid)
    value = _shifted_quadrature(f, phi, interval, eps, phi_min)
    return value * math.exp(-phi_min / eps)
