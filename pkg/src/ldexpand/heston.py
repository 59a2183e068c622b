"""Closed-form small-time CGF expansion for the correlated Heston log-price.

Model (log-price X, variance V):

    dX = (r + k*V) dt + sqrt(V) dW1,
    dV = (a - b*V) dt + sigma*sqrt(V) dW2,      d<W1,W2> = rho dt,

with r, k real, a, b >= 0, sigma > 0, -1 < rho < 1, started at (x0, v0).

The rescaled CGF  L(u, t) = t * log E[exp(-(u/t) X_t)]  admits, for u inside
an explicit interval around 0, the expansion

    L(u, t) = L0(u) + t*L1(u) + t^2*L2(u) + O(t^3),

whose coefficients this module evaluates in closed form, together with the
domain interval, first two derivative displays of L0, the critical point
u*(x), and the Taylor tables behind L1 and L2.

The exact finite-t function L(u, t) is evaluated through the moment
generating function components C(u, t), D(u, t) of X_t, either in the
real trigonometric regime or through a complex-arithmetic fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BracketFailure, BranchFault, DomainError, ExplosionRegion
from .legendre import CGFExpansion
from .smoothfn import SmoothScalarFn

_IMAG_TOL = 1e-9
_SMALL_U = 1e-4


@dataclass(frozen=True)
class HestonParams:
    """Model constants; theta = sigma*sqrt(1-rho^2)/2 is derived."""

    r: float
    k: float
    a: float
    b: float
    sigma: float
    rho: float
    x0: float
    v0: float

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")
        if not (-1.0 < self.rho < 1.0):
            raise ValueError("rho must lie in (-1, 1)")
        if self.a < 0.0 or self.b < 0.0:
            raise ValueError("a and b must be nonnegative")
        if self.v0 <= 0.0:
            raise ValueError("v0 must be positive")

    @property
    def theta(self) -> float:
        return self.sigma * math.sqrt(1.0 - self.rho**2) / 2.0


@dataclass(frozen=True)
class DomainInfo:
    """Endpoints of the CGF domain: adjacent roots of the normalized denominator."""

    u_min: float
    u_max: float

    def contains(self, u) -> bool:
        return bool(np.all((self.u_min < np.asarray(u)) & (np.asarray(u) < self.u_max)))


def shat(p: HestonParams, u):
    """Normalized small-time denominator sqrt(1-rho^2)*cos(theta*u) + rho*sin(theta*u)."""
    q = math.sqrt(1.0 - p.rho**2)
    return q * np.cos(p.theta * u) + p.rho * np.sin(p.theta * u)


@lru_cache(maxsize=128)
def domain(p: HestonParams) -> DomainInfo:
    """Largest negative and smallest positive roots of shat, Newton-polished.

    arccos(rho) picks the branch that works for both signs of rho; for rho=0
    the endpoints reduce to -pi/sigma and pi/sigma.
    """
    th = p.theta
    beta = math.acos(p.rho)
    endpoints = []
    for guess in (-beta / th, (math.pi - beta) / th):
        u = guess
        q = math.sqrt(1.0 - p.rho**2)
        for _ in range(8):
            f = q * math.cos(th * u) + p.rho * math.sin(th * u)
            fp = th * (-q * math.sin(th * u) + p.rho * math.cos(th * u))
            if fp == 0.0:
                break
            step = f / fp
            u -= step
            if abs(step) < 1e-15 * (1.0 + abs(u)):
                break
        if abs(q * math.cos(th * u) + p.rho * math.sin(th * u)) > 1e-12:
            raise ArithmeticError("domain endpoint failed to verify as a root")
        endpoints.append(u)
    return DomainInfo(endpoints[0], endpoints[1])


def _log_continuous(g, d, t, n_sub: int = 16):
    """log((d*cosh(d*s/2) + g*sinh(d*s/2))/d) at s=t, phase-unwrapped along s."""
    s = np.linspace(0.0, t, n_sub + 1)
    w = d * np.cosh(d * s / 2.0) + g * np.sinh(d * s / 2.0)
    if np.any(np.abs(w) < 1e-300):
        raise ExplosionRegion("MGF denominator vanished along the time path")
    # w(0) = d, so the continuous log of w(t)/d starts at 0
    phases = np.unwrap(np.angle(w))
    return np.log(np.abs(w[-1]) / abs(d)) + 1j * (phases[-1] - phases[0])


def mgf_components(p: HestonParams, u: float, t: float) -> tuple[float, float]:
    """C(u, t) and D(u, t) with E[exp(u*X_t)] = exp(C + D*v0 + u*x0).

    Evaluated in the branch-robust hyperbolic form

        C = r*u*t + (a/sigma^2) * [A*t - 2*log((d*cosh(dt/2) + A*sinh(dt/2))/d)],
        D = (A^2 - d^2)/sigma^2 * sinh(dt/2) / (d*cosh(dt/2) + A*sinh(dt/2)),

    with A = b - rho*sigma*u and d the principal complex square root of
    A^2 - sigma^2*(2*k*u + u^2); the logarithm's phase is tracked
    continuously in t.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    if u == 0.0:
        return 0.0, 0.0
    sig = p.sigma
    A = p.b - p.rho * sig * u
    d = np.sqrt(complex(A * A - sig * sig * (2.0 * p.k * u + u * u)))
    if abs(d) < 1e-300:
        # degenerate discriminant: d -> 0 limit of the hyperbolic form
        denom = 1.0 + A * t / 2.0
        if abs(denom) < 1e-14:
            raise ExplosionRegion("MGF denominator vanished (degenerate case)")
        log_term = np.log(complex(denom))
        D_c = (A * A - 0.0) / sig**2 * (t / 2.0) / denom
    else:
        half = d * t / 2.0
        denom = d * np.cosh(half) + A * np.sinh(half)
        if abs(denom) < 1e-14 * (abs(d) + abs(A)):
            raise ExplosionRegion(f"MGF denominator vanished at u={u}, t={t}")
        log_term = _log_continuous(A, d, t)
        D_c = (A * A - d * d) / sig**2 * np.sinh(half) / denom
    C_c = p.r * u * t + (p.a / sig**2) * (A * t - 2.0 * log_term)
    for name, val in (("C", C_c), ("D", D_c)):
        if abs(val.imag) > _IMAG_TOL * (1.0 + abs(val.real)):
            raise BranchFault(f"{name}(u={u}, t={t}) has imaginary residue {val.imag:.3e}")
    return float(C_c.real), float(D_c.real)


def _lambda_scaled_complex(p: HestonParams, u: float, t: float) -> float:
    C, D = mgf_components(p, -u / t, t)
    return t * C + t * D * p.v0 - u * p.x0


def lambda_scaled(p: HestonParams, u: float, t: float) -> float:
    """L(u, t) = t*C(-u/t, t) + t*D(-u/t, t)*v0 - u*x0 for u in the domain.

    Uses the trigonometric forms when S(u, t)^2 > 0, the complex MGF path
    otherwise.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    info = domain(p)
    if not info.contains(u):
        raise DomainError(f"u={u} outside domain ({info.u_min:.6g}, {info.u_max:.6g})")
    if u == 0.0:
        return 0.0
    sig, b, k, rho = p.sigma, p.b, p.k, p.rho
    S2 = 0.25 * (
        u * u * (1.0 - rho * rho) * sig * sig
        - 2.0 * t * u * (k * sig * sig + b * rho * sig)
        - t * t * b * b
    )
    if S2 <= 0.0:
        return _lambda_scaled_complex(p, u, t)
    S = math.sqrt(S2)
    V = 2.0 * S * math.cos(S) + (b * t + rho * sig * u) * math.sin(S)
    if V <= 0.0:
        raise ExplosionRegion(f"explosion-region denominator {V:.3e} <= 0 at u={u}, t={t}")
    tC = -t * p.r * u + t * (p.a / sig**2) * (
        b * t + rho * sig * u - 2.0 * math.log(V / (2.0 * S))
    )
    tD = (u * u - 2.0 * t * k * u) * math.sin(S) / V
    return tC + tD * p.v0 - u * p.x0


def _require_domain(p: HestonParams, u):
    info = domain(p)
    if not info.contains(u):
        raise DomainError(f"u={u} outside domain ({info.u_min:.6g}, {info.u_max:.6g})")


def lambda0(p: HestonParams, u):
    """L0(u) = v0*u*sin(theta*u) / (sigma*shat(u)) - x0*u."""
    _require_domain(p, u)
    u = np.asarray(u, dtype=float) if np.ndim(u) else u
    value = p.v0 * u * np.sin(p.theta * u) / (p.sigma * shat(p, u)) - p.x0 * u
    return float(value) if np.ndim(value) == 0 else value


def dlambda0(p: HestonParams, u):
    """First derivative of L0 (explicit display)."""
    _require_domain(p, u)
    th = p.theta
    q = math.sqrt(1.0 - p.rho**2)
    num = (
        p.rho * (1.0 - np.cos(2.0 * th * u))
        + q * np.sin(2.0 * th * u)
        + p.sigma * (1.0 - p.rho**2) * u
    )
    value = (p.v0 / (2.0 * p.sigma)) * num / shat(p, u) ** 2 - p.x0
    return float(value) if np.ndim(value) == 0 else value


def d2lambda0(p: HestonParams, u):
    """Second derivative of L0 (explicit display); positive on the domain."""
    _require_domain(p, u)
    th = p.theta
    sig = p.sigma
    q = math.sqrt(1.0 - p.rho**2)
    one_m = 1.0 - p.rho**2
    s, c = np.sin(th * u), np.cos(th * u)
    num = (2.0 * th + sig * q) * (p.rho * q * s + one_m * c) + 2.0 * sig * th * one_m * u * (
        q * s - p.rho * c
    )
    value = p.v0 * num / (2.0 * sig * shat(p, u) ** 3)
    return float(value) if np.ndim(value) == 0 else value


def ustar_heston(p: HestonParams, x: float) -> float:
    """The unique u in the domain with dL0(u) = -x, by bracketed Newton."""
    info = domain(p)
    h0 = dlambda0(p, 0.0) + x
    if h0 == 0.0:
        return 0.0
    # bracket between 0 and the endpoint on the correct side
    endpoint = info.u_min if h0 > 0.0 else info.u_max
    lo, hi = (0.0, 0.0)
    prev = 0.0
    for j in range(1, 60):
        cand = endpoint - endpoint * 2.0**-j
        h = dlambda0(p, cand) + x
        if np.isfinite(h) and (h > 0.0) != (h0 > 0.0):
            lo, hi = (min(prev, cand), max(prev, cand))
            break
        prev = cand
    else:
        raise BracketFailure(f"could not bracket the critical point for x={x}")
    u = 0.5 * (lo + hi)
    tol = 1e-10 * (1.0 + abs(x))
    for _ in range(100):
        h = dlambda0(p, u) + x
        if abs(h) <= tol:
            return u
        # dL0 is strictly increasing, so the residual's sign locates the root
        if h > 0.0:
            hi = u
        else:
            lo = u
        curv = d2lambda0(p, u)
        newton = u - h / curv if curv > 0.0 else math.nan
        u = newton if (np.isfinite(newton) and lo < newton < hi) else 0.5 * (lo + hi)
    raise BracketFailure(f"critical-point iteration failed to converge for x={x}")


def _trig_parts(p: HestonParams, u):
    q = math.sqrt(1.0 - p.rho**2)
    s = np.sin(p.theta * u)
    c = np.cos(p.theta * u)
    return q, s, c, q * c + p.rho * s


def lambda1(p: HestonParams, u):
    """First correction coefficient L1(u), explicit in the model parameters."""
    _require_domain(p, u)
    sig, k, b, rho = p.sigma, p.k, p.b, p.rho
    q, s, c, sh = _trig_parts(p, u)
    kb = k * sig + b * rho
    E1 = -u * sig * kb / 2.0
    E2 = -2.0 * k * sig * q + kb / q
    E3 = -(2.0 * k * rho * sig + b + u * sig * kb / 2.0)
    value = (
        (p.a * rho / sig - p.r) * u
        - (2.0 * p.a / sig**2) * np.log(sh / q)
        + p.v0 * (E1 * c * c + E2 * c * s + E3 * s * s) / (sig**2 * sh**2)
    )
    return float(value) if np.ndim(value) == 0 else value


def _lambda2_closed(p: HestonParams, u):
    """Second correction coefficient away from u=0.

    The four-block display assembled from the Taylor tables; the published
    statement of this formula misprints two blocks (an extra factor u in the
    constant part of I1, a wrong first term in I3) -- the versions here are
    re-derived from the table identities and validated against the finite-t
    fit of L(u, t).
    """
    sig, k, b, rho = p.sigma, p.k, p.b, p.rho
    q, s, c, sh = _trig_parts(p, u)
    one_m = 1.0 - rho**2
    kb = k * sig + b * rho
    K = b * b * one_m + kb * kb
    I0 = (-u * rho * sig * q * kb) * c + (2.0 * b + 2.0 * rho * k * sig + u * sig * kb * one_m) * s
    I1 = (
        -K / (2.0 * one_m)
        + (kb * kb / one_m) * s * s
        + (K / (u * sig * one_m**1.5) + b * kb / q) * s * c
    )
    I2 = 2.0 * (2.0 * k * sig * q - (2.0 + rho * sig * u) * kb / (2.0 * q)) * c + 2.0 * (
        2.0 * k * rho * sig + b + u * sig * kb / 2.0
    ) * s
    I3 = u * sig * kb / 2.0 + b * s * s - (kb / q) * s * c
    return (
        p.a * b / sig**2
        - (p.a / (sig**3 * one_m * u)) * I0 / sh
        + (p.v0 / 2.0) * I1 / (sig**2 * sh**2)
        + (p.v0 / 2.0) * I2 * I3 / (u * sig**3 * sh**3)
    )


def lambda2(p: HestonParams, u):
    """Second correction coefficient L2(u).

    The closed form has removable 1/u singularities; for |u| < 1e-4 the value
    is taken from the quadratic c1*u + c2*u^2 fitted through L2(+-1e-4),
    L2(+-2e-4) and anchored at L2(0) = 0.
    """
    _require_domain(p, u)
    u_arr = np.asarray(u, dtype=float)
    scalar = np.ndim(u_arr) == 0
    u_arr = np.atleast_1d(u_arr)
    out = np.empty_like(u_arr)
    far = np.abs(u_arr) >= _SMALL_U
    if np.any(far):
        out[far] = _lambda2_closed(p, u_arr[far])
    if np.any(~far):
        us = np.array([-2.0 * _SMALL_U, -_SMALL_U, _SMALL_U, 2.0 * _SMALL_U])
        vals = _lambda2_closed(p, us)
        design = np.column_stack([us, us**2])
        coeff, *_ = np.linalg.lstsq(design, vals, rcond=None)
        near = u_arr[~far]
        out[~far] = coeff[0] * near + coeff[1] * near**2
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class TaylorTable:
    """Small-time Taylor coefficients behind L1 and L2 at a fixed u != 0.

    c: coefficients of S(u, t); U/W: of sin S and cos S; V: of the
    denominator 2*S*cos(S) + (b*t + rho*sigma*u)*sin(S); T: of t*D(-u/t, t);
    L: of the log argument; Q: numerator of T2; E, I: the assembled display
    coefficients entering L1 and L2.
    """

    u: float
    c0: float
    c1: float
    c2: float
    U0: float
    U1: float
    U2: float
    W0: float
    W1: float
    W2: float
    V0: float
    V1: float
    V2: float
    T0: float
    T1: float
    T2: float
    L0: float
    L1: float
    Q: float
    E1: float
    E2: float
    E3: float
    I0: float
    I1: float
    I2: float
    I3: float

    def __post_init__(self):
        scale = 1.0 + abs(self.u) ** 2 * abs(self.U0) + abs(self.V0)
        if abs(self.T0 * self.V0 - self.u**2 * self.U0) > 1e-12 * scale:
            raise ArithmeticError("Taylor table inconsistency: T0*V0 != u^2*U0")


def taylor_table(p: HestonParams, u: float) -> TaylorTable:
    """All small-time Taylor coefficients at u (the |u|-valued displays)."""
    _require_domain(p, u)
    if u == 0.0:
        raise DomainError("Taylor table requires u != 0")
    sig, k, b, rho = p.sigma, p.k, p.b, p.rho
    q = math.sqrt(1.0 - rho**2)
    one_m = 1.0 - rho**2
    kb = k * sig + b * rho
    K = b * b * one_m + kb * kb
    au = abs(u)
    sgn = math.copysign(1.0, u)
    c0 = au * sig * q / 2.0
    c1 = -sgn * kb / (2.0 * q)
    c2 = -(au / u**2) * K / (2.0 * sig * one_m**1.5)
    s0, w0 = math.sin(c0), math.cos(c0)
    U0, U1 = s0, c1 * w0
    U2 = c2 * w0 - c1 * c1 * s0
    W0, W1 = w0, -c1 * s0
    W2 = -(c2 * s0 + c1 * c1 * w0)
    V0 = 2.0 * c0 * W0 + rho * sig * u * U0
    V1 = 2.0 * c0 * W1 + 2.0 * c1 * W0 + b * U0 + rho * sig * u * U1
    V2 = 2.0 * c0 * W2 + 4.0 * c1 * W1 + 2.0 * c2 * W0 + 2.0 * b * U1 + rho * sig * u * U2
    T0 = u**2 * U0 / V0
    T1 = (u**2 * U1 * V0 - 2.0 * k * u * U0 * V0 - u**2 * U0 * V1) / V0**2
    Q = (
        u**2 * U2 * V0**2
        - 4.0 * k * u * U1 * V0**2
        - u**2 * U0 * V0 * V2
        - 2.0 * u**2 * U1 * V0 * V1
        + 4.0 * k * u * U0 * V0 * V1
        + 2.0 * u**2 * U0 * V1**2
    )
    T2 = Q / V0**3
    L0 = V0 / (2.0 * c0)
    L1 = (c0 * V1 - c1 * V0) / (2.0 * c0**2)
    s = math.sin(p.theta * u)
    c = math.cos(p.theta * u)
    E1 = -u * sig * kb / 2.0
    E2 = -2.0 * k * sig * q + kb / q
    E3 = -(2.0 * k * rho * sig + b + u * sig * kb / 2.0)
    I0 = (-u * rho * sig * q * kb) * c + (2.0 * b + 2.0 * rho * k * sig + u * sig * kb * one_m) * s
    I1 = (
        -K / (2.0 * one_m)
        + (kb * kb / one_m) * s * s
        + (K / (u * sig * one_m**1.5) + b * kb / q) * s * c
    )
    I2 = 2.0 * (2.0 * k * sig * q - (2.0 + rho * sig * u) * kb / (2.0 * q)) * c + 2.0 * (
        2.0 * k * rho * sig + b + u * sig * kb / 2.0
    ) * s
    I3 = u * sig * kb / 2.0 + b * s * s - (kb / q) * s * c
    return TaylorTable(
        u=u, c0=c0, c1=c1, c2=c2,
        U0=U0, U1=U1, U2=U2, W0=W0, W1=W1, W2=W2,
        V0=V0, V1=V1, V2=V2, T0=T0, T1=T1, T2=T2,
        L0=L0, L1=L1, Q=Q, E1=E1, E2=E2, E3=E3,
        I0=I0, I1=I1, I2=I2, I3=I3,
    )


def lambda1_from_table(p: HestonParams, u: float) -> float:
    """L1 assembled from the Taylor table (pre-simplification route)."""
    tab = taylor_table(p, u)
    return (p.a * p.rho / p.sigma - p.r) * u - (2.0 * p.a / p.sigma**2) * math.log(
        tab.L0
    ) + p.v0 * tab.T1


def lambda2_from_table(p: HestonParams, u: float) -> float:
    """L2 assembled from the Taylor table (pre-simplification route)."""
    tab = taylor_table(p, u)
    return (
        p.a * p.b / p.sigma**2
        - (2.0 * p.a / p.sigma**2) * (tab.L1 / tab.L0)
        + (p.v0 / 2.0) * tab.T2
    )


def heston_cgf(p: HestonParams) -> CGFExpansion:
    """The CGF triple (L0, L1, L2) as smooth functions on the domain interval."""
    info = domain(p)
    lam0 = SmoothScalarFn(
        fn=lambda u: lambda0(p, u),
        derivatives={1: lambda u: dlambda0(p, u), 2: lambda u: d2lambda0(p, u)},
    )
    lam1 = SmoothScalarFn(fn=lambda u: lambda1(p, u))
    lam2 = SmoothScalarFn(fn=lambda u: lambda2(p, u))
    return CGFExpansion(lam0, lam1, lam2, (info.u_min, info.u_max))


def toy_params() -> HestonParams:
    """Uncorrelated unit-parameter model used across the validation suite."""
    return HestonParams(r=0.0, k=-0.5, a=1.0, b=1.0, sigma=1.0, rho=0.0, x0=0.0, v0=1.0)
