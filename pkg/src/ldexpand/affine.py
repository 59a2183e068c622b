"""Generalized Riccati systems for continuous affine diffusions, homogenized.

A continuous affine diffusion on the canonical state space R+^m x R^n is
described by quadratic polynomials

    F(u)   = <u, a u>/2 + <b, u> - c,
    R_i(u) = <u, alpha^i u>/2 + <beta^i, u> - gamma^i,

and its exponential transform satisfies the ODE system

    d/dt phi = F(psi),  phi(u, 0) = 0;     d/dt psi = R(psi),  psi(u, 0) = u.

The homogenization  psi_eps(u, t) = eps * psi(u/eps, eps*t)  turns R into
R_eps(u) = eps^2 R(u/eps) = R0(u) + eps R1(u) + (eps^2/2) R2(u), split by
polynomial degree, and psi_eps expands as a power series in eps whose leading
coefficients solve

    d/dt psi0 = R0(psi0),                     psi0(u, 0) = u,
    d/dt psi1 = DR0(psi0) psi1 + R1(psi0),    psi1(u, 0) = 0,

with the analogous pair for phi.  Coefficients of order two and higher are
recovered by a polynomial fit in eps.  At a state x the series
phi_eps(-u, 1) + <x, psi_eps(-u, 1)> collects the small-time CGF coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BlowUp
from .fitting import powers_fit
from .ode import OdeResult, integrate_dp45

DEFAULT_TOL = 1e-10
BLOW_UP_NORM = 1e8


@dataclass(frozen=True)
class AffineDiffusion:
    """Quadratic coefficient tables of F and R on R+^m x R^n (no jumps).

    alpha[i] is the symmetric matrix of R_i's quadratic part, beta[i] its
    linear coefficients, gamma[i] its constant (entering with a minus sign).
    """

    m: int
    n: int
    a: np.ndarray
    b: np.ndarray
    c: float
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        d = self.m + self.n
        a = np.asarray(self.a, dtype=float)
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if a.shape != (d, d) or alpha.shape != (d, d, d) or beta.shape != (d, d):
            raise ValueError("coefficient tables do not match the state dimension")
        if b.shape != (d,) or gamma.shape != (d,):
            raise ValueError("vector coefficients do not match the state dimension")
        if not np.allclose(a, a.T, atol=1e-12):
            raise ValueError("a must be symmetric")
        for i in range(d):
            if not np.allclose(alpha[i], alpha[i].T, atol=1e-12):
                raise ValueError(f"alpha[{i}] must be symmetric")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)
        self._check_admissible()

    @property
    def dim(self) -> int:
        return self.m + self.n

    def _check_admissible(self, samples: int = 100):
        """Sampled positive-semidefiniteness of A(x) and sign of C(x) on D."""
        rng = np.random.default_rng(2718281828)
        d = self.dim
        x = rng.standard_normal((samples, d)) * rng.choice([0.1, 1.0, 10.0], size=(samples, 1))
        x[:, : self.m] = np.abs(x[:, : self.m])
        for xi in x:
            A = self.a + np.tensordot(xi, self.alpha, axes=1)
            min_eig = float(np.linalg.eigvalsh(A)[0])
            if min_eig < -1e-10 * (1.0 + np.abs(A).max()):
                raise ValueError(f"A(x) not positive semidefinite at x={xi}")
            C = self.c + float(xi @ self.gamma)
            if C > 1e-12:
                raise ValueError(f"C(x)={C:.3e} > 0 at x={xi}")

    # full fields
    def F(self, u: np.ndarray) -> float:
        u = np.asarray(u, dtype=float)
        return 0.5 * u @ self.a @ u + self.b @ u - self.c

    def R(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        quad = 0.5 * np.einsum("ijk,j,k->i", self.alpha, u, u)
        return quad + self.beta @ u - self.gamma

    # degree-graded pieces of the homogenized fields
    def F0(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * u @ self.a @ u

    def F1(self, u):
        return self.b @ np.asarray(u, dtype=float)

    def R0(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * np.einsum("ijk,j,k->i", self.alpha, u, u)

    def R1(self, u):
        return self.beta @ np.asarray(u, dtype=float)

    def R0_jac(self, u):
        return np.einsum("ijk,k->ij", self.alpha, np.asarray(u, dtype=float))

    def F_eps(self, u, eps: float) -> float:
        return eps**2 * self.F(np.asarray(u, dtype=float) / eps)

    def R_eps(self, u, eps: float) -> np.ndarray:
        return eps**2 * self.R(np.asarray(u, dtype=float) / eps)


@dataclass(frozen=True)
class RiccatiSolution:
    """Trajectory of (psi, phi) for one initial tilt u on [0, T]."""

    u: np.ndarray
    T: float
    _result: OdeResult = field(repr=False)
    blow_up_time: float | None = None

    def psi(self, t: float) -> np.ndarray:
        return self._result.interpolate(t)[:-1]

    def phi(self, t: float) -> float:
        return float(self._result.interpolate(t)[-1])

    @property
    def psi_final(self) -> np.ndarray:
        return self._result.y_final[:-1]

    @property
    def phi_final(self) -> float:
        return float(self._result.y_final[-1])

    @property
    def stats(self) -> tuple[int, int, float]:
        return (self._result.steps, self._result.rejected, self._result.tol)


def _integrate_joint(field_psi, field_phi, u, T, tol) -> OdeResult:
    u = np.asarray(u, dtype=float)
    d = u.size

    def field(_t, y):
        psi = y[:d]
        out = np.empty(d + 1)
        out[:d] = field_psi(psi)
        out[d] = field_phi(psi)
        return out

    y0 = np.concatenate([u, [0.0]])
    return integrate_dp45(field, y0, T, tol=tol, blow_up_norm=BLOW_UP_NORM)


def solve_riccati(
    model: AffineDiffusion,
    u,
    T: float,
    tol: float = DEFAULT_TOL,
) -> RiccatiSolution:
    """Adaptive RK45 solve of d/dt(psi, phi) = (R(psi), F(psi)) from (u, 0)."""
    result = _integrate_joint(model.R, model.F, u, T, tol)
    return RiccatiSolution(u=np.asarray(u, dtype=float), T=T, _result=result)


def homogenized(
    model: AffineDiffusion,
    u,
    eps: float,
    t: float,
    tol: float = DEFAULT_TOL,
    via: str = "rescale",
) -> tuple[np.ndarray, float]:
    """(psi_eps(u, t), phi_eps(u, t)), by rescaling or by the scaled fields.

    via="rescale" evaluates eps*psi(u/eps, eps*t); via="direct" integrates
    the fields R_eps, F_eps.  The two agree up to integrator tolerance.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    u = np.asarray(u, dtype=float)
    if via == "rescale":
        sol = solve_riccati(model, u / eps, eps * t, tol=tol)
        return eps * sol.psi_final, eps * sol.phi_final
    if via == "direct":
        result = _integrate_joint(
            lambda psi: model.R_eps(psi, eps), lambda psi: model.F_eps(psi, eps), u, t, tol
        )
        return result.y_final[:-1], float(result.y_final[-1])
    raise ValueError(f"unknown evaluation path {via!r}")


@dataclass(frozen=True)
class HomogenizationSeries:
    """Power-series coefficients of psi_eps(u, t) and phi_eps(u, t) in eps."""

    u: np.ndarray
    t: float
    psi: list  # psi[i]: i-th order coefficient vector
    phi: list  # phi[i]: i-th order scalar
    lambda_hat: list | None = None  # phi[i] + <x, psi[i]> when a state was given

    def psi_eval(self, eps: float) -> np.ndarray:
        return sum(eps**i * np.asarray(c) for i, c in enumerate(self.psi))

    def phi_eval(self, eps: float) -> float:
        return sum(eps**i * c for i, c in enumerate(self.phi))


def series(
    model: AffineDiffusion,
    u,
    t: float,
    N: int,
    x=None,
    tol: float = DEFAULT_TOL,
    eps0: float = 0.25,
) -> HomogenizationSeries:
    """Series coefficients to order N: ODEs for orders 0, 1, an eps-fit beyond.

    Orders 0 and 1 come from the limiting and first variational equations;
    orders 2..N from a least-squares polynomial fit in eps of the homogenized
    values after the first two orders are subtracted.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    u = np.asarray(u, dtype=float)
    d = u.size

    def joint_field(_t, y):
        psi0, psi1 = y[:d], y[d : 2 * d]
        out = np.empty(2 * d + 2)
        out[:d] = model.R0(psi0)
        out[d : 2 * d] = model.R0_jac(psi0) @ psi1 + model.R1(psi0)
        out[2 * d] = model.F0(psi0)
        out[2 * d + 1] = (model.a @ psi0) @ psi1 + model.F1(psi0)
        return out

    y0 = np.concatenate([u, np.zeros(d), [0.0, 0.0]])
    res = integrate_dp45(joint_field, y0, t, tol=tol, blow_up_norm=BLOW_UP_NORM)
    yT = res.y_final
    psi_coeffs = [yT[:d], yT[d : 2 * d]]
    phi_coeffs = [float(yT[2 * d]), float(yT[2 * d + 1])]

    if N >= 2:
        # include guard powers beyond N so series truncation does not bias
        # the reported coefficients
        powers = list(range(2, N + 4))
        n_grid = len(powers) + 5
        eps_grid = eps0 * 2.0 ** -np.arange(n_grid)
        tail_psi = np.empty((n_grid, d))
        tail_phi = np.empty(n_grid)
        for j, eps in enumerate(eps_grid):
            psi_e, phi_e = homogenized(model, u, eps, t, tol=tol)
            tail_psi[j] = psi_e - psi_coeffs[0] - eps * psi_coeffs[1]
            tail_phi[j] = phi_e - phi_coeffs[0] - eps * phi_coeffs[1]
        psi_coeffs.extend(np.zeros(d) for _ in range(2, N + 1))
        for comp in range(d):
            coeffs, _ = powers_fit(eps_grid, tail_psi[:, comp], powers)
            for order in range(2, N + 1):
                psi_coeffs[order][comp] = coeffs[order - 2]
        coeffs, _ = powers_fit(eps_grid, tail_phi, powers)
        for order in range(2, N + 1):
            phi_coeffs.append(float(coeffs[order - 2]))

    lam = None
    if x is not None:
        x = np.asarray(x, dtype=float)
        lam = [phi_coeffs[i] + float(x @ psi_coeffs[i]) for i in range(len(phi_coeffs))]
    return HomogenizationSeries(u=u, t=t, psi=psi_coeffs, phi=phi_coeffs, lambda_hat=lam)


def lambda_hat_series(model: AffineDiffusion, x, u: float | np.ndarray, N: int, **kw) -> list:
    """CGF coefficients at state x: series of phi_eps(-u, 1) + <x, psi_eps(-u, 1)>."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    s = series(model, -u, 1.0, N, x=x, **kw)
    return s.lambda_hat


def heston_affine(params) -> AffineDiffusion:
    """Heston (X, V) embedded with state ordering (v, x): v sits in the R+ slot.

    Transform arguments follow the same ordering, so the log-price tilt w is
    the vector (0, w).
    """
    sig, rho = params.sigma, params.rho
    alpha = np.zeros((2, 2, 2))
    alpha[0] = np.array([[sig**2, rho * sig], [rho * sig, 1.0]])
    beta = np.zeros((2, 2))
    beta[0] = np.array([-params.b, params.k])
    return AffineDiffusion(
        m=1,
        n=1,
        a=np.zeros((2, 2)),
        b=np.array([params.a, params.r]),
        c=0.0,
        alpha=alpha,
        beta=beta,
        gamma=np.zeros(2),
    )
