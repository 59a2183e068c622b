"""Embedded Dormand-Prince 4(5) integrator with blow-up detection.

Fixed-purpose adaptive stepper for the Riccati systems in this package:
integrates y' = f(t, y) from 0 to T with mixed absolute/relative tolerance,
PI-free standard step control, cubic Hermite dense output, and an optional
infinity-norm threshold that aborts with the crossing time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BlowUp, StepUnderflow

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# b5 - b4: weights of the embedded error estimate
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])


@dataclass
class OdeResult:
    """Accepted trajectory with derivative samples and step statistics."""

    t: np.ndarray
    y: np.ndarray
    f: np.ndarray
    steps: int
    rejected: int
    tol: float

    @property
    def y_final(self) -> np.ndarray:
        return self.y[-1]

    def interpolate(self, t_query: float) -> np.ndarray:
        """Cubic Hermite interpolation on the stored accepted steps."""
        t = self.t
        if not (t[0] <= t_query <= t[-1]):
            raise ValueError(f"t={t_query} outside integrated range [{t[0]}, {t[-1]}]")
        i = int(np.clip(np.searchsorted(t, t_query) - 1, 0, len(t) - 2))
        h = t[i + 1] - t[i]
        if h == 0.0:
            return self.y[i]
        s = (t_query - t[i]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        return (
            h00 * self.y[i]
            + h10 * h * self.f[i]
            + h01 * self.y[i + 1]
            + h11 * h * self.f[i + 1]
        )


def integrate_dp45(
    field,
    y0,
    T: float,
    tol: float = 1e-10,
    max_steps: int = 10**6,
    first_step: float | None = None,
    blow_up_norm: float | None = None,
) -> OdeResult:
    """Integrate y' = field(t, y) on [0, T].

    `tol` is applied as both absolute and relative tolerance. When
    `blow_up_norm` is given and the solution's infinity norm crosses it,
    BlowUp is raised carrying the crossing time.
    """
    if T <= 0.0:
        raise ValueError("T must be positive")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    y = np.asarray(y0, dtype=float).copy()
    t = 0.0
    h = first_step if first_step is not None else 1e-3 * T
    f_now = np.asarray(field(t, y), dtype=float)
    ts, ys, fs = [t], [y.copy()], [f_now.copy()]
    steps = rejected = 0
    k = np.empty((7, y.size))
    while t < T:
        if steps + rejected >= max_steps:
            raise StepUnderflow(f"step budget {max_steps} exhausted at t={t}")
        h = min(h, T - t)
        if h < 1e-14 * max(T, abs(t)) or t + h == t:
            raise StepUnderflow(f"step size underflow (h={h:.3e}) at t={t}")
        k[0] = f_now
        for i in range(1, 7):
            yi = y + h * (k[:i].T @ _A[i])
            k[i] = field(t + _C[i] * h, yi)
        y_new = y + h * (k.T @ _B5)
        err_vec = h * (k.T @ _E)
        scale = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
        if err <= 1.0:
            t += h
            y = y_new
            f_now = np.asarray(field(t, y), dtype=float)
            ts.append(t)
            ys.append(y.copy())
            fs.append(f_now.copy())
            steps += 1
            if blow_up_norm is not None and np.max(np.abs(y)) > blow_up_norm:
                raise BlowUp(
                    f"solution norm exceeded {blow_up_norm:.1e} at t={t:.6g}",
                    blow_up_time=t,
                )
        else:
            rejected += 1
        factor = 0.9 * err ** -0.2 if err > 0.0 else 5.0
        h *= min(5.0, max(0.2, factor))
    return OdeResult(
        t=np.asarray(ts),
        y=np.asarray(ys),
        f=np.asarray(fs),
        steps=steps,
        rejected=rejected,
        tol=tol,
    )
