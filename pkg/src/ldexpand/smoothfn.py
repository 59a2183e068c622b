"""Scalar functions with derivative queries up to order five.

Analytic derivatives are used whenever the caller supplies them; anything
beyond the supplied orders falls back to central finite differences with
two-level Richardson extrapolation, applied to the highest available
analytic derivative so the finite-difference order stays as low as possible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

MAX_ORDER = 5

_EPS = float(np.finfo(float).eps)

# Central stencils with O(h^2) leading error; offsets in units of h.
_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
    4: ((-2, -1, 0, 1, 2), (1.0, -4.0, 6.0, -4.0, 1.0)),
    5: ((-3, -2, -1, 1, 2, 3), (-0.5, 2.0, -2.5, 2.5, -2.0, 0.5)),
}


def _fd_step(z: float, order: int) -> float:
    return max(1e-2 * (1.0 + abs(z)), 1.0) * _EPS ** (1.0 / (order + 2))


def _central_difference(fn, z: float, order: int, h: float) -> float:
    offsets, weights = _STENCILS[order]
    acc = 0.0
    for o, w in zip(offsets, weights):
        acc += w * fn(z + o * h)
    return acc / h**order


def finite_difference(fn: Callable[[float], float], z: float, order: int) -> float:
    """Central finite difference of `fn` at `z` with Richardson extrapolation.

    The base stencil has O(h^2) error; two Richardson levels over the
    halving sequence h, h/2, h/4 push that to O(h^6).
    """
    if order == 0:
        return fn(z)
    if order not in _STENCILS:
        raise ValueError(f"finite differences support orders 1..{MAX_ORDER}, got {order}")
    h = _fd_step(z, order)
    d1 = _central_difference(fn, z, order, h)
    d2 = _central_difference(fn, z, order, h / 2)
    d3 = _central_difference(fn, z, order, h / 4)
    r1 = (4.0 * d2 - d1) / 3.0
    r2 = (4.0 * d3 - d2) / 3.0
    return (16.0 * r2 - r1) / 15.0


@dataclass(frozen=True)
class SmoothScalarFn:
    """A real function of one real variable with derivatives up to order 5.

    `derivatives` maps derivative order to a closed-form callable; orders
    not present are computed by finite differences of the highest supplied
    order below the request.
    """

    fn: Callable[[float], float]
    derivatives: Mapping[int, Callable[[float], float]] = field(default_factory=dict)

    def __call__(self, z):
        return self.fn(z)

    def derivative(self, z, order: int):
        if order < 0 or order > MAX_ORDER:
            raise ValueError(f"derivative order must be in 0..{MAX_ORDER}, got {order}")
        if order == 0:
            return self.fn(z)
        if order in self.derivatives:
            return self.derivatives[order](z)
        base_order = max((m for m in self.derivatives if m < order), default=0)
        base_fn = self.fn if base_order == 0 else self.derivatives[base_order]
        return finite_difference(base_fn, z, order - base_order)

    def shifted(self, offset: float) -> "SmoothScalarFn":
        """The function z -> f(z - offset), derivatives shifted alike."""
        return SmoothScalarFn(
            fn=lambda z, _f=self.fn: _f(z - offset),
            derivatives={
                m: (lambda z, _g=g: _g(z - offset)) for m, g in self.derivatives.items()
            },
        )


def constant_fn(value: float) -> SmoothScalarFn:
    zero = lambda z: 0.0 * np.asarray(z) if np.ndim(z) else 0.0
    return SmoothScalarFn(
        fn=lambda z: value + (0.0 * np.asarray(z) if np.ndim(z) else 0.0),
        derivatives={m: zero for m in range(1, MAX_ORDER + 1)},
    )
