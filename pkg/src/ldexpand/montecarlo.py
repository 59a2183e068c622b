"""Independent validation oracles: Heston path simulation and t-limit extraction.

Simulation uses the full-truncation Euler scheme for the variance leg: the
positive part V+ enters both drift and diffusion while the carried state may
go negative.  Randomness is organized in fixed-size path blocks, each driven
by its own counter-based Philox stream keyed by (seed, block index), so a
path's draws are a pure function of (seed, path index) and results are
bit-identical for any worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import FitIllConditioned
from .fitting import richardson_limit
from .heston import HestonParams

_BLOCK = 2**14


@dataclass(frozen=True)
class MCConfig:
    """Simulation controls; the scheme field is fixed by construction."""

    n_paths: int
    n_steps: int
    seed: int
    antithetic: bool = False
    scheme: str = "full-truncation-euler"

    def __post_init__(self):
        if self.n_paths <= 0 or self.n_steps <= 0:
            raise ValueError("n_paths and n_steps must be positive")
        if self.scheme != "full-truncation-euler":
            raise ValueError(f"unsupported scheme {self.scheme!r}")


@dataclass(frozen=True)
class EmpiricalEstimate:
    value: float
    std_error: float
    n: int


def _block_rng(seed: int, block: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(block)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _simulate_block(p: HestonParams, eps: float, cfg: MCConfig, block: int) -> np.ndarray:
    rng = _block_rng(cfg.seed, block)
    width = _BLOCK // 2 if cfg.antithetic else _BLOCK
    dt = eps / cfg.n_steps
    sq = math.sqrt(dt)
    rho_c = math.sqrt(1.0 - p.rho**2)
    x = np.full(width, p.x0)
    v = np.full(width, p.v0)
    for _ in range(cfg.n_steps):
        z = rng.standard_normal((2, width))
        vp = np.maximum(v, 0.0)
        sqrt_vp = np.sqrt(vp)
        dw1 = sq * z[0]
        dw2 = sq * (p.rho * z[0] + rho_c * z[1])
        x = x + (p.r + p.k * vp) * dt + sqrt_vp * dw1
        v = v + (p.a - p.b * vp) * dt + p.sigma * sqrt_vp * dw2
    if not cfg.antithetic:
        return x
    # antithetic partner: rerun the recursion with negated increments
    rng = _block_rng(cfg.seed, block)
    xa = np.full(width, p.x0)
    va = np.full(width, p.v0)
    for _ in range(cfg.n_steps):
        z = rng.standard_normal((2, width))
        vp = np.maximum(va, 0.0)
        sqrt_vp = np.sqrt(vp)
        xa = xa + (p.r + p.k * vp) * dt - sqrt_vp * sq * z[0]
        va = va + (p.a - p.b * vp) * dt - p.sigma * sqrt_vp * sq * (p.rho * z[0] + rho_c * z[1])
    out = np.empty(_BLOCK)
    out[0::2] = x
    out[1::2] = xa
    return out


def default_threads() -> int:
    return max(1, int(os.environ.get("LDEXPAND_THREADS", "1")))


def simulate_heston(
    p: HestonParams,
    eps: float,
    cfg: MCConfig,
    threads: int | None = None,
) -> np.ndarray:
    """Terminal log-prices X_eps for n_paths full-truncation Euler paths.

    Deterministic in (params, eps, cfg): block b of the output is produced by
    the Philox stream keyed (seed, b) regardless of scheduling.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    threads = default_threads() if threads is None else max(1, threads)
    n_blocks = (cfg.n_paths + _BLOCK - 1) // _BLOCK
    out = np.empty(cfg.n_paths)

    def run(block: int):
        vals = _simulate_block(p, eps, cfg, block)
        start = block * _BLOCK
        out[start : min(start + _BLOCK, cfg.n_paths)] = vals[: cfg.n_paths - start]

    if threads == 1:
        for b in range(n_blocks):
            run(b)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, range(n_blocks)))
    return out


def empirical_probability(samples, A: tuple[float, float]) -> EmpiricalEstimate:
    """Fraction of samples in (a-, a+) with binomial standard error."""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("samples must be nonempty")
    a_minus, a_plus = A
    p_hat = float(np.mean((samples > a_minus) & (samples < a_plus)))
    se = math.sqrt(p_hat * (1.0 - p_hat) / samples.size)
    return EmpiricalEstimate(value=p_hat, std_error=se, n=samples.size)


def mgf_estimate(samples, u: float) -> EmpiricalEstimate:
    """Sample estimate of E[exp(u*X)] with its standard error."""
    samples = np.asarray(samples)
    if samples.size == 0:
        raise ValueError("samples must be nonempty")
    vals = np.exp(u * samples)
    return EmpiricalEstimate(
        value=float(np.mean(vals)),
        std_error=float(np.std(vals, ddof=1) / math.sqrt(samples.size)),
        n=samples.size,
    )


@dataclass(frozen=True)
class ExpansionEstimate:
    lam0: float
    lam1: float
    lam2: float
    residual: float


def extract_expansion(evaluator, u: float, t_grid) -> ExpansionEstimate:
    """Recover (L0, L1, L2) from finite-t values of L(u, t) on a dyadic grid.

    Implements the three extraction limits by successive Richardson
    extrapolation: first L(u, t) -> L0, then (L - L0)/t -> L1, then
    (L - L0 - L1*t)/t^2 -> L2, the last restricted to the larger grid nodes
    where roundoff in the subtractions has not yet been amplified.
    The reported residual is the worst deviation of the fitted quadratic
    from the data.
    """
    t = np.asarray(sorted(t_grid, reverse=True), dtype=float)
    if len(t) < 6:
        raise FitIllConditioned("need at least 6 dyadic grid points")
    if np.any(np.abs(t[1:] / t[:-1] - 0.5) > 1e-9):
        raise FitIllConditioned("t grid must be dyadic (successive ratio 1/2)")
    L = np.array([evaluator(u, ti) for ti in t], dtype=float)
    lam0 = richardson_limit(t, L, levels=min(6, len(t) - 1))
    g1 = (L - lam0) / t
    lam1 = richardson_limit(t, g1, levels=min(5, len(t) - 1))
    m2 = min(7, len(t))
    g2 = (L[:m2] - lam0 - lam1 * t[:m2]) / t[:m2] ** 2
    lam2 = richardson_limit(t[:m2], g2, levels=min(4, m2 - 1))
    residual = float(np.max(np.abs(L - (lam0 + lam1 * t + lam2 * t**2))))
    return ExpansionEstimate(lam0=lam0, lam1=lam1, lam2=lam2, residual=residual)
