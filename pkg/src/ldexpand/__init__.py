"""ldexpand: first-order large-deviation expansions and their validation oracles."""

from .affine import (
    AffineDiffusion,
    HomogenizationSeries,
    RiccatiSolution,
    heston_affine,
    homogenized,
    lambda_hat_series,
    series,
    solve_riccati,
)
from .bounds import BoundReport, gap_constant, lower_bound, upper_bound
from .density import CertifyReport, EquivalentFamily, c0, c1, certify_equivalence, f_eps
from .heston import (
    DomainInfo,
    HestonParams,
    TaylorTable,
    d2lambda0,
    dlambda0,
    domain,
    heston_cgf,
    lambda0,
    lambda1,
    lambda2,
    lambda_scaled,
    mgf_components,
    taylor_table,
    toy_params,
    ustar_heston,
)
from .laplace import (
    LaplaceCoefficients,
    LaplaceProblem,
    evaluate,
    expand,
    find_minimizer,
    quadrature_reference,
)
from .legendre import (
    CGFExpansion,
    RateData,
    custom_triple,
    distance,
    gaussian_triple,
    phi_u_derivatives,
    rate,
    ustar,
    zstar,
)
from .montecarlo import (
    EmpiricalEstimate,
    ExpansionEstimate,
    MCConfig,
    empirical_probability,
    extract_expansion,
    mgf_estimate,
    simulate_heston,
)
from .smoothfn import SmoothScalarFn, constant_fn

__version__ = "0.1.0"

__all__ = [
    "AffineDiffusion",
    "BoundReport",
    "CGFExpansion",
    "CertifyReport",
    "DomainInfo",
    "EmpiricalEstimate",
    "EquivalentFamily",
    "ExpansionEstimate",
    "HestonParams",
    "HomogenizationSeries",
    "LaplaceCoefficients",
    "LaplaceProblem",
    "MCConfig",
    "RateData",
    "RiccatiSolution",
    "SmoothScalarFn",
    "TaylorTable",
    "c0",
    "c1",
    "certify_equivalence",
    "constant_fn",
    "custom_triple",
    "d2lambda0",
    "distance",
    "dlambda0",
    "domain",
    "empirical_probability",
    "evaluate",
    "expand",
    "extract_expansion",
    "f_eps",
    "find_minimizer",
    "gap_constant",
    "gaussian_triple",
    "heston_affine",
    "heston_cgf",
    "homogenized",
    "lambda0",
    "lambda1",
    "lambda2",
    "lambda_hat_series",
    "lambda_scaled",
    "lower_bound",
    "mgf_components",
    "mgf_estimate",
    "phi_u_derivatives",
    "quadrature_reference",
    "rate",
    "series",
    "simulate_heston",
    "solve_riccati",
    "taylor_table",
    "toy_params",
    "upper_bound",
    "ustar",
    "ustar_heston",
    "zstar",
]
