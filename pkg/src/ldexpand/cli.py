"""Command-line front end: config files in, CSV tables out.

Configs are flat key=value files (one pair per line, '#' comments).  Every
CSV starts with a comment line recording the resolved configuration, then a
header row; numbers are written with 17 significant digits so repeated runs
are byte-identical.

Exit codes: 0 success, 2 domain/validation errors, 3 numerical
non-convergence, 64 usage errors.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import affine, bounds, density, heston, laplace, legendre, montecarlo
from .errors import (
    BlowUp,
    BracketFailure,
    BranchFault,
    DegenerateCurvature,
    DomainError,
    ExplosionRegion,
    FitIllConditioned,
    GapVanishes,
    NoInteriorMinimum,
    NonConvexAtMinimum,
    QuadratureNonConvergent,
    StepUnderflow,
    WindowError,
)
from .smoothfn import SmoothScalarFn

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64

_NUMERIC_ERRORS = (BlowUp, QuadratureNonConvergent, FitIllConditioned, StepUnderflow)
_VALIDATION_ERRORS = (
    DomainError,
    ExplosionRegion,
    BracketFailure,
    BranchFault,
    DegenerateCurvature,
    GapVanishes,
    NoInteriorMinimum,
    NonConvexAtMinimum,
    WindowError,
    ValueError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let grid specs like -2:2:101 and lists like -0.5,0.3 pass as values
        import re

        self._negative_number_matcher = re.compile(r"^-\d+(\.\d+)?([:,].*)?$")

    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if x is None:
        return ""
    return format(float(x), ".17g")


def parse_config(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"malformed config line {raw.strip()!r} in {path}")
            key, val = line.split("=", 1)
            values[key.strip()] = val.strip()
    return values


def parse_grid(spec: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid spec {spec!r} must be start:stop:count")
    start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 2:
        raise ValueError(f"grid count must be >= 2, got {count}")
    if not start < stop:
        raise ValueError(f"grid start {start} must be below stop {stop}")
    return np.linspace(start, stop, count)


def parse_floats(spec: str) -> list[float]:
    return [float(tok) for tok in spec.split(",") if tok.strip()]


def parse_pair(spec: str) -> tuple[float, float]:
    parts = spec.split(":")
    if len(parts) != 2:
        raise ValueError(f"set spec {spec!r} must be a:b")
    lo, hi = float(parts[0]), float(parts[1])
    if not lo < hi:
        raise ValueError(f"set endpoints must satisfy {lo} < {hi}")
    return lo, hi


def heston_params_from_config(path: str) -> heston.HestonParams:
    cfg = parse_config(path)
    keys = ("r", "k", "a", "b", "sigma", "rho", "x0", "v0")
    missing = [k for k in keys if k not in cfg]
    if missing:
        raise ValueError(f"config {path} is missing keys: {', '.join(missing)}")
    return heston.HestonParams(**{k: float(cfg[k]) for k in keys})


def _write_csv(out_path, config_line: str, header: list[str], rows):
    lines = ["# " + config_line, ",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    text = "\n".join(lines) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _config_line(args, fields: list[str]) -> str:
    parts = [f"cmd={args.command}"]
    for name in fields:
        parts.append(f"{name}={getattr(args, name)}")
    return " ".join(parts)


def _cgf_from_args(args) -> legendre.CGFExpansion:
    if args.model == "gaussian":
        return legendre.gaussian_triple()
    if args.config is None:
        raise ValueError("--config is required for the heston model")
    return heston.heston_cgf(heston_params_from_config(args.config))


# ---------------------------------------------------------------- subcommands

_LAPLACE_PROBLEMS = {
    "gauss": (
        SmoothScalarFn(lambda z: 1.0 + 0.0 * z),
        SmoothScalarFn(lambda z: 0.5 * z * z),
    ),
    "cos": (
        SmoothScalarFn(np.cos),
        SmoothScalarFn(lambda z: 0.5 * z * z),
    ),
    "cubic": (
        SmoothScalarFn(lambda z: 1.0 + 0.0 * z),
        SmoothScalarFn(lambda z: 0.5 * z * z + z**3 / 6.0),
    ),
}


def cmd_laplace(args):
    f, phi = _LAPLACE_PROBLEMS[args.problem]
    interval = (-1.0, 1.0)
    z0 = laplace.find_minimizer(phi, interval)
    problem = laplace.LaplaceProblem(f, phi, interval, z0)
    coeffs0 = laplace.expand(problem, order=0)
    coeffs1 = laplace.expand(problem, order=1)
    quad_interval = (-20.0, 20.0)
    rows = []
    for eps in parse_floats(args.eps):
        reference = laplace.quadrature_reference(f, phi, quad_interval, eps)
        v0 = laplace.evaluate(coeffs0, eps)
        v1 = laplace.evaluate(coeffs1, eps)
        rows.append(
            (eps, reference, v0, v1, abs(v0 - reference), abs(v1 - reference), coeffs1.order1)
        )
    _write_csv(
        args.out,
        _config_line(args, ["problem", "eps"]),
        ["eps", "quadrature", "order0_value", "order1_value", "residual0", "residual1", "order1_coefficient"],
        rows,
    )


def cmd_rate(args):
    rd = legendre.RateData(_cgf_from_args(args))
    rows = []
    for z in parse_grid(args.z_grid):
        u = legendre.ustar(rd, float(z))
        rows.append((z, u, legendre.rate(rd, float(z)), legendre.distance(rd, float(z))))
    _write_csv(
        args.out,
        _config_line(args, ["model", "config", "z_grid"]),
        ["z", "ustar", "rate", "distance"],
        rows,
    )


def cmd_family(args):
    rd = legendre.RateData(_cgf_from_args(args))
    family = density.EquivalentFamily(rd)
    eps_list = parse_floats(args.eps)
    rows = []
    for z in parse_grid(args.z_grid):
        z = float(z)
        c0_val = density.c0(family, z)
        c1_val = density.c1(family, z)
        for eps in eps_list:
            rows.append((z, eps, c0_val, c1_val, density.f_eps(family, z, eps)))
    _write_csv(
        args.out,
        _config_line(args, ["model", "config", "z_grid", "eps"]),
        ["z", "eps", "c0", "c1", "f_eps"],
        rows,
    )


def cmd_bounds(args):
    cgf = _cgf_from_args(args)
    rd = legendre.RateData(cgf)
    A = parse_pair(args.set)
    x = args.x
    rows = []
    for eps in parse_floats(args.eps):
        for direction, op in (("upper", bounds.upper_bound), ("lower", bounds.lower_bound)):
            report, value = op(cgf, rd, A, x, eps)
            rows.append(
                (
                    direction,
                    report.case_tag,
                    report.x,
                    report.a_minus,
                    report.a_plus,
                    report.exponent,
                    report.prefactor,
                    report.correction,
                    report.gap_gamma,
                    eps,
                    value,
                )
            )
    _write_csv(
        args.out,
        _config_line(args, ["model", "config", "set", "x", "eps"]),
        [
            "direction",
            "case",
            "x",
            "a_minus",
            "a_plus",
            "exponent",
            "prefactor",
            "correction",
            "gap_gamma",
            "eps",
            "value",
        ],
        rows,
    )


def affine_from_config(path: str) -> affine.AffineDiffusion:
    cfg = parse_config(path)
    m, n = int(cfg["m"]), int(cfg["n"])
    d = m + n
    a = np.array(parse_floats(cfg["a"])).reshape(d, d)
    b = np.array(parse_floats(cfg["b"]))
    c = float(cfg.get("c", "0"))
    alpha = np.stack(
        [np.array(parse_floats(cfg[f"alpha{i + 1}"])).reshape(d, d) for i in range(d)]
    )
    beta = np.stack([np.array(parse_floats(cfg[f"beta{i + 1}"])) for i in range(d)])
    gamma = np.array(parse_floats(cfg.get("gamma", ",".join(["0"] * d))))
    return affine.AffineDiffusion(m=m, n=n, a=a, b=b, c=c, alpha=alpha, beta=beta, gamma=gamma)


def cmd_riccati(args):
    model = affine_from_config(args.model_file)
    u = np.array(parse_floats(args.u))
    if args.series is not None:
        x = np.array(parse_floats(args.state)) if args.state else None
        s = affine.series(model, u, args.T, args.series, x=x, tol=args.tol)
        header = ["order"] + [f"psi_{i + 1}" for i in range(model.dim)] + ["phi"]
        if x is not None:
            header.append("lambda_hat")
        rows = []
        for order in range(len(s.phi)):
            row = [order, *s.psi[order], s.phi[order]]
            if x is not None:
                row.append(s.lambda_hat[order])
            rows.append(row)
        _write_csv(
            args.out,
            _config_line(args, ["model_file", "u", "T", "tol", "series", "state"]),
            header,
            rows,
        )
        return
    sol = affine.solve_riccati(model, u, args.T, tol=args.tol)
    ts = np.linspace(0.0, args.T, args.t_count)
    rows = []
    for t in ts:
        state = sol.psi(float(t))
        rows.append((t, *state, sol.phi(float(t))))
    header = ["t"] + [f"psi_{i + 1}" for i in range(model.dim)] + ["phi"]
    _write_csv(
        args.out,
        _config_line(args, ["model_file", "u", "T", "tol", "t_count"]),
        header,
        rows,
    )


def cmd_heston(args):
    p = heston_params_from_config(args.config)
    info = heston.domain(p)
    rows = []
    for u in parse_grid(args.u_grid):
        u = float(u)
        rows.append(
            (
                u,
                heston.lambda0(p, u),
                heston.dlambda0(p, u),
                heston.d2lambda0(p, u),
                heston.lambda1(p, u),
                heston.lambda2(p, u),
                info.u_min,
                info.u_max,
            )
        )
    _write_csv(
        args.out,
        _config_line(args, ["config", "u_grid"]),
        ["u", "lambda0", "dlambda0", "d2lambda0", "lambda1", "lambda2", "u_min", "u_max"],
        rows,
    )


def cmd_mc_validate(args):
    p = heston_params_from_config(args.config)
    cfg = montecarlo.MCConfig(n_paths=args.paths, n_steps=args.steps, seed=args.seed)
    u_list = parse_floats(args.u)
    rows = []
    for eps in parse_floats(args.eps):
        samples = montecarlo.simulate_heston(p, eps, cfg)
        for u in u_list:
            C, D = heston.mgf_components(p, u, eps)
            expected = math.exp(C + D * p.v0 + u * p.x0)
            est = montecarlo.mgf_estimate(samples, u)
            ok = abs(est.value - expected) <= 3.0 * est.std_error
            rows.append(
                (f"mgf(u={_fmt(u)},eps={_fmt(eps)})", expected, est.value, est.std_error, int(ok))
            )
        if args.set is not None:
            A = parse_pair(args.set)
            x = args.x if args.x is not None else 0.5 * (A[0] + A[1])
            cgf = heston.heston_cgf(p)
            rd = legendre.RateData(cgf)
            _, up_value = bounds.upper_bound(cgf, rd, A, x, eps)
            _, low_value = bounds.lower_bound(cgf, rd, A, x, eps)
            est = montecarlo.empirical_probability(samples, A)
            ok_up = est.value - 3.0 * est.std_error <= up_value
            ok_low = low_value - 3.0 * est.std_error <= est.value
            rows.append(
                (f"upper(eps={_fmt(eps)})", up_value, est.value, est.std_error, int(ok_up))
            )
            rows.append(
                (f"lower(eps={_fmt(eps)})", low_value, est.value, est.std_error, int(ok_low))
            )
    _write_csv(
        args.out,
        _config_line(args, ["config", "eps", "paths", "steps", "seed", "u", "set", "x"]),
        ["check", "expected", "observed", "std_error", "pass"],
        rows,
    )


# --------------------------------------------------------------------- parser


def build_parser() -> _Parser:
    parser = _Parser(prog="ldexpand", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("laplace", help="Laplace expansion vs quadrature for a demo problem")
    sp.add_argument("--problem", choices=sorted(_LAPLACE_PROBLEMS), default="cos")
    sp.add_argument("--eps", default="0.0625,0.03125,0.015625", help="comma list of eps")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_laplace)

    for name, fn, grid_flag in (
        ("rate", cmd_rate, "--z-grid"),
        ("family", cmd_family, "--z-grid"),
    ):
        sp = sub.add_parser(name, help=f"tabulate {name} quantities on a z grid")
        sp.add_argument("--model", choices=["gaussian", "heston"], default="heston")
        sp.add_argument("--config", default=None, help="heston key=value config")
        sp.add_argument(grid_flag, dest="z_grid", required=True, help="start:stop:count")
        if name == "family":
            sp.add_argument("--eps", default="0.1", help="comma list of eps")
        sp.add_argument("--out", default=None)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("bounds", help="first-order upper/lower bound reports")
    sp.add_argument("--model", choices=["gaussian", "heston"], default="heston")
    sp.add_argument("--config", default=None)
    sp.add_argument("--set", required=True, help="target interval a:b")
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--eps", required=True, help="comma list of eps")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("riccati", help="solve the Riccati system of an affine model file")
    sp.add_argument("--model-file", required=True)
    sp.add_argument("--u", required=True, help="comma list: initial tilt vector")
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=affine.DEFAULT_TOL)
    sp.add_argument("--t-count", type=int, default=101)
    sp.add_argument("--series", type=int, default=None, help="emit series coefficients to this order")
    sp.add_argument("--state", default=None, help="comma list: state for lambda_hat")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_riccati)

    sp = sub.add_parser("heston", help="tabulate the closed-form CGF expansion")
    sp.add_argument("--config", required=True)
    sp.add_argument("--u-grid", dest="u_grid", required=True, help="start:stop:count")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_heston)

    sp = sub.add_parser("mc-validate", help="Monte Carlo cross-checks against closed forms")
    sp.add_argument("--config", required=True)
    sp.add_argument("--eps", required=True, help="comma list of eps")
    sp.add_argument("--paths", type=int, default=10**5)
    sp.add_argument("--steps", type=int, default=100)
    sp.add_argument("--seed", type=int, default=20240901)
    sp.add_argument("--u", default="0.3,0.5", help="comma list of MGF tilts")
    sp.add_argument("--set", default=None, help="target interval a:b for the bound sandwich")
    sp.add_argument("--x", type=float, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_mc_validate)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        args.func(args)
        return EXIT_OK
    except _NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
