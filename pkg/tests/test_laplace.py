import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldexpand.errors import NoInteriorMinimum, NonConvexAtMinimum
from ldexpand.fitting import fitted_order
from ldexpand.laplace import (
    LaplaceCoefficients,
    LaplaceProblem,
    evaluate,
    expand,
    find_minimizer,
    quadrature_reference,
)
from ldexpand.smoothfn import SmoothScalarFn

ONE = SmoothScalarFn(lambda z: 1.0 + 0.0 * z)
GAUSS_PHI = SmoothScalarFn(lambda z: 0.5 * z * z)
CUBIC_PHI = SmoothScalarFn(lambda z: 0.5 * z * z + z**3 / 6.0)
COS = SmoothScalarFn(np.cos)

# analytic-derivative variants for exactness checks
GAUSS_PHI_AN = SmoothScalarFn(
    lambda z: 0.5 * z * z,
    derivatives={1: lambda z: z, 2: lambda z: 1.0, 3: lambda z: 0.0, 4: lambda z: 0.0},
)
COS_AN = SmoothScalarFn(
    np.cos,
    derivatives={1: lambda z: -np.sin(z), 2: lambda z: -np.cos(z)},
)
CUBIC_PHI_AN = SmoothScalarFn(
    lambda z: 0.5 * z * z + z**3 / 6.0,
    derivatives={
        1: lambda z: z + 0.5 * z * z,
        2: lambda z: 1.0 + z,
        3: lambda z: 1.0 + 0.0 * z,
        4: lambda z: 0.0 * z,
    },
)


class TestFindMinimizer:
    def test_gaussian(self):
        assert find_minimizer(GAUSS_PHI, (-1.0, 1.0)) == pytest.approx(0.0, abs=1e-10)

    def test_cubic(self):
        assert find_minimizer(CUBIC_PHI, (-1.0, 1.0)) == pytest.approx(0.0, abs=1e-10)

    def test_shifted_parabola(self):
        phi = SmoothScalarFn(lambda z: 2.0 * (z - 0.3) ** 2)
        assert find_minimizer(phi, (-1.0, 1.0)) == pytest.approx(0.3, abs=1e-10)

    def test_monotone_exponent_hits_endpoint(self):
        phi = SmoothScalarFn(lambda z: z)
        with pytest.raises(NoInteriorMinimum):
            find_minimizer(phi, (0.0, 1.0))

    def test_flat_quartic_minimum_rejected(self):
        phi = SmoothScalarFn(lambda z: z**4)
        with pytest.raises(NonConvexAtMinimum):
            find_minimizer(phi, (-1.0, 1.0))


class TestExpand:
    def test_gaussian_all_corrections_vanish(self):
        pr = LaplaceProblem(ONE, GAUSS_PHI_AN, (-1.0, 1.0), 0.0)
        c = expand(pr, order=1)
        assert c.exponent_value == pytest.approx(0.0, abs=1e-14)
        assert c.gauss_curvature == pytest.approx(1.0)
        assert c.order0 == pytest.approx(1.0)
        assert c.order1 == pytest.approx(0.0, abs=1e-12)

    def test_cos_order1(self):
        # only f''/(2 phi'') survives
        pr = LaplaceProblem(COS_AN, GAUSS_PHI_AN, (-1.0, 1.0), 0.0)
        assert expand(pr, order=1).order1 == pytest.approx(-0.5, abs=1e-12)

    def test_cubic_order1(self):
        # only 5*(phi''')^2/(24*(phi'')^3) survives
        pr = LaplaceProblem(ONE, CUBIC_PHI_AN, (-1.0, 1.0), 0.0)
        assert expand(pr, order=1).order1 == pytest.approx(5.0 / 24.0, abs=1e-12)

    def test_order0_has_no_order1(self):
        pr = LaplaceProblem(ONE, GAUSS_PHI_AN, (-1.0, 1.0), 0.0)
        c = expand(pr, order=0)
        assert c.order == 0 and c.order1 is None

    def test_fd_path_matches_analytic_path(self):
        for f, phi_fd, phi_an in (
            (COS, GAUSS_PHI, GAUSS_PHI_AN),
            (ONE, CUBIC_PHI, CUBIC_PHI_AN),
        ):
            c_fd = expand(LaplaceProblem(f, phi_fd, (-1.0, 1.0), 0.0), order=1)
            c_an = expand(LaplaceProblem(f, phi_an, (-1.0, 1.0), 0.0), order=1)
            assert c_fd.order1 == pytest.approx(c_an.order1, rel=1e-5, abs=1e-7)

    def test_translation_invariance_explicit(self):
        shift = 1.7
        pr = LaplaceProblem(COS_AN, GAUSS_PHI_AN, (-1.0, 1.0), 0.0)
        pr_shift = LaplaceProblem(
            COS_AN.shifted(shift),
            GAUSS_PHI_AN.shifted(shift),
            (-1.0 + shift, 1.0 + shift),
            shift,
        )
        c, cs = expand(pr, 1), expand(pr_shift, 1)
        assert cs.exponent_value == pytest.approx(c.exponent_value, abs=1e-12)
        assert cs.gauss_curvature == pytest.approx(c.gauss_curvature, abs=1e-12)
        assert cs.order0 == pytest.approx(c.order0, abs=1e-12)
        assert cs.order1 == pytest.approx(c.order1, abs=1e-12)

    @given(st.floats(min_value=-3.0, max_value=3.0))
    @settings(max_examples=20, deadline=None)
    def test_translation_invariance_property(self, shift):
        pr_shift = LaplaceProblem(
            ONE,
            CUBIC_PHI_AN.shifted(shift),
            (-1.0 + shift, 1.0 + shift),
            shift,
        )
        c = expand(pr_shift, 1)
        assert c.order1 == pytest.approx(5.0 / 24.0, abs=1e-9)

    def test_nonconvex_rejected_at_construction(self):
        phi = SmoothScalarFn(
            lambda z: -0.5 * z * z,
            derivatives={1: lambda z: -z, 2: lambda z: -1.0},
        )
        with pytest.raises(NonConvexAtMinimum):
            LaplaceProblem(ONE, phi, (-1.0, 1.0), 0.0)


class TestEvaluate:
    def test_plain_gaussian(self):
        c = LaplaceCoefficients(0.0, 1.0, 1.0, 0.0, 1)
        assert evaluate(c, 1.0) == pytest.approx(math.sqrt(2.0 * math.pi))

    def test_with_correction(self):
        c = LaplaceCoefficients(0.0, 1.0, 1.0, -0.5, 1)
        assert evaluate(c, 0.1) == pytest.approx(math.sqrt(0.2 * math.pi) * 0.95)

    def test_order0_with_offsets(self):
        c = LaplaceCoefficients(1.0, 2.0, 3.0, None, 0)
        assert evaluate(c, 0.5) == pytest.approx(math.exp(-2.0) * math.sqrt(0.5 * math.pi) * 3.0)

    def test_eps_must_be_positive(self):
        c = LaplaceCoefficients(0.0, 1.0, 1.0, None, 0)
        with pytest.raises(ValueError):
            evaluate(c, 0.0)


class TestQuadratureReference:
    def test_gaussian(self):
        v = quadrature_reference(ONE, GAUSS_PHI, (-20.0, 20.0), 1.0)
        assert v == pytest.approx(math.sqrt(2.0 * math.pi), abs=1e-10)

    def test_gaussian_scaling(self):
        v = quadrature_reference(ONE, GAUSS_PHI, (-20.0, 20.0), 0.25)
        assert v == pytest.approx(math.sqrt(math.pi / 2.0), abs=1e-10)

    def test_cos_gaussian_closed_form(self):
        # int cos(z) exp(-z^2/(2 eps)) dz = exp(-eps/2) * sqrt(2 pi eps)
        eps = 0.5
        v = quadrature_reference(COS, GAUSS_PHI, (-20.0, 20.0), eps)
        assert v == pytest.approx(math.exp(-eps / 2.0) * math.sqrt(2.0 * math.pi * eps), rel=1e-10)
        assert v == pytest.approx(math.sqrt(math.pi) * math.exp(-0.25), rel=1e-10)


PROBLEMS = [
    (ONE, GAUSS_PHI_AN, GAUSS_PHI),
    (COS_AN, GAUSS_PHI_AN, GAUSS_PHI),
    (ONE, CUBIC_PHI_AN, CUBIC_PHI),
]


class TestResidualOrders:
    @pytest.mark.parametrize("f,phi,phi_plain", PROBLEMS)
    def test_order1_residual_order(self, f, phi, phi_plain, dyadic_eps):
        coeffs = expand(LaplaceProblem(f, phi, (-1.0, 1.0), 0.0), order=1)
        resid = []
        for eps in dyadic_eps:
            ref = quadrature_reference(f, phi_plain, (-20.0, 20.0), eps)
            resid.append(abs(evaluate(coeffs, eps) - ref) / abs(ref))
        assert fitted_order(dyadic_eps, resid) >= 1.8 or max(resid) < 1e-12

    @pytest.mark.parametrize("f,phi,phi_plain", [PROBLEMS[1], PROBLEMS[2]])
    def test_order0_residual_order(self, f, phi, phi_plain, dyadic_eps):
        coeffs = expand(LaplaceProblem(f, phi, (-1.0, 1.0), 0.0), order=0)
        resid = []
        for eps in dyadic_eps:
            ref = quadrature_reference(f, phi_plain, (-20.0, 20.0), eps)
            resid.append(abs(evaluate(coeffs, eps) - ref) / abs(ref))
        assert fitted_order(dyadic_eps, resid) >= 0.8
