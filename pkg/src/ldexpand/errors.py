"""Exception taxonomy shared by all ldexpand modules."""


class LdexpandError(Exception):
    """Base class for all package errors."""


class NoInteriorMinimum(LdexpandError):
    """Minimizer search was driven onto an interval endpoint."""


class NonConvexAtMinimum(LdexpandError):
    """Second derivative of the exponent is not positive at the minimizer."""


class QuadratureNonConvergent(LdexpandError):
    """Adaptive quadrature failed to converge within its panel budget."""


class BracketFailure(LdexpandError):
    """A root could not be bracketed (monotone-range condition violated)."""


class DomainError(LdexpandError):
    """Argument lies outside the admissible domain interval."""


class DegenerateCurvature(LdexpandError):
    """Second derivative of the limiting CGF is numerically zero."""


class WindowError(LdexpandError):
    """Tilt parameter lies outside the truncation window J_n."""


class GapVanishes(LdexpandError):
    """Tilted-rate gap is zero; the evaluation point sits on the set boundary."""


class BlowUp(LdexpandError):
    """ODE solution norm exceeded the blow-up threshold before the horizon.

    Attributes:
        blow_up_time: time at which the threshold was crossed.
    """

    def __init__(self, message, blow_up_time=None):
        super().__init__(message)
        self.blow_up_time = blow_up_time


class StepUnderflow(LdexpandError):
    """Adaptive step size shrank below machine resolution."""


class FitIllConditioned(LdexpandError):
    """Least-squares design matrix is too ill-conditioned to trust."""


class BranchFault(LdexpandError):
    """Complex-arithmetic evaluation left the real-valued regime."""


class ExplosionRegion(LdexpandError):
    """Moment generating function is infinite for the requested argument."""


class NegativeDensityWarning(UserWarning):
    """Equivalent-family value went negative (asymptotic device, not clamped)."""
