"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so the CLI can emit a
JSON diagnostic record and pick the exit status.
"""


class AnosovError(Exception):
    code = "error"
    numerical = False


class NotHyperbolic(AnosovError):
    code = "not_hyperbolic"


class NotUnimodular(AnosovError):
    code = "not_unimodular"


class NonOrthogonalEigenbasis(AnosovError):
    code = "non_orthogonal_eigenbasis"


class ExponentOverflow(AnosovError):
    code = "exponent_overflow"


class RealityViolation(AnosovError):
    code = "reality_violation"


class TooLarge(AnosovError):
    code = "too_large"


class InvalidCut(AnosovError):
    code = "invalid_cut"


class BadNormalization(AnosovError):
    code = "bad_normalization"


class ZeroStep(AnosovError):
    code = "zero_step"


class RadiusExceeded(AnosovError):
    code = "radius_exceeded"
    numerical = True


class SingularJacobian(AnosovError):
    code = "singular_jacobian"
    numerical = True


class NoConvergence(AnosovError):
    code = "no_convergence"
    numerical = True


class ZeroDenominator(AnosovError):
    code = "zero_denominator"
    numerical = True
