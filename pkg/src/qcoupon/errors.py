"""Domain error types.

Plain `ValueError` is used for precondition violations (bad arguments);
the classes here signal conditions that arise from valid inputs, such as
probabilities underflowing to zero or an optimization constraint that no
operating point can satisfy. The CLI maps `QCouponError` to exit code 2
and validation errors to exit code 1.
"""


class QCouponError(Exception):
    """Base class for domain-level runtime failures."""


class DegenerateEfficiencyError(QCouponError):
    """The acceptance probability underflowed to zero: conditional
    statistics (correct probability) are undefined."""


class ZeroSuccessError(QCouponError):
    """The success probability underflowed to zero: expected resource
    counts diverge."""


class InfeasibleConstraintError(QCouponError):
    """No evaluated operating point satisfies the requested constraint."""


class DegenerateCountsError(QCouponError):
    """Observed counts carry no information for the requested inversion
    (for example zero accepted periods)."""


class SessionClosedError(QCouponError):
    """A play was attempted on a finished game session."""
