"""Coherent-state coupon collector protocol toolkit.

Closed-form statistics and quantum sample costs of the phase-encoded
pulse-train protocol under detector and interferometer imperfections,
trial-level Monte Carlo verification, intensity optimization against the
classical collector baseline, detection-event processing with
time-window selection, and the blind-box wagering game with its HTTP
service.
"""

from .model import ChannelParams, CouponInstance, PeriodOutcome, PulseTrain, encode

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "CouponInstance",
    "PeriodOutcome",
    "PulseTrain",
    "encode",
    "__version__",
]
