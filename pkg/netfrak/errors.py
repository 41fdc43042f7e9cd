"""Exception hierarchy.

User errors (bad files, bad flags, impossible parameters) derive from
``UserError`` and map to exit code 1 on the command line. Internal
consistency failures derive from ``InvariantViolation`` and map to exit code 2.
"""

from __future__ import annotations


class NetfrakError(Exception):
    """Base class for every error raised by netfrak."""


class UserError(NetfrakError, ValueError):
    """Invalid input supplied by the caller."""


class InvariantViolation(NetfrakError, RuntimeError):
    """An internal invariant did not hold."""


# --- geometry ---


class EmptyNetwork(UserError):
    pass


class BadSegmentIndex(UserError):
    pass


class ZeroLengthSegment(UserError):
    pass


class Disconnected(UserError):
    pass


class CrossingSegments(UserError):
    pass


class DuplicateSegment(UserError):
    pass


class TooFarFromNetwork(UserError):
    pass


class BadSpacing(UserError):
    pass


class NotSimple(UserError):
    """Two pattern points closer than the simplicity tolerance."""


class BadLocation(UserError):
    pass


# --- metric ---


class EmptyBallBoundary(NetfrakError):
    """c_L(u, r) = 0: r lies beyond the farthest reachable distance."""


# --- intensity ---


class TooFewPoints(UserError):
    pass


class BadBandwidth(UserError):
    pass


class EmptySurface(UserError):
    pass


# --- summaries ---


class NonPositiveIntensityAtDataPoint(UserError):
    pass


class EmptyGrid(UserError):
    pass


class GridMismatch(UserError):
    pass


class RMaxExceedsR(UserError):
    pass


class BadRGrid(UserError):
    """Invalid r grid, r value, statistic name or intensity mode."""


# --- simulation ---


class BadDominating(UserError):
    pass


class FieldTooLarge(UserError):
    pass


class CovarianceNotPD(UserError):
    pass


class BadModelParams(UserError):
    """Unknown, missing or out-of-range simulation model parameter."""


# --- envelopes, io, config ---


class BadEnvelopeParams(UserError):
    pass


class AllUndefined(UserError):
    pass


class InputFormatError(UserError):
    pass


class ConfigError(UserError):
    pass
