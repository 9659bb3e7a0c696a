"""Typed error hierarchy for the toolkit.

Every failure mode raised on purpose derives from ToolkitError so that
callers (in particular the CLI suite runner) can record a failed check
without aborting the surrounding run.
"""


class ToolkitError(Exception):
    """Base class for all errors raised deliberately by the toolkit."""


class DomainError(ToolkitError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceError(ToolkitError):
    """A truncated series or product failed to converge within its term cap."""


class SingularityError(ToolkitError):
    """An evaluation point is too close to a pole or zero of a denominator."""


class ConditioningError(ToolkitError):
    """A matrix inversion was requested too close to a degeneracy."""


class ContourError(ToolkitError):
    """An integration contour grazes a declared pole radius."""


class ModeWindowError(ToolkitError):
    """A bracket expansion produced a mode index outside the allowed window."""
