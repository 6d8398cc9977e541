"""Exception hierarchy shared by every module.

The CLI maps :class:`DataError` and :class:`DomainError` to exit code 3 and
:class:`CapabilityError` to exit code 4.
"""

from __future__ import annotations


class AbsrankError(Exception):
    """Base class for all package errors."""


class DataError(AbsrankError, ValueError):
    """Input data is malformed or inconsistent."""


class LabelError(DataError):
    """Duplicate or otherwise invalid labels."""


class ParseError(DataError):
    """A value could not be parsed as a finite real."""


class ShapeError(DataError):
    """Ragged rows, empty matrices and similar shape problems."""


class SizeError(DataError):
    """Too few algorithms, samples or similar."""


class NotFoundError(DataError, LookupError):
    """A requested label or resource does not exist."""


class FormatError(DataError):
    """Corrupt or version-mismatched serialized payload."""


class DomainError(AbsrankError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DegenerateScaleError(DomainError):
    """Scaling a constant column (zero range or zero deviation)."""


class CapabilityError(AbsrankError):
    """Request is valid but beyond what this implementation supports."""
