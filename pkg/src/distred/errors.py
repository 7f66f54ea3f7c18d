"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class DistredError(Exception):
    """Base class for all errors raised by distred."""


class DistributionError(DistredError, ValueError):
    """A set of sub-alphabets does not form a valid distribution."""


class EmptyPart(DistributionError):
    pass


class NotCovering(DistributionError):
    pass


class ComparableParts(DistributionError):
    pass


class DuplicatePart(DistributionError):
    pass


class AlphabetMismatch(DistredError, ValueError):
    pass


class ImproperPartition(DistredError, ValueError):
    pass


class TrivialResult(DistredError, ValueError):
    """Merging collapsed every part into the whole alphabet."""


class SizeCapExceeded(DistredError):
    """Enumeration of merges refused because the distribution is too large."""


class CapacityExceeded(DistredError):
    """A finite language grew past the configured word-count guardrail."""


class SourceMismatch(DistredError, ValueError):
    pass


class EmptyCandidate(DistredError, ValueError):
    pass


class NotSubstitutable(DistredError, ValueError):
    pass


class MalformedCandidate(DistredError, ValueError):
    """A candidate violates the height/size requirements of a reduction."""
