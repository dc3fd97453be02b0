"""Exception types shared across the package."""


class HnncbError(Exception):
    """Base class for all package-specific errors."""


class ZeroDistancePair(HnncbError):
    """Two distinct trials are at distance zero (dedup was skipped)."""


class DuplicateMember(HnncbError):
    """Trial is already a member of the index."""


class EmptyIndex(HnncbError):
    """Query issued against an index with no members."""


class UnroutedPredecessor(HnncbError):
    """A trial was routed before all earlier trials were routed."""


class DiameterViolation(HnncbError):
    """A distance above 1 reached the level structure; rescaling was skipped."""


class MissingParent(HnncbError):
    """A bandit node for trial t > 1 was created without a parent node."""


class ProbabilityMismatch(HnncbError):
    """A non-positive played probability was fed to a weight update."""


class OverlappingBalls(HnncbError):
    """Two-balls environment configured with intersecting balls."""


class CoverViolation(HnncbError):
    """A boundary crossing is not covered by any of the supplied balls."""


class ParseError(HnncbError):
    """Malformed CSV input.  Carries the offending line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegeneratePolicy(HnncbError):
    """Margin/policy pair with no two off-margin trials of differing label."""


class TooLargeForExact(HnncbError):
    """Exact packing-number search requested beyond its size limit."""


class ConstructionGap(HnncbError):
    """No construction case applied while building the synthetic policy."""


class MissingMeans(HnncbError):
    """Regret requested for a record that carries no exact loss means."""


class NoData(HnncbError):
    """Plot requested with no usable run data."""
