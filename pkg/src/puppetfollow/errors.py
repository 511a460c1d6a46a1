"""Exception hierarchy shared by all puppetfollow modules."""


class FollowerError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(FollowerError):
    """Feature vector dimensionality does not match the expected d."""


class InvariantError(FollowerError):
    """A constructed or loaded object violates one of its type invariants."""


class DegenerateTemplate(InvariantError):
    """Template has fewer than 2 frames."""


class NonFinite(InvariantError):
    """A feature value is NaN or infinite."""


class NonMonotoneTime(InvariantError):
    """Frame timestamps are not strictly increasing."""


class DegenerateTarget(FollowerError):
    """Resample target length below 2."""


class AllZeroMass(FollowerError):
    """Every forward probability underflowed to zero; the decoder is lost."""


class MissingSource(FollowerError):
    """A declared input source produced no frame this tick."""


class LayoutMismatch(FollowerError):
    """Input parts do not match the declared source layout."""


class UnknownId(FollowerError):
    """A referenced user/rig/asset id is not known."""


class ParseError(FollowerError):
    """Malformed file content."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class VersionError(FollowerError):
    """Unrecognized file format version."""
