"""Exception types shared across the package.

Every raisable condition has its own class so callers can branch on the
failure mode rather than on message text.  All of them derive from
CevarepError.
"""


class CevarepError(Exception):
    """Base class for package-specific errors."""


class DimensionMismatch(CevarepError):
    """Operands have incompatible shapes or dimensions."""


class DegenerateEndpoints(CevarepError):
    """A segment's endpoints coincide where a genuine segment is needed."""


class NotOnLine(CevarepError):
    """A point is too far from the line it was asserted to lie on."""


class RankDeficient(CevarepError):
    """A least-squares design does not pin down every coefficient."""


class OutOfDomain(CevarepError):
    """Evaluation attempted where the map is undefined."""


class EmptyDomain(CevarepError):
    """A construction produced a map whose domain excludes its anchor."""


class RegionEscapesDomain(CevarepError):
    """A sampling region is not contained in the map's domain."""


class CollinearVertices(CevarepError):
    """Three points meant to span a triangle are collinear."""


class ConditionViolated(CevarepError):
    """Cevian weights fail the multiplicative concurrency condition."""


class EqualImages(CevarepError):
    """Two probe points map to the same image; a ratio is undefined."""


class NotOnOpenSegment(CevarepError):
    """An image lands off the open segment between two reference images."""


class DegenerateGrid(CevarepError):
    """A probe grid is too small or too narrow to support a fit."""


class CollinearRange(CevarepError):
    """The oracle's image appears to lie on a single line; extraction
    is refused because the representation is not identifiable."""


class ExponentMismatch(CevarepError):
    """The probe-ratio exponent is not one within tolerance."""


class ValidationFailed(CevarepError):
    """A recovered map disagrees with the oracle on held-out points."""


class PositivityViolated(CevarepError):
    """A recovered denominator is not strictly positive on the samples."""


class BothBranchesDegenerate(CevarepError):
    """Neither branch of the two-branch ratio construction applies."""


class OracleFailure(CevarepError):
    """The oracle raised or returned a non-finite image."""


class UnknownName(CevarepError):
    """An identifier does not name anything known."""


class MapSyntaxError(CevarepError):
    """Parse failure in a map-definition source, with position info."""

    def __init__(self, message, line, col):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class UnknownIdentifier(CevarepError):
    """A map-definition source refers to an undefined variable or function."""


class ArityError(CevarepError):
    """A function call has the wrong number of arguments."""
