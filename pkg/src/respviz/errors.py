"""Exception taxonomy shared across the package.

Every validation failure raises a typed error carrying the offending
path or value, so callers (CLI, HTTP service) can map failures to exit
codes and response bodies without string matching.
"""


class RespvizError(Exception):
    """Base class for all package errors."""


class SpecSyntaxError(RespvizError, ValueError):
    """Chart spec text is not valid JSON."""


class SchemaError(RespvizError, ValueError):
    """Structurally valid input violates the spec or dataset schema.

    The message always names the offending path (e.g. ``encoding.shape``).
    """


class EmptyDataError(RespvizError, ValueError):
    """A dataset parsed to zero usable rows."""


class ScaleError(RespvizError, ValueError):
    """A scale cannot resolve its domain.

    Degenerate min == max domains are handled by rendering at the range
    midpoint, so this is reserved for situations that cannot be repaired
    (currently none in practice).
    """


class UnsupportedSpecError(RespvizError, ValueError):
    """A channel or mark combination outside the renderer's scope."""


class UnknownSchemeError(RespvizError, KeyError):
    """A color scheme name with no bundled stop list."""


class UnknownShapeError(RespvizError, KeyError):
    """A shape id missing from the perceptual kernel."""


class DegenerateViewError(RespvizError, ValueError):
    """A view with too few rendered values for a pairwise distribution."""


class DegenerateFitError(RespvizError, ValueError):
    """A local regression neighborhood with no abscissa spread.

    Never raised in practice: the fit falls back to the neighbor mean.
    Kept so callers can reference the condition by name.
    """


class DegenerateSourceError(RespvizError, ValueError):
    """A trend comparison whose source curve has (near-)zero area.

    Never raised in practice: the comparison returns the unnormalized
    area and the loss report carries a flag instead.
    """


class AmbiguousMatchError(RespvizError, ValueError):
    """One (field, aggregate) binding appears on two channels of one view."""


class NoOverlapError(RespvizError, ValueError):
    """Standardized trend curves have no common abscissa interval."""


class IncompatibleFeaturesError(RespvizError, ValueError):
    """Pair mapping over feature vectors with different name lists."""


class DegenerateDataError(RespvizError, ValueError):
    """Training data with a single label class."""


class MissingPairError(RespvizError, KeyError):
    """Monotonicity check asked to compare a pair with no label."""


class EmptySpaceError(RespvizError, ValueError):
    """Target enumeration produced no valid candidates."""
