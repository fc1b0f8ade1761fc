"""Exception hierarchy for fredcorr.

Every error raised deliberately by the package derives from
:class:`FredcorrError`, so callers can catch one type at the boundary.
"""

__all__ = [
    "FredcorrError",
    "InvalidInput",
    "DimensionMismatch",
    "CompositionMismatch",
    "NotAFan",
    "SelfLoopUnsupported",
    "SymbolSingular",
]


class FredcorrError(Exception):
    """Base class for all fredcorr errors."""


class InvalidInput(FredcorrError):
    """Malformed user input (bad scenario file, bad parameter value)."""


class DimensionMismatch(FredcorrError):
    """Objects live in incompatible ambient spaces."""


class CompositionMismatch(FredcorrError):
    """Target of the first morphism does not match source of the second."""


class NotAFan(FredcorrError):
    """A family of subspaces fails the fan compatibility requirements."""


class SelfLoopUnsupported(FredcorrError):
    """The requested route cannot handle a self-loop edge."""


class SymbolSingular(FredcorrError):
    """A loop symbol is singular (or numerically too close to singular)
    somewhere on the unit circle, so its winding data is undefined."""
