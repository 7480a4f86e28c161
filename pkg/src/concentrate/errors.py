"""Exception hierarchy for domain and validation failures.

Every error raised by the library derives from ConcentrationError so that
callers (notably the CLI) can map computation-domain failures to a single
exit code while letting genuine bugs surface as ordinary exceptions.
"""


class ConcentrationError(Exception):
    """Base class for all domain errors raised by this package."""


class EmptySpectrumError(ConcentrationError):
    """Spectrum construction received no strictly positive entry."""


class NegativeEntryError(ConcentrationError):
    """Spectrum construction received a negative probability."""


class NotNormalizedError(ConcentrationError):
    """Probabilities do not sum to one and renormalization was not requested."""


class DimensionMismatchError(ConcentrationError):
    """Two distributions that must share an index set have different lengths."""


class DegenerateSpectrumError(ConcentrationError):
    """Operation undefined on a uniform (flat) spectrum."""


class SizeOutOfRangeError(ConcentrationError):
    """Target maximally-entangled size outside the feasible range."""


class TooManyTypesError(ConcentrationError):
    """Type enumeration would exceed the configured item guard."""


class RateOutOfRangeError(ConcentrationError):
    """Per-copy rate outside the open interval required by the regime."""


class NonPositiveExponentError(ConcentrationError):
    """Exponent argument must be strictly positive."""


class DimensionTooLargeError(ConcentrationError):
    """Simplex-grid oracle only supports dimensions 2 and 3."""


class SizeOrderError(ConcentrationError):
    """Size arguments violate the required ordering (needs L <= T)."""


class EpsTooLargeError(ConcentrationError):
    """Fidelity defect must be below 1/6 for the conversion to apply."""


class TTooSmallError(ConcentrationError):
    """Target size too small for a nontrivial conversion output."""


class SolverError(ConcentrationError):
    """A bracketing or iteration limit was exhausted before convergence."""
