"""Exception hierarchy shared by all subpackages.

Every exception carries the process exit code the command line front-end
reports when the exception reaches it.
"""

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_PRECONDITION = 4


class VlexError(Exception):
    """Base class of all errors raised by vlex_multipliers."""
    exit_code = EXIT_DOMAIN


# -- parse / configuration errors (exit 2) ------------------------------------

class SpecParseError(VlexError):
    """An exponent, symbol, function file or expression could not be parsed."""
    exit_code = EXIT_PARSE


class ConfigError(VlexError):
    """A configuration file is malformed or contains unknown keys."""
    exit_code = EXIT_PARSE


# -- domain errors (exit 3) ---------------------------------------------------

class DomainError(VlexError):
    exit_code = EXIT_DOMAIN


class InvalidExponent(DomainError):
    """Exponent violates 1 < p_minus <= p_plus < inf."""


class NonFinite(DomainError):
    """Samples contain NaN or infinite values."""


class IntervalOutOfGrid(DomainError):
    """An interval is not strictly inside the grid window."""


class DecayViolation(DomainError):
    """Boundary samples are too large for an aliasing-free transform."""


class NotLogHoelder(DomainError):
    """No log-Hoelder certificate can be issued for the exponent."""


class NotInWienerForm(DomainError):
    """Symbol has no known representation c + Ff with integrable f."""


class UnboundedVariation(DomainError):
    """Total variation of a symbol diverges."""


class NotInSO3(DomainError):
    """A derivative D^j a does not vanish at infinity."""


class NoUpperBoundAvailable(DomainError):
    """No rule yields an upper bound for a multiplier norm."""


class BudgetZero(DomainError):
    """A search was requested with an empty budget."""


class BudgetExceeded(DomainError):
    """A computation exceeds its configured size budget."""


class InconsistentEstimate(DomainError):
    """A lower bound exceeds the corresponding upper bound."""


# -- precondition failures (exit 4) -------------------------------------------

class PreconditionError(VlexError):
    exit_code = EXIT_PRECONDITION


class ThetaOutOfRange(PreconditionError):
    """Interpolation parameter outside its admissible range."""


class NonDecaying(PreconditionError):
    """Symbol does not vanish at infinity."""


class NoMultiplierBound(PreconditionError):
    """No upper bound for the multiplier norm needed by a pipeline."""


class BadDecomposition(PreconditionError):
    """Exponent decomposition fails its pointwise identity."""


class EtaOutOfRange(PreconditionError):
    """Auxiliary interpolation parameter eta outside (0, 1]."""


class NotDotContinuous(PreconditionError):
    """Limits at -inf and +inf differ."""


class ResolutionExhausted(PreconditionError):
    """Required sup-norm threshold is below what double precision resolves."""


class NotEnclosable(PreconditionError):
    """Symbol expression admits no finite interval enclosure on a region."""
