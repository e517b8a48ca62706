"""Exception hierarchy. The CLI maps these onto exit codes."""


class DgfcError(Exception):
    """Base class for all package errors."""


class ValidationError(DgfcError):
    """Bad user input: malformed files, inconsistent shapes, invalid config."""


class NumericError(DgfcError):
    """Numerical failure: lost positive definiteness, singular solve, etc."""


class StabilityError(NumericError):
    """A transition matrix violates the spectral-radius stability requirement."""


class IdentificationError(NumericError):
    """A (lag-0, lag-1) correlation pair does not identify a stable VAR."""


class SamplerError(NumericError):
    """MCMC failure, e.g. the stability rejection cap was exhausted."""


class GenerationError(SamplerError):
    """A rejection-based random generator exhausted its retry budget."""


class DegenerateModelError(NumericError):
    """Model parameters imply a degenerate (zero-variance) observable."""


class InternalConsistencyError(DgfcError):
    """An invariant that the sampler is supposed to maintain was violated."""
