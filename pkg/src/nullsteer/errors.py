"""Exception hierarchy for the nullsteer package.

Every failure mode that callers are expected to branch on gets its own
class; the CLI maps them to exit codes (config 2, certain detection 3,
numerical 4).
"""


class NullsteerError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(NullsteerError):
    """A builder or operation received an out-of-domain parameter."""


class InvalidMatrixError(InvalidParameterError):
    """A custom Hamiltonian failed the Hermiticity check."""


class ConfigError(NullsteerError):
    """An experiment config failed to parse or validate.

    ``line`` is the 1-based line number in the config file when it could
    be located, else None.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class NumericalFailureError(NullsteerError):
    """An internal numerical routine failed to converge or verify."""


class PoleError(NullsteerError):
    """The charge field was evaluated at (or too close to) a charge."""


class NoBrightSubspaceError(NullsteerError):
    """All charges vanish: the detection state is fully dark."""


class BoundNotApplicableError(NullsteerError):
    """The Zeno bound was requested outside its regime of validity."""


class NotApplicableError(NullsteerError):
    """A perturbation scheme was requested outside its regime."""


class ExceptionalSpectrumError(NullsteerError):
    """An operation valid only for diagonalizable spectra was refused."""


class RootTooCloseError(NullsteerError):
    """A disk root sits too close to a unit-circle phase for the
    resolvent formulas to be trusted."""


class CertainDetectionError(NullsteerError):
    """Null conditioning is impossible: the next measurement detects the
    system with probability one.  ``step`` is the 1-based measurement
    index at which this occurred (None when raised outside a loop).
    """

    def __init__(self, message="certain detection", step=None):
        if step is not None:
            message = f"{message} at step {step}"
        super().__init__(message)
        self.step = step


class UnsupportedMultiplicityError(NullsteerError):
    """An oscillation descriptor was requested for a dominant tie that is
    not a pair."""
