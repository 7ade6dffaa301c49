"""Exception and warning types shared across the package."""


class PlasmonChainError(Exception):
    """Base class for all errors raised by plasmon_chain."""


class InvalidInputError(PlasmonChainError, ValueError):
    """Arguments violate a documented precondition or type invariant."""


class NumericalFailureError(PlasmonChainError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy result."""


class SingularityError(NumericalFailureError):
    """Evaluation requested exactly at a pole or branch point."""


class BesselRangeError(NumericalFailureError):
    """Argument too large for double precision evaluation."""


class ModeNotBoundError(NumericalFailureError):
    """Root iteration escaped the bound-mode region of the index plane."""


class WeakCouplingWarning(UserWarning):
    """A coupling exceeds the weak-coupling bound of 0.1 * omega_0."""


class UnimodalityWarning(UserWarning):
    """The minimiser's pre-scan found its minimum on a bracket endpoint."""
