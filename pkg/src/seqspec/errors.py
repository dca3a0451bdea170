"""Exception hierarchy shared by all seqspec modules."""


class SeqSpecError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(SeqSpecError, ValueError):
    """Malformed dimension rule, restriction, config file or request."""


class AlgebraError(SeqSpecError, ValueError):
    """Operands of a pointwise operation have incompatible dimensions."""


class EvaluationError(SeqSpecError, ValueError):
    """A sequence cannot be evaluated at the requested index."""


class ContractViolation(SeqSpecError, ValueError):
    """An input violates an operation's precondition (e.g. not Hermitian)."""


class SymbolVanishesError(SeqSpecError, ValueError):
    """The symbol comes too close to zero on the unit circle."""


class ConvergenceError(SeqSpecError, ArithmeticError):
    """An iterative kernel hit its sweep limit.

    ``off_norm`` carries the off-diagonal Frobenius norm that was reached.
    """

    def __init__(self, message, off_norm=float("nan"), sweeps=0):
        super().__init__(message)
        self.off_norm = off_norm
        self.sweeps = sweeps
