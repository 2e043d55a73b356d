"""Exception taxonomy shared across the package.

Validation failures on inputs raise ValueError subclasses; failures of a
numerical procedure raise RuntimeError subclasses carrying diagnostics.
"""


class ParameterError(ValueError):
    """A parameter violates its documented domain."""


class DegeneracyError(ValueError):
    """The object is degenerate for the requested operation (e.g. a
    reducible chain with several closed classes has no unique stationary
    distribution)."""


class DomainError(ValueError):
    """A runtime value left the domain required by the algorithm (e.g. a
    wealth-consumption ratio at or below one along a simulated path)."""


class BudgetError(ValueError):
    """The request exceeds an explicit compute budget."""


class NumericalError(RuntimeError):
    """A numerical routine lost the precision it is contracted to deliver."""


class InstabilityError(RuntimeError):
    """The process is unstable for the requested operation.

    Attributes
    ----------
    ln_r : float
        Log spectral radius of the valuation operator, when available.
    """

    def __init__(self, message, ln_r=None):
        super().__init__(message)
        self.ln_r = ln_r


class IndeterminateError(RuntimeError):
    """The procedure could not certify either stability or instability.

    Attributes
    ----------
    ln_r : float or None
        Log spectral radius diagnostic, when available.
    residuals : list of float
        Trailing residual trace of the iteration that gave up.
    """

    def __init__(self, message, ln_r=None, residuals=()):
        super().__init__(message)
        self.ln_r = ln_r
        self.residuals = list(residuals)


class ConvergenceError(RuntimeError):
    """An iteration exhausted its budget without meeting its tolerance.

    Attributes
    ----------
    residual : float or None
        Last residual observed.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
