"""Exception types shared across the library."""


class NumericalError(RuntimeError):
    """A computation failed for numerical reasons (as opposed to bad input)."""


class NotPositiveSemiDefiniteError(NumericalError):
    """An operator that must be PSD produced a significantly negative eigenvalue.

    Attributes
    ----------
    index : int
        Position of the offending eigenvalue in the descending spectrum.
    value : float
        The eigenvalue itself.
    """

    def __init__(self, index, value, threshold):
        self.index = index
        self.value = value
        super().__init__(
            f"eigenvalue {index} is {value:.6e}, below the PSD tolerance "
            f"{-threshold:.6e}; the supplied kernel is not positive semi-definite"
        )


class QuadratureError(NumericalError):
    """Adaptive quadrature exceeded its recursion-depth limit.

    Carries the best available estimate in ``partial``.
    """

    def __init__(self, message, partial):
        self.partial = partial
        super().__init__(f"{message} (partial estimate {partial!r})")


class DomainError(ValueError):
    """A point lies outside the region an expansion was built on."""


class ResourceLimitError(ValueError):
    """A requested problem size exceeds a guard on dense solver cost."""


class IllPosedEvidenceError(NumericalError):
    """Marginal likelihood requested with both prior and noise variance ~ 0."""
