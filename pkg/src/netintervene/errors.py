"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems exit with 2,
convergence failures with 3 and the combinatorial guard with 4.
"""


class ValidationError(ValueError):
    """Input does not satisfy a documented precondition."""


class DimensionMismatch(ValidationError):
    pass


class NotRowStochastic(ValidationError):
    pass


class NonConvergent(RuntimeError):
    """An iterative procedure exhausted its iteration budget."""


class SingularSystem(RuntimeError):
    pass


class CombinatorialBlowup(RuntimeError):
    """Exhaustive enumeration would exceed the configured guard."""
