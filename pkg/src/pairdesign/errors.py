"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class CapacityError(DomainError):
    """A request would enumerate more pairs than the configured cap allows."""


class SingularDesignError(ArithmeticError):
    """The information matrix of a design is singular.

    ``block`` names the parameter block whose diagonal value vanishes
    (``"main"``, ``"first-order"`` or ``"second-order"``) when known.
    """

    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block


class CertificationError(RuntimeError):
    """A computed design failed the equivalence-theorem check.

    This points at a bug rather than bad input; ``profile`` carries the
    offending variance profile for diagnosis.
    """

    def __init__(self, message, profile=None):
        super().__init__(message)
        self.profile = profile
