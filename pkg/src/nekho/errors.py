"""Exception types shared across the package."""


class NekhoError(Exception):
    """Base class for all package errors."""


class EmptyModuleError(NekhoError, ValueError):
    pass


class DimensionGuardError(NekhoError, ValueError):
    pass


class ProjectionRankError(NekhoError, ValueError):
    pass


class BudgetExceededError(NekhoError, RuntimeError):
    pass


class ResonantWitnessError(NekhoError, ValueError):
    """An exact integer relation k.alpha = 0 was found."""

    def __init__(self, witness, message=None):
        self.witness = tuple(int(x) for x in witness)
        super().__init__(message or f"resonant witness k={self.witness}")


class DomainError(NekhoError, ValueError):
    pass


class LadderViolationError(NekhoError, ValueError):
    """A covering parameter ladder inequality fails."""

    def __init__(self, inequality, lhs, rhs):
        self.inequality = inequality
        self.lhs = lhs
        self.rhs = rhs
        super().__init__(f"ladder violation: {inequality} ({lhs!r} > {rhs!r})")


class HypothesisNotMetError(NekhoError, ValueError):
    pass


class PreconditionError(NekhoError, ValueError):
    pass


class IntegrationError(NekhoError, RuntimeError):
    pass


class ConfigError(NekhoError, ValueError):
    pass
