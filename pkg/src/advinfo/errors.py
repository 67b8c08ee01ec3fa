"""Exception types shared across the package."""


class AdvinfoError(Exception):
    pass


class SizeError(AdvinfoError, ValueError):
    """Register size is zero, negative, or too large to index."""


class ContractViolation(AdvinfoError, ValueError):
    """A caller broke an operation's precondition."""


class ImpossibleOutcomeError(AdvinfoError, ValueError):
    """A forced measurement outcome has (numerically) zero probability."""


class DegenerateSumError(AdvinfoError, ValueError):
    """A weighted sum of basis states cancelled to the zero vector."""
