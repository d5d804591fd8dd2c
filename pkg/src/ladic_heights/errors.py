"""Exception taxonomy shared across the pipeline.

Errors fall into three groups: validation of inputs (ValidationError and
subclasses), precision problems that a retry at higher working precision may
fix (PrecisionError subclasses), and structural limitations of the tame
arithmetic (WildRamification).
"""


class LadicError(Exception):
    """Base class for all package errors."""


class ValidationError(LadicError):
    """Malformed or inconsistent user input."""


class EvenPrime(ValidationError):
    pass


class WildRamification(LadicError):
    """The computation would require a wildly ramified extension."""


class SquarefreeViolation(ValidationError):
    pass


class PrecisionError(LadicError):
    """Recoverable by retrying at a higher working precision."""


class PrecisionExhausted(PrecisionError):
    pass


class DivisionByIndistinguishableZero(PrecisionError):
    pass


class NotASquare(LadicError):
    pass


class OddValuation(LadicError):
    pass


class NegativeValuation(LadicError):
    pass


class IndistinguishableRoots(PrecisionError):
    pass


class TowerTooSmall(LadicError):
    """The working tower must be enlarged to (res_degree, ram_index)."""

    def __init__(self, res_degree, ram_index, message=""):
        self.res_degree = res_degree
        self.ram_index = ram_index
        super().__init__(message or f"need tower with f={res_degree}, e={ram_index}")


class NotAUnit(LadicError):
    pass


class InsufficientPrecision(PrecisionError):
    pass


class NonzeroResidue(LadicError):
    pass


class DegenerateDomain(ValidationError):
    pass


class OddExponent(LadicError):
    pass


class FactorVanishes(LadicError):
    pass


class NotSecondKind(ValidationError):
    pass


class NotIndependent(ValidationError):
    pass


class NonzeroMass(ValidationError):
    pass


class RankDeficientT(PrecisionError):
    pass


class GramSingular(PrecisionError):
    pass


class CertificationFailed(PrecisionError):
    pass
