"""Exception hierarchy.

Every domain failure raised by the library derives from :class:`ModmultError`;
the CLI maps these to exit status 1.
"""


class ModmultError(Exception):
    """Base class for all domain errors."""


class DegenerateLeading(ModmultError):
    pass


class DomainError(ModmultError, ValueError):
    pass


class EmptyWindow(ModmultError):
    pass


class NotAProductForm(ModmultError):
    pass


class InvalidDiscriminant(ModmultError, ValueError):
    pass


class NotQuadratic(ModmultError):
    pass


class UndecidedBoundary(ModmultError):
    pass


class PrecisionExhausted(ModmultError):
    pass


class InversionFailed(ModmultError):
    pass


class NotApplicable(ModmultError):
    pass


class NotInBasisIndexSet(ModmultError, ValueError):
    pass


class SpanningFamilyInsufficient(ModmultError):
    pass


class WindowTooSmall(ModmultError):
    pass


class ConstantFunction(ModmultError):
    pass


class NotConverged(ModmultError):
    pass


class PoleAtSpecialPoint(ModmultError):
    """R has a pole at one or more singular moduli.

    ``forms`` lists the offending quadratic forms; ``partial`` carries the
    special points that were computed without trouble.
    """

    def __init__(self, message, forms=(), partial=()):
        super().__init__(message)
        self.forms = list(forms)
        self.partial = list(partial)


class ZeroInput(ModmultError):
    pass


class NotInGroup(ModmultError):
    pass


class NotPairwiseDistinct(ModmultError):
    pass


class PreconditionViolated(ModmultError):
    pass


class LockHeld(ModmultError):
    pass


class ReplayMismatch(ModmultError):
    pass
