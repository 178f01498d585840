"""Exception hierarchy shared by every module."""


class QContextError(Exception):
    """Base class for all library errors."""


class NonSquare(QContextError, ValueError):
    pass


class ShapeMismatch(QContextError, ValueError):
    pass


class NotSelfAdjoint(QContextError, ValueError):
    pass


class UnitalityViolation(QContextError, ValueError):
    def __init__(self, message, residual_left=None, residual_right=None):
        super().__init__(message)
        self.residual_left = residual_left
        self.residual_right = residual_right


class ZeroBranch(QContextError, ValueError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotSharp(QContextError, ValueError):
    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class NotRankOne(QContextError, ValueError):
    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class NotUnitVector(QContextError, ValueError):
    pass


class InvalidBlockBasis(QContextError, ValueError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class PovmInvalid(QContextError, ValueError):
    pass


class UnknownOutcome(QContextError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class LabelMismatch(QContextError, ValueError):
    pass


class ProbabilityOutOfRange(QContextError, ValueError):
    pass


class DecompositionFailure(QContextError, RuntimeError):
    pass


class VerdictMismatch(QContextError, RuntimeError):
    """Two independent routes to the same theorem disagreed.

    This points at a bug or at a tolerance that sits on the boundary of
    some residual; ``witness`` carries whatever data reproduces it.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ParseError(QContextError, ValueError):
    pass
