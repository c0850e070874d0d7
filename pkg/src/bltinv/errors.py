"""Exception types raised across the package."""


class BltError(Exception):
    """Base class for all package errors."""


class DuplicateDecay(BltError, ValueError):
    pass


class DimensionMismatch(BltError, ValueError):
    pass


class ZeroPolynomial(BltError, ValueError):
    pass


class ComplexRoots(BltError, ArithmeticError):
    pass


class NoConvergence(BltError, ArithmeticError):
    pass


class BracketFailure(BltError, ArithmeticError):
    pass


class InversionFailure(BltError, ArithmeticError):
    pass


class DegenerateDecays(BltError, ValueError):
    pass


class InterlacingViolation(BltError, ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(message)
        self.position = position


class ZeroDecay(BltError, ValueError):
    pass


class InvalidParams(BltError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class SizeLimit(BltError, ValueError):
    pass


class NonUnitConstant(BltError, ValueError):
    pass


class LengthMismatch(BltError, ValueError):
    pass


class SingularWorkload(BltError, ValueError):
    pass


class DegenerateRegime(BltError, ValueError):
    pass


class NearDoubleRoot(BltError, ArithmeticError):
    pass


class PerturbationInvalid(BltError, ValueError):
    pass


class InitInvalid(BltError, ValueError):
    pass


class NonFinite(BltError, ArithmeticError):
    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace
