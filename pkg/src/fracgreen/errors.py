"""Exception hierarchy shared by all modules."""


class FracGreenError(Exception):
    """Base class for library errors."""


class DomainError(FracGreenError, ValueError):
    """An evaluation point lies outside the operator's domain."""


class ParameterError(FracGreenError, ValueError):
    """Orders, boundary coefficients or other problem parameters are invalid."""


class StencilError(FracGreenError, ValueError):
    """A finite-difference stencil would leave the admissible interval."""

    def __init__(self, message: str, required_margin: float):
        super().__init__(message)
        self.required_margin = required_margin


class SingularPointError(FracGreenError, ValueError):
    """Evaluation requested at a point where the formula blows up."""


class UnsupportedFamilyError(FracGreenError, ValueError):
    """The requested check has no counterpart for this kernel family."""


class NumericError(FracGreenError, ArithmeticError):
    """A function produced non-finite values."""


class DivergenceError(FracGreenError, RuntimeError):
    """Fixed-point iteration blew up."""

    def __init__(self, message: str, history_length: int):
        super().__init__(message)
        self.history_length = history_length
