"""Exception hierarchy. The CLI maps SpecError to exit 2, NumericalError to 3."""


class ReachError(Exception):
    pass


class SpecError(ReachError, ValueError):
    """Invalid user specification."""


class NumericalError(ReachError, ArithmeticError):
    """A computation is undefined for the given (degenerate) input."""


class FaceNotVertexError(NumericalError):
    pass


class DegenerateBlockError(NumericalError):
    pass


class NonGenericLineError(NumericalError):
    pass
