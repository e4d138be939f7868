"""Exception hierarchy.

Everything raised for bad numerical input derives from ``ChancertError``,
which is itself a ``ValueError`` so callers that only care about "bad input"
can catch the builtin.
"""


class ChancertError(ValueError):
    pass


class NotSquare(ChancertError):
    pass


class NotHermitian(ChancertError):
    pass


class NotPSD(ChancertError):
    pass


class ShapeMismatch(ChancertError):
    pass


class DimMismatch(ChancertError):
    pass


class NotCPTP(ChancertError):
    pass


class NotChoi(ChancertError):
    pass


class NotUnitary(ChancertError):
    pass


class BadRank(ChancertError):
    pass


class BadShape(ChancertError):
    pass


class SingularMarginal(ChancertError):
    pass


class NonRealObservable(ChancertError):
    pass


class DomainError(ChancertError):
    """A square-root or arccos argument fell outside its domain by more than
    the clamping tolerance."""


class NoConvergence(RuntimeError):
    """Variational diagonalization did not reach the cost threshold.

    The best result found is attached as ``result`` so the caller can decide
    whether to use it anyway.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
