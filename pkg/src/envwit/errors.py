"""Exception types raised across the package."""


class EnvwitError(ValueError):
    """Base class for all input/contract violations."""


class NotHermitian(EnvwitError):
    pass


class BadIndexSet(EnvwitError):
    pass


class DimensionMismatch(EnvwitError):
    pass


class NotTracePreserving(EnvwitError):
    pass


class NotNormalized(EnvwitError):
    pass


class NotAState(EnvwitError):
    pass


class BadMixingParameter(EnvwitError):
    pass


class BadGamma(EnvwitError):
    pass


class NotUnitary(EnvwitError):
    pass


class BadWeights(EnvwitError):
    pass


class BadIndices(EnvwitError):
    pass


class UnknownFamily(EnvwitError):
    pass
