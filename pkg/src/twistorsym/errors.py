"""Exception hierarchy shared by all modules."""


class TwistorError(Exception):
    """Base class for every error raised by the toolkit."""


class NotNull(TwistorError):
    pass


class ZeroVector(TwistorError):
    pass


class AtInfinity(TwistorError):
    """Two alpha-planes have no finite intersection point."""


class ParallelPlanes(AtInfinity):
    pass


class SingularEvaluation(TwistorError):
    """A field or map was evaluated on its singular set."""


class DerivativeDivergence(TwistorError):
    pass


class DegenerateSpan(TwistorError):
    pass


class NoConvergence(TwistorError):
    pass


class NonSymmetric(TwistorError):
    pass


class SingularMatrix(TwistorError):
    pass


class NoCommonFactor(TwistorError):
    pass


class BilinearityViolation(TwistorError):
    pass


class ShapeMismatch(TwistorError):
    pass


class IndexOutOfRange(TwistorError):
    pass


class DerivativeUnavailable(TwistorError):
    pass


class FormViolation(TwistorError):
    pass


class NoSolution(TwistorError):
    pass


class ConfigError(TwistorError):
    pass
