"""Exception hierarchy shared by all modules."""


class JointSpectrumError(Exception):
    """Base class for every error raised by this package."""


class SingularMatrix(JointSpectrumError):
    pass


class NumericalFailure(JointSpectrumError):
    pass


class UnsupportedRep(JointSpectrumError):
    pass


class InvalidParams(JointSpectrumError):
    pass


class InvalidMode(JointSpectrumError):
    pass


class BudgetExceeded(JointSpectrumError):
    pass


class NotProximalMember(JointSpectrumError):
    def __init__(self, offenders):
        self.offenders = list(offenders)
        super().__init__(f"elements not proximal: {self.offenders}")


class PreconditionFailed(JointSpectrumError):
    pass


class OriginInterior(JointSpectrumError):
    pass


class DegeneratePolygon(JointSpectrumError):
    pass


class NotInterior(JointSpectrumError):
    pass


class NoSchottkyWitnesses(JointSpectrumError):
    pass


class Unachieved(JointSpectrumError):
    pass


class NotDominated(JointSpectrumError):
    pass


class DimensionMismatch(JointSpectrumError):
    pass


class NotUnimodular(JointSpectrumError):
    pass


class NotHyperbolic(JointSpectrumError):
    pass


class NotSameDirection(JointSpectrumError):
    pass


class NotBalancedRatio(JointSpectrumError):
    pass


class ParseError(JointSpectrumError):
    def __init__(self, msg, line=None, column=None):
        self.line, self.column = line, column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(msg + where)


class ValidationError(JointSpectrumError):
    pass


class CorruptCache(JointSpectrumError):
    pass


class UsageError(JointSpectrumError):
    pass
