"""Exception hierarchy.

Each error carries the process exit code the command line maps it to:
1 for runtime failures, 2 for violated model assumptions, 64 for bad configs.
"""


class LabError(Exception):
    exit_code = 1


class AssumptionViolation(LabError, ValueError):
    exit_code = 2


class ConfigError(LabError, ValueError):
    exit_code = 64


# parameter algebra
class NonPositiveOrder(AssumptionViolation):
    pass


class ZeroChi(AssumptionViolation):
    pass


class BoundaryParameters(AssumptionViolation):
    pass


class TangentInapplicable(AssumptionViolation):
    pass


class RegionError(AssumptionViolation):
    pass


class ParameterError(AssumptionViolation):
    pass


# evaluation
class DomainError(LabError, ValueError):
    pass


class OriginSingularity(LabError, ValueError):
    pass


class InvalidArea(LabError, ValueError):
    pass


class OutOfDomain(LabError, ValueError):
    pass


# numerics
class QuadratureFailure(LabError):
    pass


class NormDivergence(LabError):
    pass


class TailTruncationError(LabError):
    pass


class SingularCellError(LabError):
    pass


class ResolutionError(LabError):
    pass


class NotPSD(LabError):
    pass


# statistics
class TooFewSamples(LabError, ValueError):
    pass


class DegenerateScale(LabError):
    pass
