"""Exception hierarchy shared by all modules."""


class RegulatorError(Exception):
    """Base class; ``cause`` is the machine-readable name used by the CLI."""

    @property
    def cause(self) -> str:
        return type(self).__name__


class NotStable(RegulatorError):
    pass


class NoConvergence(RegulatorError):
    pass


class StabilizabilityFailure(RegulatorError):
    pass


class ImaginaryAxisEigenvalue(StabilizabilityFailure):
    pass


class NotPositiveDefinite(RegulatorError):
    pass


class SingularResolvent(RegulatorError):
    pass


class DimensionMismatch(RegulatorError, ValueError):
    pass


class InvalidCoefficient(RegulatorError, ValueError):
    pass


class InvalidParameters(RegulatorError, ValueError):
    pass


class EmptyActuator(RegulatorError, ValueError):
    pass


class AssumptionViolated(RegulatorError):
    pass


class SingularInternalModelCoupling(RegulatorError):
    pass


class RankCollapse(RegulatorError):
    pass


class SingularStep(RegulatorError):
    pass


class ConfigError(RegulatorError, ValueError):
    pass
