"""Exception hierarchy.

Each class carries a short ``category`` string that the command line layer
reports on failure.
"""


class HydrowindError(Exception):
    category = "error"


class ConfigurationError(HydrowindError, ValueError):
    category = "config"


class ShapeError(HydrowindError, ValueError):
    category = "shape"


class PreconditionError(HydrowindError, ValueError):
    category = "precondition"


class DomainError(HydrowindError, ValueError):
    category = "domain"


class MeanCompatibilityError(HydrowindError, ValueError):
    category = "mean-compatibility"


class NumericalSetupError(HydrowindError, RuntimeError):
    category = "numerical-setup"


class StepError(HydrowindError, RuntimeError):
    category = "step"


class SizeGuardError(HydrowindError, ValueError):
    category = "size-guard"


class ArtifactError(HydrowindError, OSError):
    category = "io"
