"""Exception hierarchy. Every error carries a machine-readable ``code``."""


class PVTauError(Exception):
    code = "PVTAU_ERROR"


class ConfigError(PVTauError, ValueError):
    code = "CONFIG_ERROR"


class InvalidTheta(PVTauError, ValueError):
    code = "INVALID_THETA"


class ZeroGaugeParameter(PVTauError, ValueError):
    code = "ZERO_GAUGE_PARAMETER"


class ZeroBasePoint(PVTauError, ValueError):
    code = "ZERO_BASE_POINT"


class ConstraintViolation(PVTauError, ValueError):
    code = "CONSTRAINT_VIOLATION"


class PoleEvaluation(PVTauError, ValueError):
    code = "POLE_EVALUATION"


class ChartSingular(PVTauError, ValueError):
    code = "CHART_SINGULAR"


class SingularGauge(PVTauError, ValueError):
    code = "SINGULAR_GAUGE"


class InvalidPath(PVTauError, ValueError):
    code = "INVALID_PATH"


class PathThroughOrigin(InvalidPath):
    code = "PATH_THROUGH_ORIGIN"


class StepCollapse(PVTauError, RuntimeError):
    code = "STEP_COLLAPSE"


class PreconditionError(PVTauError, ValueError):
    code = "PRECONDITION"


class FitFailed(PVTauError, RuntimeError):
    code = "FIT_FAILED"


class BlowUpOnPath(PVTauError, RuntimeError):
    code = "BLOWUP_ON_PATH"


class WindingMismatch(PVTauError, ValueError):
    code = "WINDING_MISMATCH"


class UndefinedU(PVTauError, ValueError):
    code = "UNDEFINED_U"

    def __init__(self, msg, factor=None):
        super().__init__(msg)
        # one of "b0_12", "b1_11+theta1/2"
        self.factor = factor


class StencilOutOfRange(PVTauError, IndexError):
    code = "STENCIL_OUT_OF_RANGE"


class EquationSingular(PVTauError, ValueError):
    code = "EQUATION_SINGULAR"


class LoopThroughSingularity(PVTauError, ValueError):
    code = "LOOP_THROUGH_SINGULARITY"
