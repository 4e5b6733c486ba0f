"""Exception hierarchy shared by all plexsim modules."""


class PlexsimError(Exception):
    """Base class for every error raised by plexsim."""

    code = "error"


class InvalidTruncationError(PlexsimError, ValueError):
    code = "invalid_truncation"


class DimensionMismatchError(PlexsimError, ValueError):
    code = "dimension_mismatch"


class SolverError(PlexsimError):
    """Steady-state or time-evolution solve did not reach its tolerance."""

    code = "solver_failed"

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class MultiplicityError(SolverError):
    """The stationary manifold is degenerate (no unique steady state)."""

    code = "degenerate_steady_state"


class StepSizeError(PlexsimError, ValueError):
    code = "step_size"


class TraceDriftError(SolverError):
    code = "trace_drift"


class PhysicalityError(SolverError):
    """Steady state violates trace, hermiticity or positivity tolerances."""

    code = "unphysical_state"


class UndefinedCorrelationError(PlexsimError, ArithmeticError):
    code = "undefined_correlation"


class TruncationError(PlexsimError, ValueError):
    code = "truncation"


class SingularParameterError(PlexsimError, ArithmeticError):
    code = "singular_parameters"


class UndefinedPhaseError(PlexsimError, ArithmeticError):
    code = "undefined_phase"


class ConfigError(PlexsimError, ValueError):
    code = "config"
