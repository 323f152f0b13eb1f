"""Exception hierarchy shared by all netcalc modules."""


class NetcalcError(Exception):
    """Base class for every error raised by netcalc."""


class IncompatibleIndexError(NetcalcError, ValueError):
    pass


class ScheduleError(NetcalcError, ValueError):
    """A probe schedule is too short or not monotone in the index order."""


class DominationError(NetcalcError, ValueError):
    def __init__(self, alpha, k, value, bound):
        self.alpha = alpha
        self.k = k
        self.value = value
        self.bound = bound
        super().__init__(
            f"domination violated at alpha={alpha!r}, k={k}: |a|={value:.6g} > g_k={bound:.6g}"
        )


class TailBoundError(NetcalcError, ValueError):
    """No computable tail bound is available where one is required."""


class UnknownSpaceError(NetcalcError, ValueError):
    pass


class SetDescriptorError(NetcalcError, ValueError):
    pass


class PossiblyInfiniteError(NetcalcError, ArithmeticError):
    """An integral could neither be bounded nor shown to diverge."""


class NotIntegrallyBoundedError(NetcalcError, ArithmeticError):
    pass


class UnsupportedPreimageError(NetcalcError, ValueError):
    pass


class NotBochnerApproximableError(NetcalcError, ArithmeticError):
    pass


class InconclusiveIntegralError(NetcalcError, ArithmeticError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class FrameError(NetcalcError, ValueError):
    pass


class TruncationError(NetcalcError, ValueError):
    def __init__(self, message, required_dim=None):
        super().__init__(message)
        self.required_dim = required_dim


class OperatorFormError(NetcalcError, ValueError):
    pass


class FredholmInconsistencyError(NetcalcError, ArithmeticError):
    pass


class ProbeFailedError(NetcalcError, ArithmeticError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SpecError(NetcalcError, ValueError):
    """Configuration file could not be parsed or validated."""

    def __init__(self, message, field=None, line=None, column=None):
        self.field = field
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}, column {column})"
        super().__init__(f"{message}{where}")


class ExperimentError(NetcalcError, RuntimeError):
    def __init__(self, experiment, cause):
        self.experiment = experiment
        self.cause = cause
        super().__init__(f"{experiment}: {cause}")
