"""Exception hierarchy shared by all modules.

Every exception carries a short machine-readable ``code`` which the CLI
prints as ``code:<value>`` on stderr.
"""


class WeakValueError(Exception):
    code = "error"


class ValidationError(WeakValueError, ValueError):
    code = "validation_error"


class ForbiddenTransition(WeakValueError):
    """Post-selection probability vanishes (total amplitude or pointer norm too small)."""

    code = "forbidden_transition"


class NoOpenPath(ForbiddenTransition):
    """Every path amplitude is zero, so path probabilities are undefined."""

    code = "no_open_path"


class RegimeError(WeakValueError):
    code = "regime_error"


class NumericalError(WeakValueError, ArithmeticError):
    code = "numerical_error"

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
