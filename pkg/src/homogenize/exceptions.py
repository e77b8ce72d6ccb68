class ConfigurationError(ValueError):
    """Invalid mesh, coefficient, nonlinearity or experiment configuration."""


class EvaluationError(ArithmeticError):
    """A user-supplied function produced non-finite values."""


class SolverError(RuntimeError):
    """A linear or nonlinear solve failed; ``report`` carries the statistics."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
