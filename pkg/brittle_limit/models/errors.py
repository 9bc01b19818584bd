class BrittleLimitError(Exception):
    """Base class for errors raised by brittle_limit"""


class ConfigError(BrittleLimitError, ValueError):
    """Run configuration failed schema validation"""


class NumericalError(BrittleLimitError):
    """A computation could not produce a trustworthy number"""


class NonInvertibleError(NumericalError):
    """Effective isotropic moduli are not positive"""


class InfeasibleBranchError(NumericalError):
    """No branch candidate of a spectral maximization was admissible"""


class DualityGapError(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SolverConvergenceError(NumericalError):
    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class OracleFailure(NumericalError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
