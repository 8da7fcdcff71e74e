"""
Errors used by our package.
"""


class SolverError(Exception):
    """Raised for errors that should cause the solver to exit."""
    pass


class GridError(SolverError):
    """Raised when a radial or angular grid cannot resolve the requested data."""
    pass


class ProfileError(SolverError):
    """Raised when a radial profile lacks the data an operation needs (tail, derivatives)."""
    pass


class SymmetryError(SolverError):
    """Raised when a mode family violates conjugate symmetry or f_n(0) = 0."""
    pass


class OperatorError(SolverError):
    """Raised for divergent or ill-posed radial integrals."""
    pass


class BackgroundError(SolverError):
    """Raised when a radial forcing does not define an admissible background flow."""
    pass


class NormSpecError(SolverError):
    """Raised for inadmissible weighted norm parameters."""
    pass


class ConfigError(SolverError):
    """Raised for unreadable or invalid run configurations."""

    def __init__(self, message, line=None):
        if line is not None:
            message = 'line {}: {}'.format(line, message)
        super().__init__(message)
        self.line = line


class DivergenceError(SolverError):
    """Raised when the fixed-point iteration stops contracting."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class OutputError(SolverError):
    """Raised when run artifacts cannot be written or read back."""
    pass
