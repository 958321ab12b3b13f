"""
Custom exceptions for the application layer.

In Clean Architecture:
- These exceptions are part of the Application Business Rules layer
- They provide specific error types for model loading, control and experiments
- They help standardize error handling across use cases
"""

from typing import Optional


class ApplicationException(Exception):
    """Base exception for application layer errors"""

    pass


class ModelParseException(ApplicationException):
    """Raised when a model file does not follow the model-file grammar"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class ModelValidationException(ApplicationException):
    """Raised when a parsed model violates a kinematic model invariant"""

    pass


class DimensionMismatchException(ApplicationException):
    """Raised when a configuration does not match the model's joint count"""

    pass


class ControllerFailureException(ApplicationException):
    """Raised when the motion controller cannot produce a command"""

    def __init__(
        self,
        message: str,
        theta_eps: float = float("nan"),
        error_norm: float = float("nan"),
        manip: float = float("nan"),
        solver_status: str = "",
    ):
        super().__init__(message)
        self.theta_eps = theta_eps
        self.error_norm = error_norm
        self.manip = manip
        self.solver_status = solver_status

    @property
    def diagnostics(self) -> dict:
        return {
            "theta_eps": self.theta_eps,
            "error_norm": self.error_norm,
            "manip": self.manip,
            "solver_status": self.solver_status,
        }


class QPValidationException(ApplicationException):
    """Raised when a QP handed to the solver is malformed"""

    pass


class TreeConstructionException(ApplicationException):
    """Raised when a behaviour tree is built with invalid arity or structure"""

    pass


class TreeFileException(ApplicationException):
    """Raised when a tree description cannot be parsed"""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class TrajectoryException(ApplicationException):
    """Raised when a trajectory is too short for a metric"""

    pass


class ExperimentConfigurationException(ApplicationException):
    """Raised when an experiment run is configured inconsistently"""

    pass
