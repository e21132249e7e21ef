from typing import Optional, Sequence


class SqueezerError(Exception):
    """Base error carrying the exit code reported by the command line"""
    exit_code = 1

    def __init__(self, message: str, module: Optional[str] = None):
        self.message = message
        self.module = module
        super().__init__(f"[{module}] {message}" if module else message)


class ConfigError(SqueezerError):
    """Malformed scenario, parameter or output specification"""
    exit_code = 2


class RegimeError(SqueezerError):
    """Parameters outside the regime an operation is defined for"""
    exit_code = 3


class NumericalError(SqueezerError):
    """Numerical failure (overflow, lost physicality, bracket failure)"""
    exit_code = 4


class IntegrationHalted(NumericalError):
    """
    Raised when a covariance integration stops early

    Carries the last time reached and the states computed up to it so
    callers can still flush partial results.
    """

    def __init__(self, message: str, t_reached: float, states: Sequence, module: str = "dynamics"):
        self.t_reached = t_reached
        self.states = list(states)
        super().__init__(f"{message} (halted at t={t_reached:.6g})", module)
