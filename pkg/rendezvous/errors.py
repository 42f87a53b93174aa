"""
Exception hierarchy for the rendezvous library
"""
from typing import Any, Optional


class RendezvousError(Exception):
    """Base class for every error raised by the library"""


class DomainError(RendezvousError, ValueError):
    """A math domain violation: infeasible wind triangle, singular dynamics, arcsin argument"""

    def __init__(self, message: str, time: Optional[float] = None):
        if time is not None:
            message = f"{message} (at t={time:.3f}s)"
        super().__init__(message)
        self.time = time


class InfeasibleTrim(RendezvousError):
    """Trim inputs fall outside the admissible input set"""


class RangeError(RendezvousError, IndexError):
    """Arc length lookup outside the path"""


class SolverError(RendezvousError):
    """The optimizer could not proceed"""

    def __init__(self, message: str, time: Optional[float] = None):
        if time is not None:
            message = f"{message} (at t={time:.3f}s)"
        super().__init__(message)
        self.time = time


class MaxIterations(SolverError):
    """Iteration cap reached; carries the best iterate and the report"""

    def __init__(self, message: str, trajectory: Any = None, report: Any = None):
        super().__init__(message)
        self.trajectory = trajectory
        self.report = report


class ParseError(RendezvousError):
    """Configuration text is not valid JSON"""


class ValidationError(RendezvousError, ValueError):
    """Configuration violates the schema or an invariant; `key` names the offending entry"""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
