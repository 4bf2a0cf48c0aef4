"""
Exception hierarchy for hazefuse
"""
from typing import List, Optional


class HazefuseError(Exception):
    """Base class for all hazefuse errors"""


class ParseError(HazefuseError):
    """A scenario or dictionary file could not be parsed"""


class ValidationError(HazefuseError):
    """A file parsed but violates one or more invariants"""

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics) if diagnostics else [message]


class EndOfScenario(HazefuseError):
    """Stepping past the scenario duration"""


class OutOfRange(HazefuseError):
    """Time lookup outside [0, duration_s]"""


class DomainError(HazefuseError):
    """Argument outside the mathematical domain of an operation"""


class EmptyWindow(HazefuseError):
    """No history samples inside the feature window"""

    def __init__(self, channel: str):
        super().__init__(f"no samples in window for channel '{channel}'")
        self.channel = channel


class EmptyDictionary(HazefuseError):
    """Weather dictionary has no templates"""


class UnknownTemplate(HazefuseError):
    """Template name not present in the weather state network"""


class UnknownSensor(HazefuseError):
    """Sensor name not present in a schedule"""


class NonMonotonicTimestamp(HazefuseError):
    """History push with a timestamp not after the last one"""


class MismatchedScenario(HazefuseError):
    """Event log was not produced from the given scenario"""
