"""
Error hierarchy - every failure maps to one CLI exit code
"""


class ScatteringError(Exception):
    """Base class for all errors raised by the scattering engine"""

    exit_code = 1

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class ConfigurationError(ScatteringError):
    """Bad input: scenario files, specs, design requests (exit 2)"""

    exit_code = 2


class PhysicsDomainError(ScatteringError):
    """Input is well-formed but the physics is undefined there (exit 3)"""

    exit_code = 3


# Configuration errors

class InvalidSpec(ConfigurationError):
    pass


class ConfigError(ConfigurationError):
    """Scenario/config file problem, addressed by line and field"""

    def __init__(self, reason: str, path: str = None, line: int = None, field: str = None):
        location = ""
        if path:
            location = f"{path}:{line}: " if line else f"{path}: "
        if field:
            location += f"{field}: "
        super().__init__(f"{location}{reason}")
        self.path = path
        self.line = line
        self.field = field


class UnknownFigure(ConfigurationError):
    pass


class KOutOfDesignRange(ConfigurationError):
    pass


class PhaseOutOfDesignRange(ConfigurationError):
    pass


class DegeneratePhase(ConfigurationError):
    pass


class UnsupportedScenario(ConfigurationError):
    pass


# Physics-domain errors

class DomainError(PhysicsDomainError):
    pass


class BandEdgeError(DomainError):
    pass


class VelocityUndefined(PhysicsDomainError):
    pass


class PoleAtMechanicalResonance(PhysicsDomainError):
    pass


class SingularNodeMatrix(PhysicsDomainError):
    pass


class SingularBoundarySystem(PhysicsDomainError):
    pass


class PacketNotCleared(PhysicsDomainError):
    pass


class NormDrift(PhysicsDomainError):
    pass


class NegativeRadicand(PhysicsDomainError):
    pass


class ConservationViolation(PhysicsDomainError):
    """Lossless records whose flows do not sum to 1"""
