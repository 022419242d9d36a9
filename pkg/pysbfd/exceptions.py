class PysbfdException(Exception):
    """Base exception."""

    default_message = 'Simulation failed.'

    def __init__(self, message=None):
        self.message = message or self.default_message
        super().__init__(self.message)


class WrongArguments(PysbfdException, ValueError):
    """The exception is raised if the passed arguments are insufficient or invalid"""

    default_message = 'Arguments are insufficient or invalid.'


class ConfigError(PysbfdException, ValueError):
    """The exception is raised if a scenario configuration can not be parsed or is invalid"""

    default_message = 'Scenario configuration is invalid.'

    def __init__(self, message=None, *, key: str = '', line: int = 0):
        self.key = key
        self.line = line

        if message and line:
            message = f'Line {line}: {message}'

        super().__init__(message)


class PatternError(PysbfdException, ValueError):
    """The exception is raised if SBFD pattern text or frame structure is invalid"""

    default_message = 'SBFD pattern is invalid.'


class NumerologyError(PysbfdException, ValueError):
    """The exception is raised if the occupied grid does not fit into the channel bandwidth"""

    def __init__(self, occupied_hz: float, bandwidth_hz: float):
        self.occupied_hz = occupied_hz
        self.bandwidth_hz = bandwidth_hz
        super().__init__(
            f'Occupied bandwidth {occupied_hz / 1e6:.6g} MHz exceeds '
            f'channel bandwidth {bandwidth_hz / 1e6:.6g} MHz.')


class GeometryError(PysbfdException, ValueError):
    """The exception is raised if two endpoints of a link share the same position"""

    default_message = 'Link endpoints are co-located.'


class BeamformingError(PysbfdException, ArithmeticError):
    """The exception is raised if beam weights can not be normalized"""

    default_message = 'Conjugate steering vectors sum to zero.'


class EstimationError(PysbfdException, ArithmeticError):
    """The exception is raised if the line spectrum estimator fails"""

    default_message = 'Signal subspace is defective.'


class DegenerateChannel(PysbfdException, ArithmeticError):
    """The exception is raised if a user channel has no energy at any access point"""

    default_message = 'Channel is all-zero.'


class ReportRowNotFound(PysbfdException, KeyError):
    """The exception is raised if a row or a sweep point is not found in a report"""

    default_message = 'There is no such row within the report.'


class SimulationError(PysbfdException, RuntimeError):
    """The exception is raised if too many Monte Carlo evaluations fail"""

    default_message = 'Too many failed trials.'
