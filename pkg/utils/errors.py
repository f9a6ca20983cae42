# utils/errors.py

class ConfdimError(Exception):
    """Base class for every error raised by the library."""


class ConfigError(ConfdimError, ValueError):
    """Invalid configuration or family definition (CLI exit code 2)."""


class HoleLayoutError(ConfigError):
    """Removed rectangles violate the square-with-holes layout rules."""


class DepthExceeded(ConfdimError):
    pass


class InvalidAddress(ConfdimError):
    pass


class PointOutsideSpace(ConfdimError):
    pass


class Disconnected(ConfdimError):
    """No path joins two vertices of a graph."""


class Unresolved(ConfdimError):
    """Two points cannot be separated within the truncation horizon."""


class DegenerateRectangle(ConfdimError):
    pass


class UnsupportedFamily(ConfdimError):
    pass


class UnsupportedWeight(ConfdimError):
    pass


class InvalidP(ConfdimError):
    pass


class InvalidProblem(ConfdimError):
    pass


class InadmissibleInput(ConfdimError):
    pass


class BracketInvalid(ConfdimError):
    pass


class DivergentRate(ConfdimError):
    pass
