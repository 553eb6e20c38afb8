"""Exception types raised across the package."""


class RobschedError(Exception):
    """Base class for all package errors."""


class NonErgodic(RobschedError, ValueError):
    """Utilization is not strictly below one, so no steady state exists."""


class NegativeTime(RobschedError, ValueError):
    pass


class NegativeDeadline(RobschedError, ValueError):
    pass


class StencilOutOfBox(RobschedError, ValueError):
    """A finite-difference stencil point left the ergodic search box."""


class InfeasibleCenter(RobschedError, ValueError):
    pass


class NoContactWithinRMax(RobschedError):
    """The radius search never touched the curve inside the search box."""


class EmptyPolyline(RobschedError, ValueError):
    pass


class TraceUnavailable(RobschedError):
    """A scenario curve does not cross the search box, so it cannot be traced."""


class ConfigError(RobschedError, ValueError):
    pass
