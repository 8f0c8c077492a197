"""Two-UAV uplink/downlink trajectory and communication planner."""

try:  # packaged layout: the extension lives inside the package
    from ._core import *  # noqa: F401,F403
    from ._core import __doc__  # noqa: F401
except ImportError:  # development layout: extension on sys.path
    from _core import *  # noqa: F401,F403
    from _core import __doc__  # noqa: F401
