"""DoFP RGB-polarization toolkit."""

from ._core import *  # noqa: F401,F403
from ._core import PolakitError, RawMosaic, SensorLayout

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "1.0.0"
