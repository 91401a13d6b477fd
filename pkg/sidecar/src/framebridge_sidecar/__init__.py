"""Reference provider server for the framebridge wire protocol."""

from .config import SidecarConfig, SidecarConfigError
from .server import SidecarServer, serve

__version__ = "0.1.0"

__all__ = ["SidecarConfig", "SidecarConfigError", "SidecarServer", "serve"]
