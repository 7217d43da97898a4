"""Read-only HTTP query service exposing trace analytics to clients."""

from .app import create_app
from .config import ServiceConfig, load_config
from .session import SessionState

__all__ = ["create_app", "ServiceConfig", "load_config", "SessionState"]
